#pragma once

#include <stdexcept>
#include <string>

namespace frog {

// Root of every error the engine raises. Callers that only care whether an
// operation failed can catch this; the subclasses name the failure mode.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FROG_DEFINE_ERROR(Name)                  \
    class Name : public Error {                  \
    public:                                      \
        using Error::Error;                      \
    }

FROG_DEFINE_ERROR(DomainError);
FROG_DEFINE_ERROR(UnusableWorker);
FROG_DEFINE_ERROR(EmptyWorkerSet);
FROG_DEFINE_ERROR(EvenSetNotComparable);
FROG_DEFINE_ERROR(BadChoiceCount);
FROG_DEFINE_ERROR(BadPrior);
FROG_DEFINE_ERROR(EmptyTest);
FROG_DEFINE_ERROR(EmptyCohort);
FROG_DEFINE_ERROR(DegenerateWeights);
FROG_DEFINE_ERROR(NoHistory);
FROG_DEFINE_ERROR(NoAssignees);
FROG_DEFINE_ERROR(BadCategoryStats);

#undef FROG_DEFINE_ERROR

// Configuration and input-file problems. `key()` names the offending key path
// (or file) so the CLI can point at it.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace frog
