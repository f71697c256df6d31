#pragma once

#include <optional>
#include <span>
#include <vector>

#include "frog/model.hpp"

namespace frog::voting {

/// How even-sized worker sets are treated. Majority voting is only well
/// defined for an odd number of voters; `formula_as_written` evaluates the
/// closed form anyway with threshold ceil(k/2), which lets incremental and
/// direct evaluation be cross-checked at every size.
enum class EvenSizes { reject, formula_as_written };

/// Probability that a strict majority of independent binary voters with the
/// given accuracies is correct. O(k^2) dynamic programming over the number of
/// correct voters.
double expected_accuracy_majority(std::span<const double> accuracies,
                                  EvenSizes mode = EvenSizes::reject);

/// A worker set together with the distribution of its number of correct
/// voters, so that adding one more worker costs O(k).
class WorkerSetAccuracy {
public:
    explicit WorkerSetAccuracy(EvenSizes mode = EvenSizes::reject);
    explicit WorkerSetAccuracy(std::span<const double> accuracies,
                               EvenSizes mode = EvenSizes::reject);

    void add(double accuracy);

    /// Expected accuracy of this set plus one more worker, without mutating.
    /// Uses the split  Pr(W) = P(X' >= t) + a_j * P(X' = t - 1)  where X'
    /// counts correct voters among the existing set and t = ceil(|W| / 2).
    double probability_with(double accuracy) const;

    /// Expected accuracy of the current set. Throws EmptyWorkerSet, or
    /// EvenSetNotComparable for even sizes in `reject` mode.
    double probability() const;

    std::size_t size() const noexcept { return accuracies_.size(); }
    bool empty() const noexcept { return accuracies_.empty(); }
    std::span<const double> accuracies() const noexcept { return accuracies_; }
    EvenSizes mode() const noexcept { return mode_; }

private:
    EvenSizes mode_;
    std::vector<double> accuracies_;
    // correct_count_[c] = P(exactly c voters correct)
    std::vector<double> correct_count_{1.0};
    double cached_{0.0};
};

double expected_accuracy_incremental(const WorkerSetAccuracy& base, double new_accuracy);

/// Probability that the correct choice gets a strict plurality when wrong
/// voters pick uniformly among the R - 1 incorrect choices. Ties fail.
double expected_accuracy_multichoice_majority(std::span<const double> accuracies,
                                              int choice_count);

enum class Scheme { majority, weighted_majority, half, bayesian };

struct AggregateOptions {
    int choice_count{2};
    // Per-answer accuracies, aligned with the answer list (skips included).
    std::span<const double> accuracies{};
    // Prior over choices; any non-negative vector with positive sum, it is
    // normalised before use.
    std::span<const double> priors{};
};

struct AggregateResult {
    std::optional<int> choice;
    double support{};
};

/// Aggregates the non-skip answers. Ties between leading choices yield no
/// winner. An answer list without non-skip entries yields {nullopt, 0}.
AggregateResult aggregate(std::span<const Answer> answers, Scheme scheme,
                          const AggregateOptions& options = {});

} // namespace frog::voting
