#include "frog/voting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "frog/errors.hpp"

namespace frog::voting {
namespace {

void check_binary_accuracy(double a) {
    if (!(a > 0.5 && a <= 1.0)) {
        throw DomainError("voter accuracy must lie in (0.5, 1], got " + std::to_string(a));
    }
}

std::size_t majority_threshold(std::size_t k) { return (k + 1) / 2; }

// P(X >= t) for a count distribution.
double tail(std::span<const double> dist, std::size_t t) {
    double sum = 0.0;
    for (std::size_t c = t; c < dist.size(); ++c) sum += dist[c];
    return sum;
}

void extend(std::vector<double>& dist, double a) {
    dist.push_back(0.0);
    for (std::size_t c = dist.size() - 1; c > 0; --c) {
        dist[c] = dist[c] * (1.0 - a) + dist[c - 1] * a;
    }
    dist[0] *= (1.0 - a);
}

} // namespace

double expected_accuracy_majority(std::span<const double> accuracies, EvenSizes mode) {
    if (accuracies.empty()) throw EmptyWorkerSet("expected accuracy of an empty worker set");
    if (accuracies.size() % 2 == 0 && mode == EvenSizes::reject) {
        throw EvenSetNotComparable("majority voting needs an odd number of workers");
    }
    std::vector<double> dist{1.0};
    dist.reserve(accuracies.size() + 1);
    for (double a : accuracies) {
        check_binary_accuracy(a);
        extend(dist, a);
    }
    return std::min(1.0, tail(dist, majority_threshold(accuracies.size())));
}

WorkerSetAccuracy::WorkerSetAccuracy(EvenSizes mode) : mode_(mode) {}

WorkerSetAccuracy::WorkerSetAccuracy(std::span<const double> accuracies, EvenSizes mode)
    : mode_(mode) {
    for (double a : accuracies) add(a);
}

double WorkerSetAccuracy::probability_with(double accuracy) const {
    check_binary_accuracy(accuracy);
    const std::size_t t = majority_threshold(accuracies_.size() + 1);
    // t >= 1 and t - 1 <= current size, so both indices are valid.
    return std::min(1.0, tail(correct_count_, t) + accuracy * correct_count_[t - 1]);
}

void WorkerSetAccuracy::add(double accuracy) {
    cached_ = probability_with(accuracy);
    accuracies_.push_back(accuracy);
    extend(correct_count_, accuracy);
}

double WorkerSetAccuracy::probability() const {
    if (accuracies_.empty()) throw EmptyWorkerSet("expected accuracy of an empty worker set");
    if (accuracies_.size() % 2 == 0 && mode_ == EvenSizes::reject) {
        throw EvenSetNotComparable("majority voting needs an odd number of workers");
    }
    return cached_;
}

double expected_accuracy_incremental(const WorkerSetAccuracy& base, double new_accuracy) {
    if ((base.size() + 1) % 2 == 0 && base.mode() == EvenSizes::reject) {
        throw EvenSetNotComparable("majority voting needs an odd number of workers");
    }
    return base.probability_with(new_accuracy);
}

namespace {

// P(every one of `bins` bins holds fewer than `limit` balls) when `balls`
// balls are thrown uniformly at random.
double all_bins_below(int balls, int bins, int limit) {
    if (limit <= 0) return 0.0;
    if (balls == 0) return 1.0;
    // remaining[s] = P(s balls still to place, all bins so far below limit)
    std::vector<double> remaining(static_cast<std::size_t>(balls) + 1, 0.0);
    remaining[static_cast<std::size_t>(balls)] = 1.0;
    for (int open = bins; open > 1; --open) {
        const double p = 1.0 / open;
        std::vector<double> next(remaining.size(), 0.0);
        for (int s = 0; s <= balls; ++s) {
            const double mass = remaining[static_cast<std::size_t>(s)];
            if (mass == 0.0) continue;
            // x ~ Binomial(s, p) balls land in this bin
            double pmf = std::pow(1.0 - p, s);
            for (int x = 0; x <= s && x < limit; ++x) {
                next[static_cast<std::size_t>(s - x)] += mass * pmf;
                pmf *= static_cast<double>(s - x) / static_cast<double>(x + 1) * p / (1.0 - p);
            }
        }
        remaining = std::move(next);
    }
    // The last bin takes whatever is left.
    double ok = 0.0;
    for (int s = 0; s < limit && s <= balls; ++s) ok += remaining[static_cast<std::size_t>(s)];
    return ok;
}

} // namespace

double expected_accuracy_multichoice_majority(std::span<const double> accuracies,
                                              int choice_count) {
    if (choice_count < 2) throw BadChoiceCount("choice count must be at least 2");
    if (accuracies.empty()) throw EmptyWorkerSet("expected accuracy of an empty worker set");
    std::vector<double> dist{1.0};
    for (double a : accuracies) {
        if (!(a > 1.0 / choice_count && a <= 1.0)) {
            throw DomainError("voter accuracy must exceed 1/R");
        }
        extend(dist, a);
    }
    const int k = static_cast<int>(accuracies.size());
    double total = 0.0;
    for (int correct = 1; correct <= k; ++correct) {
        total += dist[static_cast<std::size_t>(correct)] *
                 all_bins_below(k - correct, choice_count - 1, correct);
    }
    return std::min(1.0, total);
}

namespace {

struct Tally {
    std::vector<double> score;
    std::vector<int> votes;
    int voters{};
};

Tally tally(std::span<const Answer> answers, int choice_count) {
    Tally t;
    t.score.assign(static_cast<std::size_t>(choice_count), 0.0);
    t.votes.assign(static_cast<std::size_t>(choice_count), 0);
    for (const auto& a : answers) {
        if (a.is_skip()) continue;
        if (a.choice < 0 || a.choice >= choice_count) {
            throw DomainError("answer choice outside [0, R)");
        }
        ++t.votes[static_cast<std::size_t>(a.choice)];
        ++t.voters;
    }
    return t;
}

// Index of the unique maximum among `eligible` entries, or nullopt on a tie.
std::optional<int> unique_argmax(const std::vector<double>& values,
                                 const std::vector<bool>& eligible) {
    std::optional<int> best;
    bool tied = false;
    for (std::size_t r = 0; r < values.size(); ++r) {
        if (!eligible[r]) continue;
        if (!best || values[r] > values[static_cast<std::size_t>(*best)]) {
            best = static_cast<int>(r);
            tied = false;
        } else if (values[r] == values[static_cast<std::size_t>(*best)]) {
            tied = true;
        }
    }
    if (tied) return std::nullopt;
    return best;
}

double max_of(const std::vector<double>& values, const std::vector<bool>& eligible) {
    double m = 0.0;
    for (std::size_t r = 0; r < values.size(); ++r) {
        if (eligible[r]) m = std::max(m, values[r]);
    }
    return m;
}

} // namespace

AggregateResult aggregate(std::span<const Answer> answers, Scheme scheme,
                          const AggregateOptions& options) {
    const int R = options.choice_count;
    if (R < 2) throw BadChoiceCount("choice count must be at least 2");
    const bool needs_accuracy = scheme == Scheme::weighted_majority || scheme == Scheme::bayesian;
    if (needs_accuracy && options.accuracies.size() != answers.size()) {
        throw DomainError("per-answer accuracies must align with the answers");
    }

    std::vector<double> priors;
    if (scheme == Scheme::bayesian) {
        if (options.priors.size() != static_cast<std::size_t>(R)) {
            throw BadPrior("need one prior per choice");
        }
        double sum = 0.0;
        for (double p : options.priors) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw BadPrior("priors must be non-negative");
            sum += p;
        }
        if (!(sum > 0.0)) throw BadPrior("priors must have a positive sum");
        for (double p : options.priors) priors.push_back(p / sum);
    }

    Tally t = tally(answers, R);
    if (t.voters == 0) return {std::nullopt, 0.0};

    std::vector<bool> voted(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) voted[static_cast<std::size_t>(r)] = t.votes[static_cast<std::size_t>(r)] > 0;
    std::vector<double> counts(t.votes.begin(), t.votes.end());

    switch (scheme) {
    case Scheme::majority: {
        auto winner = unique_argmax(counts, voted);
        return {winner, max_of(counts, voted) / t.voters};
    }
    case Scheme::half: {
        const double top = max_of(counts, voted);
        std::optional<int> winner;
        if (2.0 * top > t.voters) winner = unique_argmax(counts, voted);
        return {winner, top / t.voters};
    }
    case Scheme::weighted_majority: {
        std::vector<double> weight(static_cast<std::size_t>(R), 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < answers.size(); ++i) {
            if (answers[i].is_skip()) continue;
            weight[static_cast<std::size_t>(answers[i].choice)] += options.accuracies[i];
            total += options.accuracies[i];
        }
        auto winner = unique_argmax(weight, voted);
        return {winner, total > 0.0 ? max_of(weight, voted) / total : 0.0};
    }
    case Scheme::bayesian: {
        // BP(W^r) = prod over voters of r of Pr(r) * alpha_j
        std::vector<double> bp(static_cast<std::size_t>(R), 1.0);
        for (std::size_t i = 0; i < answers.size(); ++i) {
            if (answers[i].is_skip()) continue;
            const auto r = static_cast<std::size_t>(answers[i].choice);
            bp[r] *= priors[r] * options.accuracies[i];
        }
        auto winner = unique_argmax(bp, voted);
        return {winner, max_of(bp, voted)};
    }
    }
    return {std::nullopt, 0.0};
}

} // namespace frog::voting
