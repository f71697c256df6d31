#include "frog/profiling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "frog/errors.hpp"

namespace frog::profiling {

void QualificationRecord::validate() const {
    if (answers.empty()) throw EmptyTest("qualification test has no tasks");
    if (answers.size() != ground_truth.size()) {
        throw DomainError("qualification answers and ground truth differ in length");
    }
    if (!test_difficulties.empty()) {
        if (test_difficulties.size() != answers.size()) {
            throw DomainError("one difficulty per testing task is required");
        }
        for (double b : test_difficulties) {
            if (!(b >= 0.0 && b <= 1.0)) throw DomainError("testing-task difficulty outside [0, 1]");
        }
    }
}

std::size_t QualificationRecord::correct_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < answers.size(); ++i) n += answers[i] == ground_truth[i];
    return n;
}

double raw_initial_accuracy(const QualificationRecord& record) {
    record.validate();
    return static_cast<double>(record.correct_count()) / static_cast<double>(record.answers.size());
}

ClampedAccuracy initial_accuracy(const QualificationRecord& record) {
    return clamp_accuracy(raw_initial_accuracy(record));
}

double testing_task_difficulty(std::span<const double> worker_accuracies,
                               const std::vector<bool>& wrong) {
    if (worker_accuracies.empty()) throw EmptyCohort("no workers took the test");
    if (worker_accuracies.size() != wrong.size()) {
        throw DomainError("accuracies and wrong flags differ in length");
    }
    double wrong_mass = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < wrong.size(); ++j) {
        const double a = worker_accuracies[j];
        if (!(a > 0.0 && a <= 1.0)) throw DomainError("cohort accuracy outside (0, 1]");
        total += a;
        if (wrong[j]) wrong_mass += a;
    }
    return wrong_mass / total;
}

double raw_weighted_accuracy(const QualificationRecord& record) {
    record.validate();
    if (record.test_difficulties.empty()) {
        throw DegenerateWeights("testing-task difficulties not populated");
    }
    double hit = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < record.answers.size(); ++i) {
        total += record.test_difficulties[i];
        if (record.answers[i] == record.ground_truth[i]) hit += record.test_difficulties[i];
    }
    if (!(total > 0.0)) throw DegenerateWeights("every testing task has zero difficulty");
    return hit / total;
}

ClampedAccuracy weighted_accuracy(const QualificationRecord& record) {
    return clamp_accuracy(raw_weighted_accuracy(record));
}

CohortCalibration calibrate_cohort(std::span<const QualificationRecord> records,
                                   double tolerance, int max_iterations) {
    if (records.empty()) throw EmptyCohort("no qualification records");

    std::map<CategoryIndex, std::vector<std::size_t>> by_category;
    for (std::size_t r = 0; r < records.size(); ++r) {
        records[r].validate();
        by_category[records[r].category].push_back(r);
    }

    CohortCalibration out;
    out.raw_accuracies.assign(records.size(), 0.0);
    for (const auto& [category, members] : by_category) {
        const std::size_t tests = records[members.front()].answers.size();
        for (std::size_t r : members) {
            if (records[r].answers.size() != tests) {
                throw DomainError("records of one category must share the same test");
            }
        }
        out.difficulties[category].assign(tests, 1.0);
    }

    // Working copies so the weighted estimator can read the current weights.
    std::vector<QualificationRecord> work(records.begin(), records.end());

    for (int it = 1; it <= max_iterations; ++it) {
        double change = 0.0;
        for (const auto& [category, members] : by_category) {
            auto& beta = out.difficulties[category];
            for (std::size_t r : members) {
                work[r].test_difficulties = beta;
                double a;
                try {
                    a = raw_weighted_accuracy(work[r]);
                } catch (const DegenerateWeights&) {
                    a = raw_initial_accuracy(work[r]);
                }
                change = std::max(change, std::abs(a - out.raw_accuracies[r]));
                out.raw_accuracies[r] = a;
            }

            std::vector<double> weights;
            weights.reserve(members.size());
            for (std::size_t r : members) {
                weights.push_back(std::max(out.raw_accuracies[r], kAccuracyNudge));
            }
            for (std::size_t i = 0; i < beta.size(); ++i) {
                std::vector<bool> wrong;
                wrong.reserve(members.size());
                for (std::size_t r : members) {
                    wrong.push_back(work[r].answers[i] != work[r].ground_truth[i]);
                }
                const double b = testing_task_difficulty(weights, wrong);
                change = std::max(change, std::abs(b - beta[i]));
                beta[i] = b;
            }
        }
        out.iterations = it;
        if (change < tolerance) {
            out.converged = true;
            break;
        }
    }

    out.accuracies.reserve(records.size());
    for (double a : out.raw_accuracies) out.accuracies.push_back(clamp_accuracy(a));
    return out;
}

ClampedAccuracy update_accuracy(double qualification_accuracy, std::size_t cohort_size,
                                std::span<const RecentOutcome> recent) {
    if (recent.empty()) return clamp_accuracy(qualification_accuracy);
    const double k = static_cast<double>(recent.size());
    const double theta = static_cast<double>(cohort_size) / (static_cast<double>(cohort_size) + k);
    const auto agree = std::ranges::count_if(
        recent, [](const RecentOutcome& o) { return o.answer == o.aggregated; });
    const double rate = static_cast<double>(agree) / k;
    return clamp_accuracy(theta * qualification_accuracy + (1.0 - theta) * rate);
}

Seconds predict_response_time(std::span<const ResponseSample> history, std::size_t eta,
                              Seconds at) {
    if (history.empty()) throw NoHistory("no response history");
    const std::size_t n = std::clamp<std::size_t>(eta, 1, history.size());
    const auto recent = history.last(n);

    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& s : recent) {
        mean_x += s.timestamp;
        mean_y += s.response;
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& s : recent) {
        const double dx = s.timestamp - mean_x;
        sxx += dx * dx;
        sxy += dx * (s.response - mean_y);
    }
    double predicted = mean_y;
    if (sxx > 0.0) predicted = mean_y + (sxy / sxx) * (at - mean_x);
    return std::max(predicted, kMinPredictedResponse);
}

std::size_t recent_sample_count(std::span<const ResponseSample> history, Seconds now,
                                const RecentWindow& window) {
    const auto in_window = static_cast<std::size_t>(std::ranges::count_if(
        history, [&](const ResponseSample& s) { return s.timestamp >= now - window.span; }));
    const std::size_t n = std::clamp(in_window, window.min_count, window.max_count);
    return std::min(n, history.size());
}

DifficultyEstimate task_difficulty(const Task& task, std::span<const double> accuracies,
                                   double base) {
    if (task.answers.empty()) throw NoAssignees("no worker has been assigned this task");
    if (accuracies.size() != task.answers.size()) {
        throw DomainError("one accuracy per answer is required");
    }

    DifficultyEstimate est;
    est.task = task.id;
    est.assignees = static_cast<int>(task.answers.size());

    std::vector<double> mass(static_cast<std::size_t>(task.choice_count), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < task.answers.size(); ++i) {
        const auto& a = task.answers[i];
        if (a.is_skip()) {
            ++est.skips;
            continue;
        }
        ++est.answered;
        mass[static_cast<std::size_t>(a.choice)] += accuracies[i];
        total += accuracies[i];
    }

    if (total > 0.0) {
        for (double m : mass) {
            if (m <= 0.0) continue;
            const double p = m / total;
            est.entropy -= p * std::log(p);
        }
    }

    const double W = est.assignees;
    const double normalised = est.entropy / std::log(static_cast<double>(task.choice_count));
    est.difficulty = std::min(1.0, est.skips / W + (est.answered / W) * normalised + base);
    return est;
}

} // namespace frog::profiling
