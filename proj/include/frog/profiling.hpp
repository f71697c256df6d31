#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "frog/model.hpp"

namespace frog::profiling {

/// One worker's answers to the qualification test of one category.
struct QualificationRecord {
    WorkerId worker;
    CategoryIndex category{};
    std::vector<int> answers;
    std::vector<int> ground_truth;
    // Per testing-task difficulty weights in [0, 1]; empty means "not yet
    // estimated".
    std::vector<double> test_difficulties;

    /// Throws EmptyTest / DomainError when the record is malformed.
    void validate() const;
    std::size_t correct_count() const;
};

/// Fraction of qualification tasks answered correctly, clamped.
ClampedAccuracy initial_accuracy(const QualificationRecord& record);
double raw_initial_accuracy(const QualificationRecord& record);

/// Accuracy-weighted share of the cohort that got a testing task wrong.
double testing_task_difficulty(std::span<const double> worker_accuracies,
                               const std::vector<bool>& wrong);

/// Difficulty-weighted accuracy. Throws DegenerateWeights when every weight
/// is zero.
ClampedAccuracy weighted_accuracy(const QualificationRecord& record);
double raw_weighted_accuracy(const QualificationRecord& record);

struct CohortCalibration {
    // Aligned with the input records.
    std::vector<double> raw_accuracies;
    std::vector<ClampedAccuracy> accuracies;
    // Testing-task difficulties per category.
    std::map<CategoryIndex, std::vector<double>> difficulties;
    int iterations{};
    bool converged{};
};

inline constexpr double kCalibrationTolerance = 1e-6;
inline constexpr int kCalibrationMaxIterations = 100;

/// Alternates the accuracy and difficulty estimates, starting from uniform
/// difficulty, until the largest change drops below the tolerance.
CohortCalibration calibrate_cohort(std::span<const QualificationRecord> records,
                                   double tolerance = kCalibrationTolerance,
                                   int max_iterations = kCalibrationMaxIterations);

struct RecentOutcome {
    int answer{};
    int aggregated{};
};

/// Blends the qualification accuracy with the agreement rate on the k most
/// recent real tasks, weighting the former by |W_c| / (|W_c| + k).
ClampedAccuracy update_accuracy(double qualification_accuracy, std::size_t cohort_size,
                                std::span<const RecentOutcome> recent);

inline constexpr Seconds kMinPredictedResponse = 1e-3;

/// Least-squares line through the `eta` most recent samples evaluated at `at`.
Seconds predict_response_time(std::span<const ResponseSample> history, std::size_t eta,
                              Seconds at);

struct RecentWindow {
    Seconds span{900.0};
    std::size_t min_count{3};
    std::size_t max_count{50};
};

/// Number of samples to use: everything inside the trailing window, kept
/// within [min_count, max_count] and never more than the history holds.
std::size_t recent_sample_count(std::span<const ResponseSample> history, Seconds now,
                                const RecentWindow& window = {});

struct DifficultyEstimate {
    TaskId task;
    double difficulty{};
    double entropy{};
    int skips{};
    int answered{};
    int assignees{};
};

/// Skip share plus normalised accuracy-weighted answer entropy plus a base
/// constant, capped at 1. `accuracies` aligns with `task.answers`.
DifficultyEstimate task_difficulty(const Task& task, std::span<const double> accuracies,
                                   double base = kBaseDifficulty);

} // namespace frog::profiling
