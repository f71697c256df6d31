#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "frog/model.hpp"

namespace frog::scheduling {

/// Urgency of an open task: (d * q) ^ ceil((max_lapse - lapse) / mean_response).
/// Ranking uses `log_score` so long waits cannot underflow to ties.
struct DelayScore {
    TaskId task;
    double score{1.0};
    double log_score{0.0};
    int exponent{};
    double difficulty{};
    double quality{};
    Seconds lapse{};
    Seconds max_lapse{};
    Seconds mean_response{};
};

/// Time lapse of a task: now - start for open tasks, its latency once done.
Seconds task_lapse(const Task& task, Seconds now);
/// Largest lapse over every arrived task (completed ones included).
Seconds max_lapse(std::span<const Task> tasks, Seconds now);

DelayScore delay_score(const Task& task, Seconds now, Seconds max_lapse, Seconds mean_response);

/// Strict weak order: higher score first, then earlier start, then lower id.
bool more_urgent(const DelayScore& a, const Task& ta, const DelayScore& b, const Task& tb);

struct UrgencyContext {
    Seconds now{};
    Seconds max_lapse{};
    // Running mean response time per category, indexed by category.
    std::span<const Seconds> category_mean_response;
};

/// Workers are looked up by id: workers[id.value].id == id.
using WorkerTable = std::span<const Worker>;

/// Estimated accuracies of the answered and in-flight workers of a task.
std::vector<double> coverage_accuracies(const Task& task, WorkerTable workers);

/// True once answered plus in-flight workers form an odd set whose expected
/// majority accuracy reaches the task's threshold.
bool coverage_satisfied(const Task& task, WorkerTable workers);

struct RequestDecision {
    std::size_t task_index{};
    // The in-flight answer will satisfy the threshold; the task leaves the
    // open set now and completes when the answer arrives.
    bool closes{};
};

/// Serves a requesting worker the most urgent eligible task.
std::optional<RequestDecision> greedy_request(const Worker& worker, std::span<const Task> tasks,
                                              WorkerTable workers, const UrgencyContext& ctx);

/// Serves a requesting worker a uniformly random eligible task.
std::optional<RequestDecision> random_schedule(const Worker& worker, std::span<const Task> tasks,
                                               WorkerTable workers, std::mt19937_64& rng);

struct Candidate {
    WorkerId id;
    double accuracy{};
    Seconds response{};
};

/// Adds the most accurate candidates one at a time until the set (already
/// assigned included) has odd size and reaches `quality`. Returns the newly
/// added workers, or nothing if the pool runs out first.
std::vector<WorkerId> min_worker_set_selection(double quality, std::span<const Candidate> pool,
                                               std::span<const double> already_assigned = {});

/// Same stopping rule, but candidates are taken fastest first.
std::vector<WorkerId> fastest_worker_set_selection(double quality, std::span<const Candidate> pool,
                                                   std::span<const double> already_assigned = {});

/// The `count` most accurate candidates, or nothing if fewer are available.
std::vector<WorkerId> top_accuracy_selection(std::size_t count, std::span<const Candidate> pool);

enum class BatchRule {
    min_worker_set, // BBS
    fastest_first,  // fGreedy
    top_k_accuracy, // iCrowd-k
};

struct BatchOptions {
    BatchRule rule{BatchRule::min_worker_set};
    Seconds interval{30.0};
    std::size_t icrowd_k{3};
};

struct RoundPlan {
    Seconds interval{};
    // Remaining budget per worker, indexed by worker id.
    std::vector<Seconds> remaining_budget;
    Assignment assignment;
};

/// One scheduling round: tasks are taken in urgency order and each gets a
/// worker set chosen by `options.rule`. A worker is only offered a task whose
/// predicted response time fits its remaining budget, and leaves the round
/// once no category fits. `budgets` is indexed by worker id; `available`
/// lists the workers that may take work this round.
RoundPlan greedy_batch(std::span<const Task> tasks, WorkerTable workers,
                       std::span<const WorkerId> available, std::span<const Seconds> budgets,
                       const UrgencyContext& ctx, const BatchOptions& options);

} // namespace frog::scheduling
