#include "frog/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "frog/errors.hpp"
#include "frog/voting.hpp"

namespace frog::scheduling {

Seconds task_lapse(const Task& task, Seconds now) {
    const Seconds since_start = now - task.start_time;
    if (auto l = task.latency()) return std::min(since_start, *l);
    return since_start;
}

Seconds max_lapse(std::span<const Task> tasks, Seconds now) {
    Seconds best = 0.0;
    for (const auto& t : tasks) {
        if (t.start_time > now) continue;
        best = std::max(best, task_lapse(t, now));
    }
    return best;
}

DelayScore delay_score(const Task& task, Seconds now, Seconds max_lapse, Seconds mean_response) {
    if (!(mean_response > 0.0)) {
        throw BadCategoryStats("category mean response time must be positive");
    }
    DelayScore s;
    s.task = task.id;
    s.difficulty = task.difficulty;
    s.quality = task.quality_threshold;
    s.lapse = task_lapse(task, now);
    s.max_lapse = max_lapse;
    s.mean_response = mean_response;

    const double rounds = std::max(0.0, (max_lapse - s.lapse) / mean_response);
    s.exponent = static_cast<int>(std::ceil(rounds));
    const double base = std::clamp(task.difficulty * task.quality_threshold,
                                   std::numeric_limits<double>::min(), 1.0);
    s.log_score = s.exponent == 0 ? 0.0 : s.exponent * std::log(base);
    s.score = std::exp(s.log_score);
    return s;
}

bool more_urgent(const DelayScore& a, const Task& ta, const DelayScore& b, const Task& tb) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    if (ta.start_time != tb.start_time) return ta.start_time < tb.start_time;
    return ta.id < tb.id;
}

std::vector<double> coverage_accuracies(const Task& task, WorkerTable workers) {
    std::vector<double> out;
    for (const auto& a : task.answers) {
        if (!a.is_skip()) out.push_back(workers[a.worker.value].accuracy(task.category));
    }
    for (auto w : task.in_flight) out.push_back(workers[w.value].accuracy(task.category));
    return out;
}

bool coverage_satisfied(const Task& task, WorkerTable workers) {
    const auto acc = coverage_accuracies(task, workers);
    if (acc.size() % 2 == 0) return false;
    return voting::expected_accuracy_majority(acc) >= task.quality_threshold;
}

namespace {

bool eligible_for(const Worker& worker, const Task& task, WorkerTable workers) {
    return task.is_open() && worker.subscribes(task.category) && !task.involves(worker.id) &&
           !coverage_satisfied(task, workers);
}

bool closes_with(const Task& task, const Worker& worker, WorkerTable workers) {
    auto acc = coverage_accuracies(task, workers);
    acc.push_back(worker.accuracy(task.category));
    if (acc.size() % 2 == 0) return false;
    return voting::expected_accuracy_majority(acc) >= task.quality_threshold;
}

Seconds category_mean(const UrgencyContext& ctx, CategoryIndex c) {
    if (c >= ctx.category_mean_response.size()) {
        throw BadCategoryStats("no mean response time for category");
    }
    return ctx.category_mean_response[c];
}

} // namespace

std::optional<RequestDecision> greedy_request(const Worker& worker, std::span<const Task> tasks,
                                              WorkerTable workers, const UrgencyContext& ctx) {
    std::optional<std::size_t> best;
    DelayScore best_score;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& t = tasks[i];
        if (t.start_time > ctx.now || !eligible_for(worker, t, workers)) continue;
        auto s = delay_score(t, ctx.now, ctx.max_lapse, category_mean(ctx, t.category));
        if (!best || more_urgent(s, t, best_score, tasks[*best])) {
            best = i;
            best_score = s;
        }
    }
    if (!best) return std::nullopt;
    return RequestDecision{*best, closes_with(tasks[*best], worker, workers)};
}

std::optional<RequestDecision> random_schedule(const Worker& worker, std::span<const Task> tasks,
                                               WorkerTable workers, std::mt19937_64& rng) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (eligible_for(worker, tasks[i], workers)) eligible.push_back(i);
    }
    if (eligible.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    const std::size_t i = eligible[pick(rng)];
    return RequestDecision{i, closes_with(tasks[i], worker, workers)};
}

namespace {

std::vector<WorkerId> select_in_order(double quality, std::vector<Candidate> ordered,
                                      std::span<const double> already_assigned) {
    voting::WorkerSetAccuracy set(already_assigned);
    auto satisfied = [&] {
        return set.size() % 2 == 1 && set.probability() >= quality;
    };
    std::vector<WorkerId> added;
    for (const auto& c : ordered) {
        if (satisfied()) break;
        set.add(c.accuracy);
        added.push_back(c.id);
    }
    if (!satisfied()) return {};
    return added;
}

} // namespace

std::vector<WorkerId> min_worker_set_selection(double quality, std::span<const Candidate> pool,
                                               std::span<const double> already_assigned) {
    std::vector<Candidate> ordered(pool.begin(), pool.end());
    std::ranges::sort(ordered, [](const Candidate& a, const Candidate& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.id < b.id;
    });
    return select_in_order(quality, std::move(ordered), already_assigned);
}

std::vector<WorkerId> fastest_worker_set_selection(double quality, std::span<const Candidate> pool,
                                                   std::span<const double> already_assigned) {
    std::vector<Candidate> ordered(pool.begin(), pool.end());
    std::ranges::sort(ordered, [](const Candidate& a, const Candidate& b) {
        if (a.response != b.response) return a.response < b.response;
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.id < b.id;
    });
    return select_in_order(quality, std::move(ordered), already_assigned);
}

std::vector<WorkerId> top_accuracy_selection(std::size_t count, std::span<const Candidate> pool) {
    if (count == 0 || pool.size() < count) return {};
    std::vector<Candidate> ordered(pool.begin(), pool.end());
    std::ranges::sort(ordered, [](const Candidate& a, const Candidate& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.id < b.id;
    });
    std::vector<WorkerId> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(ordered[i].id);
    return out;
}

namespace {

Seconds cheapest_category(const Worker& w) {
    Seconds best = std::numeric_limits<Seconds>::infinity();
    for (const auto& [_, p] : w.profiles) best = std::min(best, p.predicted_response);
    return best;
}

} // namespace

RoundPlan greedy_batch(std::span<const Task> tasks, WorkerTable workers,
                       std::span<const WorkerId> available, std::span<const Seconds> budgets,
                       const UrgencyContext& ctx, const BatchOptions& options) {
    if (!(options.interval > 0.0)) throw DomainError("round interval must be positive");

    RoundPlan plan;
    plan.interval = options.interval;
    plan.remaining_budget.assign(budgets.begin(), budgets.end());

    std::vector<WorkerId> active;
    for (auto w : available) {
        if (plan.remaining_budget[w.value] >= cheapest_category(workers[w.value])) {
            active.push_back(w);
        }
    }

    auto schedulable = [&](const Task& t) {
        if (!t.is_open() || t.start_time > ctx.now) return false;
        if (options.rule == BatchRule::top_k_accuracy) {
            return t.answered_count() + t.in_flight.size() < options.icrowd_k;
        }
        return !coverage_satisfied(t, workers);
    };

    struct Ranked {
        std::size_t index;
        DelayScore score;
    };
    std::vector<Ranked> order;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!schedulable(tasks[i])) continue;
        order.push_back({i, delay_score(tasks[i], ctx.now, ctx.max_lapse,
                                        category_mean(ctx, tasks[i].category))});
    }
    std::ranges::sort(order, [&](const Ranked& a, const Ranked& b) {
        return more_urgent(a.score, tasks[a.index], b.score, tasks[b.index]);
    });

    for (const auto& r : order) {
        if (active.empty()) break;
        const Task& task = tasks[r.index];

        std::vector<Candidate> pool;
        for (auto w : active) {
            const Worker& worker = workers[w.value];
            if (!worker.subscribes(task.category) || task.involves(w)) continue;
            const Seconds cost = worker.predicted_response(task.category);
            if (plan.remaining_budget[w.value] < cost) continue;
            pool.push_back({w, worker.accuracy(task.category), cost});
        }

        std::vector<WorkerId> chosen;
        switch (options.rule) {
        case BatchRule::min_worker_set:
            chosen = min_worker_set_selection(task.quality_threshold, pool,
                                              coverage_accuracies(task, workers));
            break;
        case BatchRule::fastest_first:
            chosen = fastest_worker_set_selection(task.quality_threshold, pool,
                                                  coverage_accuracies(task, workers));
            break;
        case BatchRule::top_k_accuracy:
            chosen = top_accuracy_selection(
                options.icrowd_k - task.answered_count() - task.in_flight.size(), pool);
            break;
        }

        for (auto w : chosen) {
            plan.assignment.add(task.id, w);
            auto& budget = plan.remaining_budget[w.value];
            budget -= workers[w.value].predicted_response(task.category);
            if (budget < cheapest_category(workers[w.value])) std::erase(active, w);
        }
    }
    return plan;
}

} // namespace frog::scheduling
