#include "frog/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "frog/errors.hpp"

namespace frog {

ClampedAccuracy clamp_accuracy(double raw, int choice_count) {
    if (!(raw >= 0.0 && raw <= 1.0)) {
        throw DomainError("accuracy must lie in [0, 1], got " + std::to_string(raw));
    }
    if (choice_count < 2) {
        throw DomainError("choice count must be at least 2");
    }
    if (choice_count > 2) {
        if (raw <= 1.0 / choice_count) {
            throw UnusableWorker("accuracy " + std::to_string(raw) +
                                 " is no better than guessing among " +
                                 std::to_string(choice_count) + " choices");
        }
        return {raw, false};
    }
    if (raw > 0.5) return {raw, false};
    if (raw < 0.5) return {1.0 - raw, true};
    return {0.5 + kAccuracyNudge, false};
}

Task Task::make(TaskId id, CategoryIndex category, double quality_threshold,
                Seconds start_time, int choice_count, std::optional<int> ground_truth) {
    if (!(quality_threshold > 0.5 && quality_threshold < 1.0)) {
        throw DomainError("quality threshold must lie in (0.5, 1)");
    }
    if (choice_count < 2) throw BadChoiceCount("choice count must be at least 2");
    if (ground_truth && (*ground_truth < 0 || *ground_truth >= choice_count)) {
        throw DomainError("ground truth outside [0, R)");
    }
    Task t;
    t.id = id;
    t.category = category;
    t.quality_threshold = quality_threshold;
    t.start_time = start_time;
    t.choice_count = choice_count;
    t.ground_truth = ground_truth;
    return t;
}

void Task::add_answer(const Answer& answer) {
    if (!answer.is_skip() && (answer.choice < 0 || answer.choice >= choice_count)) {
        throw DomainError("answer choice outside [0, R)");
    }
    if (answer.submit_time < start_time || answer.latency < 0.0) {
        throw DomainError("answer submitted before the task started");
    }
    answers.push_back(answer);
    if (answer.is_skip()) ++skip_count;
}

void Task::complete(Seconds at) {
    if (at < start_time) throw DomainError("task cannot finish before it starts");
    finish_time = at;
    state = TaskState::completed;
}

std::optional<Seconds> Task::latency() const {
    if (!finish_time) return std::nullopt;
    return *finish_time - start_time;
}

bool Task::involves(WorkerId worker) const {
    auto by_worker = [worker](const Answer& a) { return a.worker == worker; };
    return std::ranges::any_of(answers, by_worker) ||
           std::ranges::find(in_flight, worker) != in_flight.end();
}

std::vector<WorkerId> Task::answered_workers() const {
    std::vector<WorkerId> out;
    for (const auto& a : answers) {
        if (!a.is_skip()) out.push_back(a.worker);
    }
    return out;
}

std::size_t Task::answered_count() const {
    return answers.size() - static_cast<std::size_t>(skip_count);
}

void Worker::subscribe(CategoryIndex category, double raw_accuracy, Seconds predicted_response) {
    if (!(predicted_response > 0.0)) {
        throw DomainError("predicted response time must be positive");
    }
    auto clamped = clamp_accuracy(raw_accuracy);
    CategoryProfile p;
    p.qualification_accuracy = clamped.value;
    p.accuracy = clamped.value;
    p.flipped = clamped.flipped;
    p.predicted_response = predicted_response;
    profiles[category] = std::move(p);
}

const CategoryProfile& Worker::profile(CategoryIndex category) const {
    auto it = profiles.find(category);
    if (it == profiles.end()) {
        throw DomainError("worker " + std::to_string(id.value) +
                          " is not subscribed to category " + std::to_string(category));
    }
    return it->second;
}

CategoryProfile& Worker::profile(CategoryIndex category) {
    return const_cast<CategoryProfile&>(std::as_const(*this).profile(category));
}

void Worker::record_response(CategoryIndex category, Seconds timestamp, Seconds response) {
    auto& p = profile(category);
    if (!p.history.empty() && timestamp <= p.history.back().timestamp) {
        throw DomainError("response history timestamps must strictly increase");
    }
    p.history.push_back({timestamp, response});
}

double Worker::mean_accuracy() const {
    if (profiles.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [_, p] : profiles) sum += p.accuracy;
    return sum / static_cast<double>(profiles.size());
}

Seconds Worker::mean_response() const {
    if (profiles.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [_, p] : profiles) sum += p.predicted_response;
    return sum / static_cast<double>(profiles.size());
}

bool Assignment::add(TaskId task, WorkerId worker) {
    if (contains(task, worker)) return false;
    pairs.emplace_back(task, worker);
    return true;
}

bool Assignment::contains(TaskId task, WorkerId worker) const {
    return std::ranges::find(pairs, std::pair{task, worker}) != pairs.end();
}

} // namespace frog
