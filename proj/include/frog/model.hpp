#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace frog {

/// Simulation-relative time in seconds. Wall-clock time never enters the core.
using Seconds = double;

/// Dense category index in [0, L).
using CategoryIndex = std::uint32_t;

template <class Tag>
struct Id {
    std::uint32_t value{};

    constexpr Id() = default;
    constexpr explicit Id(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(Id, Id) = default;
};

using TaskId = Id<struct TaskTag>;
using WorkerId = Id<struct WorkerTag>;

/// Choice value recorded when a worker skips a task.
inline constexpr int kSkip = -1;

/// Nudge applied to an accuracy of exactly one half so it stays usable.
inline constexpr double kAccuracyNudge = 1e-6;

/// Base difficulty added to every task.
inline constexpr double kBaseDifficulty = 0.01;

struct ClampedAccuracy {
    double value{};
    bool flipped{};

    friend bool operator==(const ClampedAccuracy&, const ClampedAccuracy&) = default;
};

/// Maps a raw accuracy onto (0.5, 1]. For binary tasks an accuracy below one
/// half is mirrored (the worker's answers are read inverted). With more than
/// two choices there is no single "opposite" answer, so raw <= 1/R is
/// rejected with UnusableWorker and anything above is kept as-is.
ClampedAccuracy clamp_accuracy(double raw, int choice_count = 2);

struct Answer {
    WorkerId worker;
    TaskId task;
    int choice{kSkip};
    Seconds submit_time{};
    Seconds latency{};

    bool is_skip() const noexcept { return choice == kSkip; }

    friend bool operator==(const Answer&, const Answer&) = default;
};

enum class TaskState { open, completed };

struct Task {
    TaskId id;
    CategoryIndex category{};
    double quality_threshold{0.8};
    Seconds start_time{};
    std::optional<Seconds> finish_time;
    int choice_count{2};
    std::optional<int> ground_truth;
    std::vector<Answer> answers;
    int skip_count{};
    TaskState state{TaskState::open};
    double difficulty{kBaseDifficulty};
    // Workers holding an outstanding assignment for this task.
    std::vector<WorkerId> in_flight;

    /// Validating constructor; throws DomainError on an out-of-range threshold
    /// or choice count.
    static Task make(TaskId id, CategoryIndex category, double quality_threshold,
                     Seconds start_time, int choice_count = 2,
                     std::optional<int> ground_truth = std::nullopt);

    /// Appends an answer (or a skip) and keeps skip_count in sync.
    void add_answer(const Answer& answer);
    void complete(Seconds at);

    bool is_open() const noexcept { return state == TaskState::open; }
    std::optional<Seconds> latency() const;

    /// True if the worker answered, skipped or currently holds this task.
    bool involves(WorkerId worker) const;
    /// Workers whose (non-skip) answer has been received, in arrival order.
    std::vector<WorkerId> answered_workers() const;
    std::size_t answered_count() const;

    friend bool operator==(const Task&, const Task&) = default;
};

struct ResponseSample {
    Seconds timestamp{};
    Seconds response{};

    friend bool operator==(const ResponseSample&, const ResponseSample&) = default;
};

struct CategoryProfile {
    // Accuracy measured by the qualification test (the fixed anchor of
    // accuracy updates).
    double qualification_accuracy{};
    // Current working estimate, always in (0.5, 1].
    double accuracy{};
    bool flipped{};
    Seconds predicted_response{};
    std::vector<ResponseSample> history;

    friend bool operator==(const CategoryProfile&, const CategoryProfile&) = default;
};

struct Worker {
    WorkerId id;
    bool online{true};
    std::map<CategoryIndex, CategoryProfile> profiles;

    void subscribe(CategoryIndex category, double raw_accuracy, Seconds predicted_response);

    bool subscribes(CategoryIndex category) const { return profiles.contains(category); }
    const CategoryProfile& profile(CategoryIndex category) const;
    CategoryProfile& profile(CategoryIndex category);
    double accuracy(CategoryIndex category) const { return profile(category).accuracy; }
    Seconds predicted_response(CategoryIndex category) const {
        return profile(category).predicted_response;
    }

    /// Appends to the category's response history; timestamps must strictly
    /// increase.
    void record_response(CategoryIndex category, Seconds timestamp, Seconds response);

    double mean_accuracy() const;
    Seconds mean_response() const;

    friend bool operator==(const Worker&, const Worker&) = default;
};

struct Assignment {
    std::vector<std::pair<TaskId, WorkerId>> pairs;
    std::optional<std::uint32_t> round_id;

    /// Returns false (and leaves the assignment unchanged) on a duplicate pair.
    bool add(TaskId task, WorkerId worker);
    bool contains(TaskId task, WorkerId worker) const;
    std::size_t size() const noexcept { return pairs.size(); }
    bool empty() const noexcept { return pairs.empty(); }
};

} // namespace frog

template <class Tag>
struct std::hash<frog::Id<Tag>> {
    std::size_t operator()(frog::Id<Tag> id) const noexcept {
        return std::hash<std::uint32_t>{}(id.value);
    }
};
