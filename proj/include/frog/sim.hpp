#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "frog/model.hpp"
#include "frog/notification.hpp"

namespace frog::sim {

enum class Policy { rbs, bbs, random, fgreedy, icrowd };

/// Stable names used in configs and CSV output: RBS, BBS, RANDOM, fGreedy,
/// iCrowd.
std::string policy_name(Policy p);
/// Accepts the names above plus "iCrowd-<k>"; returns the k it carried, if any.
Policy parse_policy(const std::string& name, std::optional<std::size_t>* k = nullptr);

enum class Arrival { batch, poisson };

struct SimConfig {
    std::uint64_t seed{1};
    std::size_t tasks{3000};
    std::size_t workers{300};
    std::size_t categories{20};
    double quality_low{0.8};
    double quality_high{0.85};
    Policy policy{Policy::bbs};
    std::size_t icrowd_k{3};
    Seconds interval{30.0};
    double skip_probability{0.0};
    int choice_count{2};
    Arrival arrival{Arrival::batch};
    // Mean task arrivals per second for the Poisson model.
    double arrival_rate{1.0};
    Seconds horizon{86400.0};
    // Variance of per-answer response times around a worker's mean.
    double response_variance{4.0};
    // Empty means the built-in archetype table.
    std::string archetypes;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// One real worker's per-category statistics; simulated workers are drawn
/// around these.
struct Archetype {
    std::string name;
    // Indexed by archetype column; simulation category l uses column l mod size.
    std::vector<double> accuracy;
    std::vector<Seconds> mean_response;
    std::vector<double> variance;
};

/// The five most active workers of the real-platform study.
const std::vector<Archetype>& default_archetypes();

/// CSV `archetype,column,accuracy,mean_response,variance`. Throws ConfigError.
std::vector<Archetype> load_archetypes(const std::filesystem::path& path);

inline constexpr Seconds kMinResponse = 0.5;

/// Ground truth behind a simulated worker: what answers it gives and how fast.
struct WorkerTruth {
    std::vector<double> accuracy;      // by category
    std::vector<Seconds> mean_response; // by category
    std::vector<double> variance;      // by category
};

struct Population {
    std::vector<Worker> workers;      // scheduler-visible profiles
    std::vector<WorkerTruth> truth;   // aligned with workers
    std::vector<Task> tasks;
    // Generator means averaged over workers, per category.
    std::vector<Seconds> category_mean_response;
};

Population generate_population(const SimConfig& config, const std::vector<Archetype>& archetypes);
Population generate_population(const SimConfig& config);

/// Normal draw truncated below at kMinResponse (by resampling).
Seconds draw_response(std::mt19937_64& rng, Seconds mean, double variance);

struct TaskRecord {
    TaskId task;
    CategoryIndex category{};
    double quality{};
    Seconds start{};
    std::optional<Seconds> finish;
    std::size_t answers{};
    int skips{};
    // Expected majority accuracy of the answered set when the task completed.
    std::optional<double> expected_accuracy;
    std::optional<int> aggregated;
    std::optional<int> ground_truth;
};

struct Counters {
    std::size_t issued{};
    std::size_t answered{};
    std::size_t skipped{};
    std::size_t cancelled{};
    std::size_t outstanding{};
    std::size_t rounds{};

    bool conserved() const { return issued == answered + skipped + cancelled + outstanding; }
};

struct MetricsReport {
    std::uint64_t seed{};
    Policy policy{};
    std::size_t tasks{};
    std::size_t workers{};
    std::size_t categories{};
    double quality_low{};
    double quality_high{};
    Seconds max_latency{};
    double avg_accuracy{};
    double throughput{};
    std::size_t completed{};
    Seconds makespan{};
    Counters counters;
    std::vector<TaskRecord> records;
};

MetricsReport run(const SimConfig& config);
MetricsReport run(const SimConfig& config, Population population);

std::string metrics_header();
std::string metrics_row(const MetricsReport& report);
std::string trace_csv(const MetricsReport& report);

// ---------------------------------------------------------------------------
// Notification evaluation

/// Raw activity: epoch seconds per worker, sorted.
using ActivityLog = std::map<WorkerId, std::vector<double>>;

enum class NotifyMethod { skde, kde, nwp, random };
std::string method_name(NotifyMethod m);

struct NotifyEvalOptions {
    std::vector<double> fractions{0.05, 0.06, 0.07, 0.08, 0.09, 0.10};
    std::vector<NotifyMethod> methods{NotifyMethod::skde, NotifyMethod::kde, NotifyMethod::nwp,
                                      NotifyMethod::random};
    // Share of the time span used for training; queries cover the rest.
    double train_share{0.75};
    Seconds query_step{3600.0};
    Seconds window{notification::kAcceptanceWindow};
    // NWP counts past events within +-theta of the query's time of day.
    Seconds nwp_theta{900.0};
    notification::ScaleOptions scales;
    // Latest share of a worker's training events held out to fit the weights.
    double validation_share{0.2};
    std::size_t min_events_for_fit{5};
    // Overrides the fitted weights for every worker when set.
    std::optional<std::vector<double>> fixed_weights;
    std::uint64_t seed{1};
};

struct NotifyEvalRow {
    NotifyMethod method{};
    double fraction{};
    std::size_t predicted{};
    double precision{};
    double recall{};
    std::size_t queries{};
};

struct PrecisionRecall {
    double precision{};
    std::optional<double> recall; // undefined when nobody acted
};

/// N_c / N_t and N_c / N_a for one query.
PrecisionRecall precision_recall(const std::vector<WorkerId>& predicted,
                                 const std::vector<WorkerId>& active);

/// Throws ConfigError on an empty log.
std::vector<NotifyEvalRow> run_notification_eval(const ActivityLog& log,
                                                 const notification::FriendGraph& graph,
                                                 const NotifyEvalOptions& options = {});

struct SocialLogConfig {
    std::size_t groups{10};
    std::size_t group_size{8};
    // Members per group whose history is almost empty before the split.
    std::size_t cold_start_per_group{2};
    std::size_t weeks{4};
    std::size_t sessions_per_week{4};
    std::size_t events_per_session{3};
    Seconds jitter{1800.0};
    // Share of a regular member's sessions that ignore the group schedule.
    double noise_share{0.1};
    // Training-period sessions kept by a cold-start member.
    std::size_t cold_start_sessions{1};
    double train_share{0.75};
    std::uint64_t seed{7};
};

struct SocialLog {
    ActivityLog log;
    notification::FriendGraph graph;
    std::vector<WorkerId> cold_start;
};

/// Friend groups sharing weekly session slots; cold-start members follow the
/// same slots but have little training history.
SocialLog generate_social_log(const SocialLogConfig& config);

} // namespace frog::sim
