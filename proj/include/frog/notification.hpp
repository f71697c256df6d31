#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <vector>

#include "frog/model.hpp"

namespace frog::notification {

inline constexpr Seconds kWeek = 604800.0;
inline constexpr Seconds kDay = 86400.0;
inline constexpr Seconds kFallbackBandwidth = 3600.0;
// Activity timestamps carry no meaningful sub-5-minute structure; this floor
// also keeps minute-resolution quadrature of the density exact.
inline constexpr Seconds kMinBandwidth = 300.0;
inline constexpr Seconds kAcceptanceWindow = 900.0;

/// Maps an absolute timestamp onto [0, period).
Seconds wrap_time(Seconds t, Seconds period = kWeek);

/// Signed difference a - b on the circle, in [-period/2, period/2).
Seconds circular_difference(Seconds a, Seconds b, Seconds period = kWeek);

/// Wrapped, sorted activity timestamps of one worker.
struct EventLog {
    WorkerId worker;
    std::vector<Seconds> timestamps;

    static EventLog from_epochs(WorkerId worker, std::span<const double> epochs,
                                Seconds period = kWeek);
};

/// Undirected friendship graph.
class FriendGraph {
public:
    void add_edge(WorkerId a, WorkerId b);
    const std::set<WorkerId>& friends(WorkerId w) const;
    /// Everyone reachable in 1..steps hops, excluding `w` itself.
    std::set<WorkerId> within(WorkerId w, int steps) const;
    bool symmetric() const;
    const std::map<WorkerId, std::set<WorkerId>>& adjacency() const noexcept { return adjacency_; }

private:
    std::map<WorkerId, std::set<WorkerId>> adjacency_;
};

/// 1.06 * sigma * n^(-1/5) with the sample standard deviation; falls back to
/// one hour for fewer than two samples or zero spread.
Seconds rule_of_thumb_bandwidth(std::span<const Seconds> samples);

struct KdeOptions {
    // Share of the sample used as nearest neighbours for each bandwidth.
    double beta{0.1};
    Seconds period{kWeek};
    Seconds min_bandwidth{kMinBandwidth};
};

/// Gaussian KDE on the circle with one bandwidth per sample. Each sample's
/// bandwidth comes from the rule of thumb applied to it and its
/// ceil(beta * n) temporally nearest neighbours.
class AdaptiveKde {
public:
    AdaptiveKde() = default;
    AdaptiveKde(std::span<const Seconds> wrapped_samples, const KdeOptions& options = {});

    /// Explicit bandwidths, bypassing the neighbour rule.
    static AdaptiveKde with_bandwidths(std::span<const Seconds> wrapped_samples,
                                       std::span<const Seconds> bandwidths,
                                       Seconds period = kWeek);

    /// Density per second at `ts` (wrapped internally). Zero for an empty scale.
    double density(Seconds ts) const;

    std::span<const Seconds> samples() const noexcept { return samples_; }
    std::span<const Seconds> bandwidths() const noexcept { return bandwidths_; }
    Seconds period() const noexcept { return period_; }
    bool empty() const noexcept { return samples_.empty(); }

private:
    std::vector<Seconds> samples_;
    std::vector<Seconds> bandwidths_;
    Seconds period_{kWeek};
};

inline double adaptive_kde(const AdaptiveKde& scale, Seconds ts) { return scale.density(ts); }

struct EmResult {
    std::vector<double> weights;
    int iterations{};
    bool converged{};
    // Validation log-likelihood at the initial weights and after every M-step.
    std::vector<double> log_likelihood;
    // Validation points with zero density under every scale.
    std::size_t dropped{};
};

inline constexpr double kEmTolerance = 1e-6;
inline constexpr int kEmMaxIterations = 200;

/// Fits mixture weights by EM. `densities` is row-major, one row per
/// validation point and one column per scale.
EmResult em_fit(std::span<const double> densities, std::size_t scales,
                double tolerance = kEmTolerance, int max_iterations = kEmMaxIterations);

/// Mixture of scale estimators (self, friends, ..., everyone) with simplex
/// weights. Scales are immutable and may be shared between models.
struct AvailabilityModel {
    std::vector<std::shared_ptr<const AdaptiveKde>> scales;
    std::vector<double> weights;
    double beta{0.1};

    double density(Seconds ts) const;
};

/// Mixture density at ts; a density per second, not a probability.
double availability_probability(const AvailabilityModel& model, Seconds ts);

/// Fits `model.weights` on validation timestamps and returns the EM trace.
EmResult fit_weights(AvailabilityModel& model, std::span<const Seconds> validation);

struct ScaleOptions {
    KdeOptions kde;
    int friend_steps{1};
};

/// Builds the per-worker scales: own events, own plus friends' events for
/// each hop count up to `friend_steps`, and the shared `population` scale.
/// Weights start uniform.
AvailabilityModel build_model(WorkerId worker,
                              const std::map<WorkerId, std::vector<Seconds>>& wrapped_events,
                              const FriendGraph& graph,
                              std::shared_ptr<const AdaptiveKde> population,
                              const ScaleOptions& options = {});

struct WorkerSummary {
    WorkerId id;
    double availability{};
    double mean_accuracy{};
    Seconds mean_response{};
};

WorkerSummary summarize(const Worker& worker, double availability);

/// Strictly more available, at least as accurate and at least as fast.
bool dominates(const WorkerSummary& x, const WorkerSummary& y);

/// Number of cohort members dominated by `worker`.
std::size_t ranking_score(const WorkerSummary& worker, std::span<const WorkerSummary> cohort);
std::vector<std::size_t> ranking_scores(std::span<const WorkerSummary> cohort);

/// Turns a density into the chance of acting within the acceptance window.
double acceptance_probability(double density, Seconds window = kAcceptanceWindow);

/// Picks offline workers by descending ranking score (then availability, then
/// id) until their summed acceptance probability covers `needed`.
std::vector<WorkerId> worker_notify(std::span<const WorkerSummary> offline, double needed,
                                    Seconds window = kAcceptanceWindow);

} // namespace frog::notification
