#include "frog/notification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "frog/errors.hpp"

namespace frog::notification {

Seconds wrap_time(Seconds t, Seconds period) {
    Seconds w = std::fmod(t, period);
    if (w < 0.0) w += period;
    if (w >= period) w = 0.0;
    return w;
}

Seconds circular_difference(Seconds a, Seconds b, Seconds period) {
    Seconds d = std::fmod(a - b, period);
    if (d < -period / 2) d += period;
    if (d >= period / 2) d -= period;
    return d;
}

EventLog EventLog::from_epochs(WorkerId worker, std::span<const double> epochs, Seconds period) {
    EventLog log;
    log.worker = worker;
    log.timestamps.reserve(epochs.size());
    for (double e : epochs) log.timestamps.push_back(wrap_time(e, period));
    std::ranges::sort(log.timestamps);
    return log;
}

void FriendGraph::add_edge(WorkerId a, WorkerId b) {
    if (a == b) return;
    adjacency_[a].insert(b);
    adjacency_[b].insert(a);
}

const std::set<WorkerId>& FriendGraph::friends(WorkerId w) const {
    static const std::set<WorkerId> none;
    auto it = adjacency_.find(w);
    return it == adjacency_.end() ? none : it->second;
}

std::set<WorkerId> FriendGraph::within(WorkerId w, int steps) const {
    std::set<WorkerId> seen{w};
    std::vector<WorkerId> frontier{w};
    for (int s = 0; s < steps && !frontier.empty(); ++s) {
        std::vector<WorkerId> next;
        for (auto v : frontier) {
            for (auto f : friends(v)) {
                if (seen.insert(f).second) next.push_back(f);
            }
        }
        frontier = std::move(next);
    }
    seen.erase(w);
    return seen;
}

bool FriendGraph::symmetric() const {
    for (const auto& [a, fs] : adjacency_) {
        for (auto b : fs) {
            if (!friends(b).contains(a)) return false;
        }
    }
    return true;
}

Seconds rule_of_thumb_bandwidth(std::span<const Seconds> samples) {
    const std::size_t n = samples.size();
    if (n < 2) return kFallbackBandwidth;
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sigma > 0.0)) return kFallbackBandwidth;
    return 1.06 * sigma * std::pow(static_cast<double>(n), -0.2);
}

AdaptiveKde::AdaptiveKde(std::span<const Seconds> wrapped_samples, const KdeOptions& options)
    : samples_(wrapped_samples.begin(), wrapped_samples.end()), period_(options.period) {
    if (!(options.beta > 0.0 && options.beta < 1.0)) {
        throw DomainError("neighbour ratio beta must lie in (0, 1)");
    }
    for (auto& s : samples_) s = wrap_time(s, period_);
    std::ranges::sort(samples_);

    const std::size_t n = samples_.size();
    const auto k = std::min<std::size_t>(
        static_cast<std::size_t>(std::ceil(options.beta * static_cast<double>(n))),
        n == 0 ? 0 : n - 1);

    bandwidths_.reserve(n);
    std::vector<Seconds> offsets;
    for (std::size_t i = 0; i < n; ++i) {
        offsets.assign(1, 0.0);
        // Walk outwards on the sorted circle, always taking the nearer side.
        std::size_t left = 1;
        std::size_t right = 1;
        for (std::size_t picked = 0; picked < k; ++picked) {
            const Seconds dl = circular_difference(samples_[(i + n - left % n) % n], samples_[i], period_);
            const Seconds dr = circular_difference(samples_[(i + right) % n], samples_[i], period_);
            if (std::abs(dl) <= std::abs(dr)) {
                offsets.push_back(dl);
                ++left;
            } else {
                offsets.push_back(dr);
                ++right;
            }
        }
        bandwidths_.push_back(std::max(rule_of_thumb_bandwidth(offsets), options.min_bandwidth));
    }
}

AdaptiveKde AdaptiveKde::with_bandwidths(std::span<const Seconds> wrapped_samples,
                                         std::span<const Seconds> bandwidths, Seconds period) {
    if (wrapped_samples.size() != bandwidths.size()) {
        throw DomainError("one bandwidth per sample is required");
    }
    AdaptiveKde kde;
    kde.period_ = period;
    std::vector<std::size_t> order(wrapped_samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
        return wrap_time(wrapped_samples[a], period) < wrap_time(wrapped_samples[b], period);
    });
    for (auto i : order) {
        if (!(bandwidths[i] > 0.0)) throw DomainError("bandwidths must be positive");
        kde.samples_.push_back(wrap_time(wrapped_samples[i], period));
        kde.bandwidths_.push_back(bandwidths[i]);
    }
    return kde;
}

double AdaptiveKde::density(Seconds ts) const {
    if (samples_.empty()) return 0.0;
    constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    const Seconds x = wrap_time(ts, period_);
    double sum = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double h = bandwidths_[i];
        const double d = circular_difference(x, samples_[i], period_);
        // Images of the kernel on neighbouring laps matter only for wide kernels.
        const int laps = 8.0 * h < period_ / 2 ? 0 : static_cast<int>(std::ceil(8.0 * h / period_));
        for (int j = -laps; j <= laps; ++j) {
            const double u = (d + j * period_) / h;
            if (std::abs(u) > 38.0) continue;
            sum += inv_sqrt_2pi * std::exp(-0.5 * u * u) / h;
        }
    }
    return sum / static_cast<double>(samples_.size());
}

namespace {

double log_likelihood(std::span<const double> densities, std::size_t scales,
                      const std::vector<std::size_t>& rows, const std::vector<double>& weights) {
    double ll = 0.0;
    for (auto r : rows) {
        double p = 0.0;
        for (std::size_t s = 0; s < scales; ++s) p += weights[s] * densities[r * scales + s];
        ll += std::log(p);
    }
    return ll;
}

} // namespace

EmResult em_fit(std::span<const double> densities, std::size_t scales, double tolerance,
                int max_iterations) {
    if (scales == 0) throw DomainError("at least one scale is required");
    if (densities.size() % scales != 0) throw DomainError("density matrix is ragged");

    EmResult result;
    result.weights.assign(scales, 1.0 / static_cast<double>(scales));

    std::vector<std::size_t> rows;
    const std::size_t n = densities.size() / scales;
    for (std::size_t r = 0; r < n; ++r) {
        bool any = false;
        for (std::size_t s = 0; s < scales; ++s) {
            const double f = densities[r * scales + s];
            if (!(f >= 0.0) || !std::isfinite(f)) throw DomainError("densities must be finite and non-negative");
            any = any || f > 0.0;
        }
        if (any) rows.push_back(r);
    }
    result.dropped = n - rows.size();

    if (scales == 1) {
        result.weights = {1.0};
        result.converged = true;
        if (!rows.empty()) result.log_likelihood.push_back(log_likelihood(densities, scales, rows, result.weights));
        return result;
    }
    if (rows.empty()) return result;

    result.log_likelihood.push_back(log_likelihood(densities, scales, rows, result.weights));
    std::vector<double> next(scales);
    for (int it = 1; it <= max_iterations; ++it) {
        std::ranges::fill(next, 0.0);
        for (auto r : rows) {
            double total = 0.0;
            for (std::size_t s = 0; s < scales; ++s) total += result.weights[s] * densities[r * scales + s];
            for (std::size_t s = 0; s < scales; ++s) {
                next[s] += result.weights[s] * densities[r * scales + s] / total;
            }
        }
        double change = 0.0;
        for (std::size_t s = 0; s < scales; ++s) {
            next[s] /= static_cast<double>(rows.size());
            change = std::max(change, std::abs(next[s] - result.weights[s]));
        }
        result.weights = next;
        result.iterations = it;
        result.log_likelihood.push_back(log_likelihood(densities, scales, rows, result.weights));
        if (change < tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

double AvailabilityModel::density(Seconds ts) const {
    double p = 0.0;
    for (std::size_t s = 0; s < scales.size(); ++s) {
        if (weights[s] != 0.0) p += weights[s] * scales[s]->density(ts);
    }
    return p;
}

double availability_probability(const AvailabilityModel& model, Seconds ts) {
    return model.density(ts);
}

EmResult fit_weights(AvailabilityModel& model, std::span<const Seconds> validation) {
    const std::size_t S = model.scales.size();
    std::vector<double> densities;
    densities.reserve(validation.size() * S);
    for (Seconds ts : validation) {
        for (const auto& scale : model.scales) densities.push_back(scale->density(ts));
    }
    auto result = em_fit(densities, S);
    model.weights = result.weights;
    return result;
}

AvailabilityModel build_model(WorkerId worker,
                              const std::map<WorkerId, std::vector<Seconds>>& wrapped_events,
                              const FriendGraph& graph,
                              std::shared_ptr<const AdaptiveKde> population,
                              const ScaleOptions& options) {
    auto events_of = [&](WorkerId w) -> std::span<const Seconds> {
        auto it = wrapped_events.find(w);
        if (it == wrapped_events.end()) return {};
        return it->second;
    };

    AvailabilityModel model;
    model.beta = options.kde.beta;
    const auto own = events_of(worker);
    model.scales.push_back(std::make_shared<const AdaptiveKde>(own, options.kde));
    for (int step = 1; step <= options.friend_steps; ++step) {
        std::vector<Seconds> pooled(own.begin(), own.end());
        for (auto f : graph.within(worker, step)) {
            const auto theirs = events_of(f);
            pooled.insert(pooled.end(), theirs.begin(), theirs.end());
        }
        model.scales.push_back(std::make_shared<const AdaptiveKde>(pooled, options.kde));
    }
    if (population) model.scales.push_back(std::move(population));
    model.weights.assign(model.scales.size(), 1.0 / static_cast<double>(model.scales.size()));
    return model;
}

WorkerSummary summarize(const Worker& worker, double availability) {
    return {worker.id, availability, worker.mean_accuracy(), worker.mean_response()};
}

bool dominates(const WorkerSummary& x, const WorkerSummary& y) {
    return x.availability > y.availability && x.mean_accuracy >= y.mean_accuracy &&
           x.mean_response <= y.mean_response;
}

std::size_t ranking_score(const WorkerSummary& worker, std::span<const WorkerSummary> cohort) {
    return static_cast<std::size_t>(std::ranges::count_if(
        cohort, [&](const WorkerSummary& other) { return dominates(worker, other); }));
}

std::vector<std::size_t> ranking_scores(std::span<const WorkerSummary> cohort) {
    std::vector<std::size_t> scores;
    scores.reserve(cohort.size());
    for (const auto& w : cohort) scores.push_back(ranking_score(w, cohort));
    return scores;
}

double acceptance_probability(double density, Seconds window) {
    return std::clamp(density * window, 0.0, 1.0);
}

std::vector<WorkerId> worker_notify(std::span<const WorkerSummary> offline, double needed,
                                    Seconds window) {
    const auto scores = ranking_scores(offline);
    std::vector<std::size_t> order(offline.size());
    std::iota(order.begin(), order.end(), 0);
    std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        if (offline[a].availability != offline[b].availability) {
            return offline[a].availability > offline[b].availability;
        }
        return offline[a].id < offline[b].id;
    });

    std::vector<WorkerId> chosen;
    for (auto i : order) {
        if (needed <= 0.0) break;
        chosen.push_back(offline[i].id);
        needed -= acceptance_probability(offline[i].availability, window);
    }
    return chosen;
}

} // namespace frog::notification
