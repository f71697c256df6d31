#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "frog/errors.hpp"
#include "frog/sim.hpp"

namespace frog::sim {

using notification::AdaptiveKde;
using notification::AvailabilityModel;
using notification::kDay;
using notification::wrap_time;

std::string method_name(NotifyMethod m) {
    switch (m) {
    case NotifyMethod::skde: return "SKDE";
    case NotifyMethod::kde: return "KDE";
    case NotifyMethod::nwp: return "NWP";
    case NotifyMethod::random: return "Random";
    }
    return "?";
}

PrecisionRecall precision_recall(const std::vector<WorkerId>& predicted,
                                 const std::vector<WorkerId>& active) {
    std::vector<WorkerId> p = predicted;
    std::vector<WorkerId> a = active;
    std::ranges::sort(p);
    std::ranges::sort(a);
    p.erase(std::unique(p.begin(), p.end()), p.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::vector<WorkerId> hit;
    std::ranges::set_intersection(p, a, std::back_inserter(hit));
    PrecisionRecall out;
    out.precision = p.empty() ? 0.0 : static_cast<double>(hit.size()) / p.size();
    if (!a.empty()) out.recall = static_cast<double>(hit.size()) / a.size();
    return out;
}

namespace {

struct Prepared {
    std::vector<WorkerId> workers;
    std::vector<std::vector<double>> train;  // raw epochs before the split, per worker
    std::vector<std::vector<double>> test;   // raw epochs from the split on
    std::vector<AvailabilityModel> models;
    std::shared_ptr<const AdaptiveKde> population;
    Seconds split{};
    Seconds end{};
};

std::map<WorkerId, std::vector<Seconds>> wrapped(const std::vector<WorkerId>& workers,
                                                const std::vector<std::vector<double>>& events,
                                                Seconds period) {
    std::map<WorkerId, std::vector<Seconds>> out;
    for (std::size_t i = 0; i < workers.size(); ++i) {
        auto& v = out[workers[i]];
        for (double e : events[i]) v.push_back(wrap_time(e, period));
    }
    return out;
}

Prepared prepare(const ActivityLog& log, const notification::FriendGraph& graph,
                 const NotifyEvalOptions& opt) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto& [_, ts] : log) {
        for (double t : ts) {
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
    }
    if (!(hi > lo)) throw ConfigError("events", "activity log is empty or spans no time");
    if (!(opt.train_share > 0.0 && opt.train_share < 1.0)) {
        throw ConfigError("train_share", "must lie in (0, 1)");
    }

    Prepared p;
    p.split = lo + opt.train_share * (hi - lo);
    p.end = hi;
    for (const auto& [w, ts] : log) {
        p.workers.push_back(w);
        auto& tr = p.train.emplace_back();
        auto& te = p.test.emplace_back();
        for (double t : ts) (t < p.split ? tr : te).push_back(t);
    }

    const Seconds period = opt.scales.kde.period;
    auto all = wrapped(p.workers, p.train, period);
    std::vector<Seconds> pooled;
    for (const auto& [_, v] : all) pooled.insert(pooled.end(), v.begin(), v.end());
    p.population = std::make_shared<const AdaptiveKde>(pooled, opt.scales.kde);

    for (std::size_t i = 0; i < p.workers.size(); ++i) {
        const WorkerId w = p.workers[i];
        auto model = notification::build_model(w, all, graph, p.population, opt.scales);
        if (opt.fixed_weights) {
            if (opt.fixed_weights->size() != model.scales.size()) {
                throw ConfigError("weights", "one weight per scale is required");
            }
            model.weights = *opt.fixed_weights;
        } else if (p.train[i].size() >= opt.min_events_for_fit) {
            // Hold out the latest events, fit the weights on them, then
            // rebuild the scales on the full training history.
            const auto& own = p.train[i];
            const auto held = static_cast<std::size_t>(
                std::ceil(opt.validation_share * static_cast<double>(own.size())));
            std::vector<double> sorted = own;
            std::ranges::sort(sorted);
            std::vector<Seconds> validation;
            for (std::size_t k = sorted.size() - held; k < sorted.size(); ++k) {
                validation.push_back(sorted[k]);
            }
            auto fit_events = all;
            auto& mine = fit_events[w];
            mine.clear();
            for (std::size_t k = 0; k + held < sorted.size(); ++k) {
                mine.push_back(wrap_time(sorted[k], period));
            }
            auto fit_model = notification::build_model(w, fit_events, graph, p.population, opt.scales);
            notification::fit_weights(fit_model, validation);
            model.weights = fit_model.weights;
        }
        p.models.push_back(std::move(model));
    }
    return p;
}

// Past events whose time of day lies within theta of ts.
double nwp_score(const std::vector<double>& train, Seconds ts, Seconds theta) {
    const Seconds tod = wrap_time(ts, kDay);
    double count = 0.0;
    for (double e : train) {
        if (e >= ts) break;
        if (std::abs(notification::circular_difference(wrap_time(e, kDay), tod, kDay)) <= theta) {
            ++count;
        }
    }
    return count;
}

} // namespace

std::vector<NotifyEvalRow> run_notification_eval(const ActivityLog& log,
                                                 const notification::FriendGraph& graph,
                                                 const NotifyEvalOptions& options) {
    for (double f : options.fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fraction", "must lie in (0, 1]");
    }
    const Prepared p = prepare(log, graph, options);
    const std::size_t W = p.workers.size();

    struct Acc {
        double precision{};
        double recall{};
        std::size_t queries{};
        std::size_t recall_queries{};
        std::size_t predicted{};
    };
    std::map<std::pair<NotifyMethod, double>, Acc> acc;
    std::mt19937_64 rng(options.seed);

    for (Seconds ts = p.split; ts + options.window <= p.end; ts += options.query_step) {
        std::vector<WorkerId> active;
        for (std::size_t i = 0; i < W; ++i) {
            const auto& te = p.test[i];
            auto it = std::ranges::lower_bound(te, ts);
            if (it != te.end() && *it <= ts + options.window) active.push_back(p.workers[i]);
        }

        const double population = p.population->density(ts);
        for (auto method : options.methods) {
            std::vector<double> score(W);
            for (std::size_t i = 0; i < W; ++i) {
                const auto& m = p.models[i];
                switch (method) {
                case NotifyMethod::skde: {
                    double s = 0.0;
                    for (std::size_t k = 0; k < m.scales.size(); ++k) {
                        if (m.weights[k] == 0.0) continue;
                        s += m.weights[k] * (m.scales[k] == p.population ? population
                                                                          : m.scales[k]->density(ts));
                    }
                    score[i] = s;
                    break;
                }
                case NotifyMethod::kde:
                    score[i] = m.scales.front()->density(ts);
                    break;
                case NotifyMethod::nwp:
                    score[i] = nwp_score(p.train[i], ts, options.nwp_theta);
                    break;
                case NotifyMethod::random:
                    break;
                }
            }
            std::vector<std::size_t> order(W);
            std::iota(order.begin(), order.end(), 0);
            if (method == NotifyMethod::random) {
                std::ranges::shuffle(order, rng);
            } else {
                std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
                    return score[a] > score[b];
                });
            }
            for (double f : options.fractions) {
                const auto n = std::min<std::size_t>(
                    W, static_cast<std::size_t>(std::ceil(f * static_cast<double>(W) - 1e-9)));
                std::vector<WorkerId> predicted;
                for (std::size_t k = 0; k < n; ++k) predicted.push_back(p.workers[order[k]]);
                const auto pr = precision_recall(predicted, active);
                auto& a = acc[{method, f}];
                a.precision += pr.precision;
                ++a.queries;
                a.predicted = n;
                if (pr.recall) {
                    a.recall += *pr.recall;
                    ++a.recall_queries;
                }
            }
        }
    }

    std::vector<NotifyEvalRow> rows;
    for (auto method : options.methods) {
        for (double f : options.fractions) {
            const auto& a = acc[{method, f}];
            NotifyEvalRow row;
            row.method = method;
            row.fraction = f;
            row.predicted = a.predicted;
            row.queries = a.queries;
            row.precision = a.queries ? a.precision / a.queries : 0.0;
            row.recall = a.recall_queries ? a.recall / a.recall_queries : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

SocialLog generate_social_log(const SocialLogConfig& c) {
    if (c.groups == 0 || c.group_size == 0 || c.weeks == 0 || c.sessions_per_week == 0) {
        throw ConfigError("social_log", "groups, sizes, weeks and sessions must be positive");
    }
    if (c.cold_start_per_group > c.group_size) {
        throw ConfigError("social_log", "more cold-start members than group members");
    }
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> anywhere(0.0, notification::kWeek);
    std::normal_distribution<double> jitter(0.0, c.jitter);
    std::normal_distribution<double> burst(0.0, 120.0);
    std::bernoulli_distribution noise(c.noise_share);

    const Seconds span = static_cast<double>(c.weeks) * notification::kWeek;
    const Seconds split = c.train_share * span;

    SocialLog out;
    std::uint32_t next = 0;
    for (std::size_t g = 0; g < c.groups; ++g) {
        std::vector<Seconds> slots;
        for (std::size_t s = 0; s < c.sessions_per_week; ++s) slots.push_back(anywhere(rng));
        std::vector<WorkerId> members;
        for (std::size_t k = 0; k < c.group_size; ++k) {
            const WorkerId w(next++);
            const bool cold = k < c.cold_start_per_group;
            if (cold) out.cold_start.push_back(w);
            for (auto m : members) out.graph.add_edge(w, m);
            members.push_back(w);

            auto& events = out.log[w];
            std::size_t kept_train_sessions = 0;
            for (std::size_t week = 0; week < c.weeks; ++week) {
                for (Seconds slot : slots) {
                    const Seconds centre = static_cast<double>(week) * notification::kWeek +
                                           (noise(rng) ? anywhere(rng) : slot + jitter(rng));
                    if (centre < 0.0 || centre >= span) continue;
                    if (cold && centre < split) {
                        if (kept_train_sessions >= c.cold_start_sessions) continue;
                        ++kept_train_sessions;
                    }
                    for (std::size_t e = 0; e < c.events_per_session; ++e) {
                        const Seconds t = centre + std::abs(burst(rng));
                        if (t < span) events.push_back(t);
                    }
                }
            }
            std::ranges::sort(events);
        }
    }
    return out;
}

} // namespace frog::sim
