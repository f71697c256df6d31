#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "frog/config.hpp"
#include "frog/errors.hpp"
#include "frog/notification.hpp"
#include "frog/profiling.hpp"
#include "frog/scheduling.hpp"
#include "frog/sim.hpp"
#include "frog/voting.hpp"

namespace py = pybind11;
using namespace frog;

namespace {

std::vector<WorkerId> ids_of(const std::vector<std::uint32_t>& raw) {
    std::vector<WorkerId> out;
    for (auto v : raw) out.emplace_back(v);
    return out;
}

std::vector<std::uint32_t> raw_ids(const std::vector<WorkerId>& ids) {
    std::vector<std::uint32_t> out;
    for (auto w : ids) out.push_back(w.value);
    return out;
}

} // namespace

PYBIND11_MODULE(_frog, m) {
    m.doc() = "FROG crowdsourcing scheduler core";

    static py::exception<Error> base_error(m, "FrogError");
    static py::exception<ConfigError> config_error(m, "ConfigError", base_error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            py::set_error(config_error, e.what());
        } catch (const Error& e) {
            py::set_error(base_error, e.what());
        }
    });

    // voting
    m.def("expected_accuracy_majority",
          [](const std::vector<double>& acc, bool formula_as_written) {
              return voting::expected_accuracy_majority(
                  acc, formula_as_written ? voting::EvenSizes::formula_as_written
                                          : voting::EvenSizes::reject);
          },
          py::arg("accuracies"), py::arg("formula_as_written") = false);
    m.def("expected_accuracy_incremental",
          [](const std::vector<double>& base, double accuracy) {
              voting::WorkerSetAccuracy set(base, voting::EvenSizes::formula_as_written);
              return voting::expected_accuracy_incremental(set, accuracy);
          },
          py::arg("base"), py::arg("accuracy"));
    m.def("expected_accuracy_multichoice_majority",
          [](const std::vector<double>& acc, int choices) {
              return voting::expected_accuracy_multichoice_majority(acc, choices);
          },
          py::arg("accuracies"), py::arg("choice_count"));
    m.def("clamp_accuracy",
          [](double raw, int choices) {
              auto c = clamp_accuracy(raw, choices);
              return py::make_tuple(c.value, c.flipped);
          },
          py::arg("raw"), py::arg("choice_count") = 2);

    // profiling
    m.def("predict_response_time",
          [](const std::vector<std::pair<double, double>>& points, std::size_t eta, double at) {
              std::vector<ResponseSample> h;
              for (auto [t, r] : points) h.push_back({t, r});
              return profiling::predict_response_time(h, eta, at);
          },
          py::arg("history"), py::arg("eta"), py::arg("at"));
    m.def("update_accuracy",
          [](double qualification, std::size_t cohort,
             const std::vector<std::pair<int, int>>& recent) {
              std::vector<profiling::RecentOutcome> r;
              for (auto [a, g] : recent) r.push_back({a, g});
              return profiling::update_accuracy(qualification, cohort, r).value;
          },
          py::arg("qualification_accuracy"), py::arg("cohort_size"), py::arg("recent"));

    // scheduling
    m.def("min_worker_set_selection",
          [](double quality, const std::vector<std::pair<std::uint32_t, double>>& pool,
             const std::vector<double>& assigned) {
              std::vector<scheduling::Candidate> c;
              for (auto [id, acc] : pool) c.push_back({WorkerId(id), acc, 1.0});
              return raw_ids(scheduling::min_worker_set_selection(quality, c, assigned));
          },
          py::arg("quality"), py::arg("pool"), py::arg("already_assigned") = std::vector<double>{});
    m.def("delay_score",
          [](double difficulty, double quality, double lapse, double max_lapse, double mean) {
              Task t = Task::make(TaskId(0), 0, quality, 0.0);
              t.difficulty = difficulty;
              const auto s = scheduling::delay_score(t, lapse, max_lapse, mean);
              return py::make_tuple(s.score, s.exponent);
          },
          py::arg("difficulty"), py::arg("quality"), py::arg("lapse"), py::arg("max_lapse"),
          py::arg("mean_response"));

    // notification
    m.def("rule_of_thumb_bandwidth",
          [](const std::vector<double>& s) { return notification::rule_of_thumb_bandwidth(s); },
          py::arg("samples"));
    py::class_<notification::AdaptiveKde>(m, "AdaptiveKde")
        .def(py::init([](const std::vector<double>& samples, double beta, double period,
                         double min_bandwidth) {
                 return notification::AdaptiveKde(
                     samples, notification::KdeOptions{beta, period, min_bandwidth});
             }),
             py::arg("samples"), py::arg("beta") = 0.1, py::arg("period") = notification::kWeek,
             py::arg("min_bandwidth") = notification::kMinBandwidth)
        .def("density", &notification::AdaptiveKde::density, py::arg("ts"))
        .def_property_readonly("bandwidths", [](const notification::AdaptiveKde& k) {
            return std::vector<double>(k.bandwidths().begin(), k.bandwidths().end());
        });
    m.def("em_fit",
          [](const std::vector<std::vector<double>>& rows) {
              if (rows.empty()) throw DomainError("no validation rows");
              const std::size_t S = rows.front().size();
              std::vector<double> flat;
              for (const auto& r : rows) {
                  if (r.size() != S) throw DomainError("density matrix is ragged");
                  flat.insert(flat.end(), r.begin(), r.end());
              }
              const auto res = notification::em_fit(flat, S);
              py::dict d;
              d["weights"] = res.weights;
              d["iterations"] = res.iterations;
              d["converged"] = res.converged;
              d["log_likelihood"] = res.log_likelihood;
              d["dropped"] = res.dropped;
              return d;
          },
          py::arg("densities"));
    m.def("worker_notify",
          [](const std::vector<std::tuple<std::uint32_t, double, double, double>>& offline,
             double needed) {
              std::vector<notification::WorkerSummary> s;
              for (auto [id, p, a, r] : offline) s.push_back({WorkerId(id), p, a, r});
              return raw_ids(notification::worker_notify(s, needed));
          },
          py::arg("offline"), py::arg("needed"));

    // simulation
    py::enum_<sim::Policy>(m, "Policy")
        .value("RBS", sim::Policy::rbs)
        .value("BBS", sim::Policy::bbs)
        .value("RANDOM", sim::Policy::random)
        .value("fGreedy", sim::Policy::fgreedy)
        .value("iCrowd", sim::Policy::icrowd);

    py::class_<sim::SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("seed", &sim::SimConfig::seed)
        .def_readwrite("m", &sim::SimConfig::tasks)
        .def_readwrite("n", &sim::SimConfig::workers)
        .def_readwrite("L", &sim::SimConfig::categories)
        .def_readwrite("quality_low", &sim::SimConfig::quality_low)
        .def_readwrite("quality_high", &sim::SimConfig::quality_high)
        .def_readwrite("policy", &sim::SimConfig::policy)
        .def_readwrite("icrowd_k", &sim::SimConfig::icrowd_k)
        .def_readwrite("interval", &sim::SimConfig::interval)
        .def_readwrite("skip_probability", &sim::SimConfig::skip_probability)
        .def_readwrite("horizon", &sim::SimConfig::horizon)
        .def("to_json", [](const sim::SimConfig& c) { return config::to_json(c); })
        .def_static("from_json", [](const std::string& text) {
            return config::run_spec_from_json(text).config;
        });

    py::class_<sim::MetricsReport>(m, "MetricsReport")
        .def_readonly("max_latency", &sim::MetricsReport::max_latency)
        .def_readonly("avg_accuracy", &sim::MetricsReport::avg_accuracy)
        .def_readonly("throughput", &sim::MetricsReport::throughput)
        .def_readonly("completed", &sim::MetricsReport::completed)
        .def_readonly("makespan", &sim::MetricsReport::makespan)
        .def("metrics_csv", [](const sim::MetricsReport& r) {
            return sim::metrics_header() + sim::metrics_row(r);
        })
        .def("trace_csv", [](const sim::MetricsReport& r) { return sim::trace_csv(r); });

    m.def("run", [](const sim::SimConfig& c) {
        py::gil_scoped_release release;
        return sim::run(c);
    }, py::arg("config"));

    m.def("notification_eval",
          [](std::uint64_t seed, const std::vector<double>& fractions) {
              sim::SocialLogConfig sc;
              sc.seed = seed;
              const auto social = sim::generate_social_log(sc);
              sim::NotifyEvalOptions opt;
              opt.fractions = fractions;
              py::list out;
              for (const auto& r : sim::run_notification_eval(social.log, social.graph, opt)) {
                  py::dict d;
                  d["method"] = sim::method_name(r.method);
                  d["fraction"] = r.fraction;
                  d["precision"] = r.precision;
                  d["recall"] = r.recall;
                  out.append(d);
              }
              return out;
          },
          py::arg("seed") = 7,
          py::arg("fractions") = std::vector<double>{0.05, 0.1});
}
