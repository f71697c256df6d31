// Command-line front end: simulate, sweep, notify-eval, calibrate, social-log.
// Data goes to files; diagnostics go to stderr.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "frog/config.hpp"
#include "frog/errors.hpp"
#include "frog/io.hpp"
#include "frog/profiling.hpp"
#include "frog/sim.hpp"

namespace fs = std::filesystem;
using namespace frog;

namespace {

config::RunSpec resolve(const std::string& config_path, const std::string& out,
                        const std::optional<std::uint64_t>& seed) {
    config::RunSpec spec;
    if (!config_path.empty()) spec = config::load_run_spec(config_path);
    config::apply_environment(spec, config::process_environment());
    if (!out.empty()) spec.output = out;
    if (seed) spec.config.seed = *seed;
    spec.config.validate();
    return spec;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto& v : io::split_line(text)) {
        if (!v.empty()) out.push_back(v);
    }
    return out;
}

void simulate(const config::RunSpec& spec) {
    const auto report = sim::run(spec.config);
    io::write_text(spec.output / "metrics.csv", sim::metrics_header() + sim::metrics_row(report));
    io::write_text(spec.output / "trace.csv", sim::trace_csv(report));
    std::cerr << "completed " << report.completed << "/" << report.tasks << " tasks, max latency "
              << report.max_latency << " s -> " << spec.output.string() << "\n";
}

void notify_eval(const std::string& events, const std::string& friends,
                 const std::vector<std::string>& fractions, double period, const fs::path& out,
                 std::uint64_t seed) {
    const auto log = io::read_events(events);
    const auto graph = friends.empty() ? notification::FriendGraph{} : io::read_friends(friends);
    sim::NotifyEvalOptions opt;
    opt.seed = seed;
    opt.scales.kde.period = period;
    opt.fractions.clear();
    for (const auto& f : fractions) opt.fractions.push_back(io::parse_double(f, "fraction"));
    const auto rows = sim::run_notification_eval(log, graph, opt);
    std::string csv = "method,fraction,predicted,precision,recall,queries\n";
    for (const auto& r : rows) {
        csv += sim::method_name(r.method) + "," + io::format_double(r.fraction) + "," +
               std::to_string(r.predicted) + "," + io::format_double(r.precision) + "," +
               io::format_double(r.recall) + "," + std::to_string(r.queries) + "\n";
    }
    io::write_text(out / "notify.csv", csv);
}

void calibrate(const std::string& qual, const fs::path& out) {
    const auto records = io::read_qualification(qual);
    const auto cal = profiling::calibrate_cohort(records);
    std::string csv = "worker_id,category,raw_accuracy,accuracy,flipped\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        csv += std::to_string(records[i].worker.value) + "," +
               std::to_string(records[i].category) + "," +
               io::format_double(cal.raw_accuracies[i]) + "," +
               io::format_double(cal.accuracies[i].value) + "," +
               (cal.accuracies[i].flipped ? "1" : "0") + "\n";
    }
    io::write_text(out / "calibration.csv", csv);
    if (!cal.converged) std::cerr << "warning: calibration stopped before converging\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FROG crowdsourcing scheduler and simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;

    auto* simulate_cmd = app.add_subcommand("simulate", "run one simulation");
    simulate_cmd->add_option("--config", config_path, "JSON config")->check(CLI::ExistingFile);
    simulate_cmd->add_option("--out", out, "output directory");
    simulate_cmd->add_option("--seed", seed, "seed override");

    std::string param;
    std::string values;
    std::size_t seeds = 3;
    std::size_t threads = 0;
    auto* sweep_cmd = app.add_subcommand("sweep", "vary one parameter across all policies");
    sweep_cmd->add_option("--param", param, "m, n, L or q-range")->required();
    sweep_cmd->add_option("--values", values, "comma-separated values (q-range as low:high)")
        ->required();
    sweep_cmd->add_option("--config", config_path, "base JSON config")->check(CLI::ExistingFile);
    sweep_cmd->add_option("--seeds", seeds, "seeds per value and policy");
    sweep_cmd->add_option("--threads", threads, "parallel runs (0 = all cores)");
    sweep_cmd->add_option("--out", out, "output directory");
    sweep_cmd->add_option("--seed", seed, "first seed");

    std::string events;
    std::string friends;
    std::string fractions = "0.05,0.06,0.07,0.08,0.09,0.1";
    double period = notification::kWeek;
    auto* notify_cmd = app.add_subcommand("notify-eval", "precision/recall of availability predictors");
    notify_cmd->add_option("--events", events, "worker_id,timestamp_epoch_seconds CSV")
        ->required()
        ->check(CLI::ExistingFile);
    notify_cmd->add_option("--friends", friends, "worker_id_a,worker_id_b CSV")
        ->check(CLI::ExistingFile);
    notify_cmd->add_option("--fraction", fractions, "comma-separated sample fractions");
    notify_cmd->add_option("--period", period, "wrap period in seconds");
    notify_cmd->add_option("--out", out, "output directory");
    notify_cmd->add_option("--seed", seed, "seed for the Random baseline");

    std::string qual;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "estimate worker accuracies from a qualification test");
    calibrate_cmd->add_option("--qual", qual, "worker_id,category,task_index,answer,ground_truth CSV")
        ->required()
        ->check(CLI::ExistingFile);
    calibrate_cmd->add_option("--out", out, "output directory");

    auto* social_cmd = app.add_subcommand("social-log", "write a synthetic activity log and friend graph");
    social_cmd->add_option("--out", out, "output directory");
    social_cmd->add_option("--seed", seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate_cmd) {
            simulate(resolve(config_path, out, seed));
        } else if (*sweep_cmd) {
            const auto spec = resolve(config_path, out, seed);
            config::SweepOptions opt;
            opt.seeds = seeds;
            opt.threads = threads;
            const auto reports = config::sweep(spec.config, config::parse_sweep_param(param),
                                               split_list(values), opt);
            io::write_text(spec.output / "sweep.csv", config::metrics_csv(reports));
        } else if (*notify_cmd) {
            const auto spec = resolve("", out, seed);
            notify_eval(events, friends, split_list(fractions), period, spec.output,
                        spec.config.seed);
        } else if (*calibrate_cmd) {
            calibrate(qual, resolve("", out, std::nullopt).output);
        } else if (*social_cmd) {
            const auto spec = resolve("", out, seed);
            sim::SocialLogConfig sc;
            sc.seed = spec.config.seed;
            const auto social = sim::generate_social_log(sc);
            io::write_text(spec.output / "events.csv", io::events_csv(social.log));
            io::write_text(spec.output / "friends.csv", io::friends_csv(social.graph));
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
