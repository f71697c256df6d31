#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frog/sim.hpp"

namespace frog::config {

/// A simulation config plus where its results go.
struct RunSpec {
    sim::SimConfig config;
    std::filesystem::path output{"frog-out"};
};

/// JSON object; every key is optional and unknown keys are rejected.
///
///   seed, m, n, L, q: [lo, hi], policy ("RBS" | "BBS" | "RANDOM" | "fGreedy" |
///   "iCrowd" | "iCrowd-<k>"), icrowd_k, interval, skip_probability, choices,
///   arrival ("batch" | "poisson"), arrival_rate, horizon, response_variance,
///   archetypes (CSV path), output (directory)
RunSpec run_spec_from_json(std::string_view text);
RunSpec load_run_spec(const std::filesystem::path& path);

sim::SimConfig parse_config(const std::filesystem::path& path);

/// Full JSON form of a config (every key written); parses back to an equal value.
std::string to_json(const sim::SimConfig& config);

using Environment = std::function<std::optional<std::string>(const std::string&)>;
Environment process_environment();

/// FROG_SEED and FROG_OUTPUT override `seed` and `output`; nothing else can.
void apply_environment(RunSpec& spec, const Environment& env);

enum class SweepParam { m, n, L, q_range };
/// Accepts m, n, L and q-range; throws ConfigError otherwise.
SweepParam parse_sweep_param(const std::string& name);

/// Applies one sweep value ("0.8:0.85" for q-range) to a copy of `base`.
sim::SimConfig with_value(const sim::SimConfig& base, SweepParam param, const std::string& value);

struct SweepOptions {
    std::vector<sim::Policy> policies{sim::Policy::rbs, sim::Policy::bbs, sim::Policy::random,
                                      sim::Policy::fgreedy, sim::Policy::icrowd};
    std::size_t seeds{3};
    // 0 means one thread per hardware core.
    std::size_t threads{0};
};

/// One run per (value, policy, seed); seeds are base.seed, base.seed + 1, ...
/// Reports come back in that nested order regardless of thread scheduling.
std::vector<sim::MetricsReport> sweep(const sim::SimConfig& base, SweepParam param,
                                      const std::vector<std::string>& values,
                                      const SweepOptions& options = {});

std::string metrics_csv(const std::vector<sim::MetricsReport>& reports);

} // namespace frog::config
