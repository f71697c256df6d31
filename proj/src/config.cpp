#include "frog/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <future>
#include <thread>

#include <json.hpp>

#include "frog/errors.hpp"
#include "frog/io.hpp"

namespace frog::config {

using nlohmann::json;

namespace {

template <class T>
T get(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, std::string("wrong type: ") + e.what());
    }
}

std::size_t get_count(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number_unsigned()) {
        throw ConfigError(key, "must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

} // namespace

RunSpec run_spec_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("", "config must be a JSON object");

    RunSpec spec;
    auto& c = spec.config;
    for (const auto& [key, value] : j.items()) {
        if (key == "seed") {
            if (!value.is_number_unsigned()) throw ConfigError(key, "must be a non-negative integer");
            c.seed = value.get<std::uint64_t>();
        } else if (key == "m") {
            c.tasks = get_count(j, key);
        } else if (key == "n") {
            c.workers = get_count(j, key);
        } else if (key == "L") {
            c.categories = get_count(j, key);
        } else if (key == "q") {
            if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
                !value[1].is_number()) {
                throw ConfigError(key, "must be a [low, high] pair of numbers");
            }
            c.quality_low = value[0].get<double>();
            c.quality_high = value[1].get<double>();
        } else if (key == "policy") {
            std::optional<std::size_t> k;
            c.policy = sim::parse_policy(get<std::string>(j, key), &k);
            if (k) c.icrowd_k = *k;
        } else if (key == "icrowd_k") {
            c.icrowd_k = get_count(j, key);
        } else if (key == "interval") {
            c.interval = get<double>(j, key);
        } else if (key == "skip_probability") {
            c.skip_probability = get<double>(j, key);
        } else if (key == "choices") {
            c.choice_count = get<int>(j, key);
        } else if (key == "arrival") {
            const auto a = get<std::string>(j, key);
            if (a == "batch") {
                c.arrival = sim::Arrival::batch;
            } else if (a == "poisson") {
                c.arrival = sim::Arrival::poisson;
            } else {
                throw ConfigError(key, "must be \"batch\" or \"poisson\"");
            }
        } else if (key == "arrival_rate") {
            c.arrival_rate = get<double>(j, key);
        } else if (key == "horizon") {
            c.horizon = get<double>(j, key);
        } else if (key == "response_variance") {
            c.response_variance = get<double>(j, key);
        } else if (key == "archetypes") {
            c.archetypes = get<std::string>(j, key);
        } else if (key == "output") {
            spec.output = get<std::string>(j, key);
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    c.validate();
    return spec;
}

RunSpec load_run_spec(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError(path.string(), "file does not exist");
    try {
        return run_spec_from_json(io::read_text(path));
    } catch (const ConfigError& e) {
        if (!e.key().empty()) throw;
        throw ConfigError(path.string(), e.what());
    }
}

sim::SimConfig parse_config(const std::filesystem::path& path) {
    return load_run_spec(path).config;
}

std::string to_json(const sim::SimConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["m"] = c.tasks;
    j["n"] = c.workers;
    j["L"] = c.categories;
    j["q"] = {c.quality_low, c.quality_high};
    j["policy"] = sim::policy_name(c.policy);
    j["icrowd_k"] = c.icrowd_k;
    j["interval"] = c.interval;
    j["skip_probability"] = c.skip_probability;
    j["choices"] = c.choice_count;
    j["arrival"] = c.arrival == sim::Arrival::batch ? "batch" : "poisson";
    j["arrival_rate"] = c.arrival_rate;
    j["horizon"] = c.horizon;
    j["response_variance"] = c.response_variance;
    j["archetypes"] = c.archetypes;
    return j.dump(2);
}

Environment process_environment() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) return std::string(v);
        return std::nullopt;
    };
}

void apply_environment(RunSpec& spec, const Environment& env) {
    if (auto seed = env("FROG_SEED")) {
        const auto v = io::parse_int(*seed, "FROG_SEED");
        if (v < 0) throw ConfigError("FROG_SEED", "must be non-negative");
        spec.config.seed = static_cast<std::uint64_t>(v);
    }
    if (auto out = env("FROG_OUTPUT")) {
        if (out->empty()) throw ConfigError("FROG_OUTPUT", "must not be empty");
        spec.output = *out;
    }
}

SweepParam parse_sweep_param(const std::string& name) {
    if (name == "m") return SweepParam::m;
    if (name == "n") return SweepParam::n;
    if (name == "L") return SweepParam::L;
    if (name == "q-range") return SweepParam::q_range;
    throw ConfigError("param", "unknown sweep parameter '" + name + "' (expected m, n, L or q-range)");
}

sim::SimConfig with_value(const sim::SimConfig& base, SweepParam param, const std::string& value) {
    sim::SimConfig c = base;
    auto count = [&](const char* key) {
        const auto v = io::parse_int(value, key);
        if (v < 0) throw ConfigError(key, "must be non-negative");
        return static_cast<std::size_t>(v);
    };
    switch (param) {
    case SweepParam::m: c.tasks = count("m"); break;
    case SweepParam::n: c.workers = count("n"); break;
    case SweepParam::L: c.categories = count("L"); break;
    case SweepParam::q_range: {
        const auto colon = value.find(':');
        if (colon == std::string::npos) throw ConfigError("q", "expected low:high, got '" + value + "'");
        c.quality_low = io::parse_double(std::string_view(value).substr(0, colon), "q");
        c.quality_high = io::parse_double(std::string_view(value).substr(colon + 1), "q");
        break;
    }
    }
    c.validate();
    return c;
}

std::vector<sim::MetricsReport> sweep(const sim::SimConfig& base, SweepParam param,
                                      const std::vector<std::string>& values,
                                      const SweepOptions& options) {
    if (values.empty()) throw ConfigError("values", "no sweep values given");
    if (options.seeds == 0) throw ConfigError("seeds", "must be positive");

    std::vector<sim::SimConfig> jobs;
    for (const auto& v : values) {
        const auto at_value = with_value(base, param, v);
        for (auto policy : options.policies) {
            for (std::size_t s = 0; s < options.seeds; ++s) {
                auto c = at_value;
                c.policy = policy;
                c.seed = base.seed + s;
                jobs.push_back(c);
            }
        }
    }

    std::size_t threads = options.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<sim::MetricsReport> reports(jobs.size());
    for (std::size_t begin = 0; begin < jobs.size(); begin += threads) {
        const std::size_t end = std::min(jobs.size(), begin + threads);
        std::vector<std::future<sim::MetricsReport>> running;
        for (std::size_t i = begin; i < end; ++i) {
            running.push_back(std::async(std::launch::async, [&jobs, i] { return sim::run(jobs[i]); }));
        }
        for (std::size_t i = begin; i < end; ++i) reports[i] = running[i - begin].get();
    }
    return reports;
}

std::string metrics_csv(const std::vector<sim::MetricsReport>& reports) {
    std::string out = sim::metrics_header();
    for (const auto& r : reports) out += sim::metrics_row(r);
    return out;
}

} // namespace frog::config
