#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>

#include "frog/config.hpp"
#include "frog/errors.hpp"
#include "frog/io.hpp"

using namespace frog;
using namespace frog::config;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "frog-unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string key_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

} // namespace

TEST_CASE("empty config gives the defaults") {
    const auto spec = run_spec_from_json("{}");
    CHECK(spec.config == sim::SimConfig{});
    CHECK(spec.config.tasks == 3000);
    CHECK(spec.config.workers == 300);
    CHECK(spec.config.categories == 20);
    CHECK(spec.config.quality_low == 0.8);
    CHECK(spec.config.quality_high == 0.85);
}

TEST_CASE("config errors name the key") {
    CHECK(key_of([] { run_spec_from_json(R"({"q": [0.9, 0.8]})"); }) == "q");
    CHECK(key_of([] { run_spec_from_json(R"({"foo": 1})"); }) == "foo");
    CHECK(key_of([] { run_spec_from_json(R"({"m": -3})"); }) == "m");
    CHECK(key_of([] { run_spec_from_json(R"({"policy": "LIFO"})"); }) == "policy");
    CHECK(key_of([] { run_spec_from_json(R"({"q": [0.9]})"); }) == "q");
    CHECK(key_of([] { run_spec_from_json("[1, 2]"); }) == "");
    CHECK_THROWS_AS(run_spec_from_json("{\"m\": "), ConfigError);
    CHECK_THROWS_AS(load_run_spec(scratch("nope.json")), ConfigError);
}

TEST_CASE("config fields parse") {
    const auto spec = run_spec_from_json(R"({
        "seed": 42, "m": 500, "n": 50, "L": 5, "q": [0.7, 0.9], "policy": "iCrowd-5",
        "interval": 15, "skip_probability": 0.1, "choices": 3, "arrival": "poisson",
        "arrival_rate": 0.5, "horizon": 3600, "response_variance": 2.5, "output": "runs/a"})");
    const auto& c = spec.config;
    CHECK(c.seed == 42);
    CHECK(c.tasks == 500);
    CHECK(c.workers == 50);
    CHECK(c.categories == 5);
    CHECK(c.quality_low == 0.7);
    CHECK(c.quality_high == 0.9);
    CHECK(c.policy == sim::Policy::icrowd);
    CHECK(c.icrowd_k == 5);
    CHECK(c.interval == 15.0);
    CHECK(c.skip_probability == 0.1);
    CHECK(c.choice_count == 3);
    CHECK(c.arrival == sim::Arrival::poisson);
    CHECK(c.horizon == 3600.0);
    CHECK(spec.output == "runs/a");
}

TEST_CASE("config json round-trips") {
    sim::SimConfig c;
    c.seed = 18446744073709551615ull;
    c.tasks = 7;
    c.quality_low = 0.61;
    c.quality_high = 0.62;
    c.policy = sim::Policy::fgreedy;
    c.interval = 0.1;
    c.arrival = sim::Arrival::poisson;
    c.archetypes = "data/archetypes.csv";
    CHECK(run_spec_from_json(to_json(c)).config == c);
    CHECK(run_spec_from_json(to_json(sim::SimConfig{})).config == sim::SimConfig{});

    const auto path = scratch("config.json");
    io::write_text(path, to_json(c));
    CHECK(parse_config(path) == c);
}

TEST_CASE("environment overrides seed and output only") {
    std::map<std::string, std::string> vars{{"FROG_SEED", "77"}, {"FROG_OUTPUT", "elsewhere"},
                                            {"FROG_M", "5"}};
    Environment env = [&](const std::string& k) -> std::optional<std::string> {
        auto it = vars.find(k);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
    RunSpec spec;
    apply_environment(spec, env);
    CHECK(spec.config.seed == 77);
    CHECK(spec.output == "elsewhere");
    CHECK(spec.config.tasks == 3000);

    vars["FROG_SEED"] = "x";
    CHECK(key_of([&] { apply_environment(spec, env); }) == "FROG_SEED");
}

TEST_CASE("sweep parameters") {
    CHECK(parse_sweep_param("m") == SweepParam::m);
    CHECK(parse_sweep_param("q-range") == SweepParam::q_range);
    CHECK_THROWS_AS(parse_sweep_param("tasks"), ConfigError);

    const sim::SimConfig base;
    CHECK(with_value(base, SweepParam::n, "120").workers == 120);
    const auto q = with_value(base, SweepParam::q_range, "0.7:0.75");
    CHECK(q.quality_low == 0.7);
    CHECK(q.quality_high == 0.75);
    CHECK_THROWS_AS(with_value(base, SweepParam::q_range, "0.9:0.8"), ConfigError);
    CHECK_THROWS_AS(with_value(base, SweepParam::L, "0"), ConfigError);
    CHECK_THROWS_AS(with_value(base, SweepParam::m, "ten"), ConfigError);
}

TEST_CASE("a five-value sweep yields 75 rows in a fixed order") {
    sim::SimConfig base;
    base.tasks = 20;
    base.workers = 6;
    base.categories = 2;
    base.seed = 11;
    const std::vector<std::string> values{"10", "20", "30", "40", "50"};
    const auto reports = sweep(base, SweepParam::m, values, {.threads = 4});
    REQUIRE(reports.size() == 75);
    std::size_t i = 0;
    for (const auto& v : values) {
        for (auto p : SweepOptions{}.policies) {
            for (std::uint64_t s = 0; s < 3; ++s, ++i) {
                CHECK(reports[i].tasks == std::stoul(v));
                CHECK(reports[i].policy == p);
                CHECK(reports[i].seed == 11 + s);
            }
        }
    }
    const auto csv = metrics_csv(reports);
    CHECK(std::ranges::count(csv, '\n') == 76);
    CHECK(metrics_csv(sweep(base, SweepParam::m, values, {.threads = 1})) == csv);
}

TEST_CASE("csv helpers") {
    CHECK(io::split_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(io::split_line("a,b\r") == std::vector<std::string>{"a", "b"});
    CHECK(io::parse_double("2.5", "x") == 2.5);
    CHECK_THROWS_AS(io::parse_double(" 2.5", "x"), ConfigError);
    CHECK_THROWS_AS(io::parse_double("2.5x", "x"), ConfigError);
    CHECK(io::parse_int("-4", "x") == -4);
    CHECK_THROWS_AS(io::parse_int("4.0", "x"), ConfigError);
    for (double v : {0.1, 1.0 / 3.0, 17.78, 1e-300, 123456789.125}) {
        CHECK(io::parse_double(io::format_double(v), "x") == v);
    }
    CHECK(io::format_double(0.8) == "0.8");
}

TEST_CASE("event and friend files round-trip") {
    sim::ActivityLog log;
    log[WorkerId(3)] = {1500000000.0, 1500000100.5};
    log[WorkerId(9)] = {1500003600.0};
    const auto events = scratch("events.csv");
    io::write_text(events, io::events_csv(log));
    CHECK(io::read_events(events) == log);

    notification::FriendGraph g;
    g.add_edge(WorkerId(3), WorkerId(9));
    g.add_edge(WorkerId(9), WorkerId(12));
    const auto friends = scratch("friends.csv");
    io::write_text(friends, io::friends_csv(g));
    CHECK(io::read_friends(friends).adjacency() == g.adjacency());

    io::write_text(events, "worker,timestamp\n1,2\n");
    CHECK_THROWS_AS(io::read_events(events), ConfigError);
    io::write_text(events, "worker_id,timestamp_epoch_seconds\n1,abc\n");
    CHECK(key_of([&] { io::read_events(events); }) == "events.csv:2");
}

TEST_CASE("qualification file") {
    const auto path = scratch("qual.csv");
    io::write_text(path,
                   "worker_id,category,task_index,answer,ground_truth\n"
                   "1,0,1,0,0\n1,0,0,1,1\n2,0,0,0,1\n2,0,1,0,0\n1,3,0,1,1\n");
    const auto recs = io::read_qualification(path);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].worker == WorkerId(1));
    CHECK(recs[0].category == 0);
    CHECK(recs[0].answers == std::vector{1, 0});
    CHECK(recs[0].ground_truth == std::vector{1, 0});
    CHECK(recs[1].category == 3);
    CHECK(recs[2].answers == std::vector{0, 0});
}
