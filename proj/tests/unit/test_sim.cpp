#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "frog/errors.hpp"
#include "frog/io.hpp"
#include "frog/sim.hpp"
#include "frog/voting.hpp"

using namespace frog;
using namespace frog::sim;

namespace {

SimConfig small(Policy policy, std::uint64_t seed = 1) {
    SimConfig c;
    c.seed = seed;
    c.tasks = 120;
    c.workers = 15;
    c.categories = 3;
    c.policy = policy;
    return c;
}

const std::vector<Policy> kPolicies{Policy::rbs, Policy::bbs, Policy::random, Policy::fgreedy,
                                    Policy::icrowd};

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "frog-unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("policy names round-trip") {
    for (auto p : kPolicies) CHECK(parse_policy(policy_name(p)) == p);
    std::optional<std::size_t> k;
    CHECK(parse_policy("iCrowd-5", &k) == Policy::icrowd);
    CHECK(k == 5u);
    CHECK_THROWS_AS(parse_policy("LIFO"), ConfigError);
    CHECK_THROWS_AS(parse_policy("iCrowd-0"), ConfigError);
}

TEST_CASE("config validation") {
    SimConfig c;
    CHECK_NOTHROW(c.validate());
    c.quality_low = 0.9;
    c.quality_high = 0.8;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.categories = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.interval = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("population generation") {
    SimConfig c = small(Policy::bbs, 9);
    const auto a = generate_population(c);
    const auto b = generate_population(c);
    CHECK(a.workers == b.workers);
    CHECK(a.tasks == b.tasks);
    CHECK(a.category_mean_response == b.category_mean_response);
    REQUIRE(a.workers.size() == c.workers);
    REQUIRE(a.tasks.size() == c.tasks);
    for (const auto& t : a.tasks) {
        CHECK(t.quality_threshold >= 0.8);
        CHECK(t.quality_threshold <= 0.85);
        CHECK(t.category < c.categories);
        CHECK(t.start_time == 0.0);
        CHECK(t.ground_truth);
    }
    for (const auto& w : a.workers) {
        for (const auto& [_, p] : w.profiles) {
            CHECK(p.accuracy > 0.5);
            CHECK(p.predicted_response > 0.0);
        }
    }
    c.seed = 10;
    CHECK_FALSE(generate_population(c).tasks == a.tasks);
}

TEST_CASE("poisson arrivals are ordered and spread out") {
    SimConfig c = small(Policy::bbs);
    c.arrival = Arrival::poisson;
    c.arrival_rate = 0.1;
    const auto pop = generate_population(c);
    CHECK(std::ranges::is_sorted(pop.tasks, {}, &Task::start_time));
    CHECK(pop.tasks.back().start_time > 0.0);
    const auto mean_gap = pop.tasks.back().start_time / static_cast<double>(c.tasks);
    CHECK(mean_gap == doctest::Approx(10.0).epsilon(0.3));
}

TEST_CASE("response draws") {
    std::mt19937_64 rng(5);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) sum += draw_response(rng, 17.78, 4.0);
    CHECK(std::abs(sum / 10000.0 - 17.78) < 0.1);
    for (int i = 0; i < 1000; ++i) CHECK(draw_response(rng, 0.6, 4.0) >= kMinResponse);
}

TEST_CASE("archetype files") {
    const auto path = scratch("archetypes.csv");
    std::string text = "archetype,column,accuracy,mean_response,variance\n";
    for (const auto& a : default_archetypes()) {
        for (std::size_t c = 0; c < a.accuracy.size(); ++c) {
            text += a.name + "," + std::to_string(c) + "," + io::format_double(a.accuracy[c]) + "," +
                    io::format_double(a.mean_response[c]) + "," + io::format_double(a.variance[c]) + "\n";
        }
    }
    io::write_text(path, text);
    const auto loaded = load_archetypes(path);
    REQUIRE(loaded.size() == default_archetypes().size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].name == default_archetypes()[i].name);
        CHECK(loaded[i].accuracy == default_archetypes()[i].accuracy);
        CHECK(loaded[i].mean_response == default_archetypes()[i].mean_response);
    }
    CHECK(default_archetypes()[0].accuracy[0] == 0.90);
    CHECK(default_archetypes()[0].mean_response[0] == 17.78);

    io::write_text(path, "archetype,column,accuracy\n42,0,0.9\n");
    CHECK_THROWS_AS(load_archetypes(path), ConfigError);
    io::write_text(path, "archetype,column,accuracy,mean_response,variance\n42,0,1.4,10,4\n");
    CHECK_THROWS_AS(load_archetypes(path), ConfigError);
    CHECK_THROWS_AS(load_archetypes(scratch("missing.csv")), ConfigError);
}

TEST_CASE("perfect workers give perfect accuracy") {
    SimConfig c = small(Policy::bbs);
    auto pop = generate_population(c);
    for (auto& t : pop.truth) std::ranges::fill(t.accuracy, 1.0);
    for (auto& w : pop.workers) {
        for (auto& [_, p] : w.profiles) p.accuracy = p.qualification_accuracy = 1.0;
    }
    const auto r = run(c, pop);
    CHECK(r.completed == c.tasks);
    CHECK(r.avg_accuracy == 1.0);
}

TEST_CASE("no workers") {
    SimConfig c = small(Policy::bbs);
    c.workers = 0;
    c.horizon = 5000.0;
    for (auto p : kPolicies) {
        c.policy = p;
        const auto r = run(c);
        CHECK(r.completed == 0);
        CHECK(r.max_latency == 5000.0);
        CHECK(r.counters.issued == 0);
    }
}

TEST_CASE("trace invariants hold under every policy") {
    for (auto policy : kPolicies) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            for (double skip : {0.0, 0.2}) {
                CAPTURE(policy_name(policy));
                CAPTURE(seed);
                SimConfig c = small(policy, seed);
                c.skip_probability = skip;
                const auto r = run(c);
                CHECK(r.counters.conserved());
                CHECK(r.counters.outstanding == 0);
                CHECK(r.completed == c.tasks);
                CHECK(r.avg_accuracy >= 0.0);
                CHECK(r.avg_accuracy <= 1.0);
                CHECK(r.max_latency >= 0.0);
                if (skip == 0.0) CHECK(r.counters.skipped == 0);
                std::size_t answered = 0;
                for (const auto& rec : r.records) {
                    answered += rec.answers;
                    if (!rec.finish) continue;
                    CHECK(*rec.finish >= rec.start);
                    REQUIRE(rec.expected_accuracy);
                    if (policy != Policy::icrowd) {
                        CHECK(*rec.expected_accuracy >= rec.quality);
                        CHECK(rec.answers % 2 == 1);
                    } else {
                        CHECK(rec.answers == c.icrowd_k);
                    }
                }
                CHECK(answered == r.counters.answered);
                if (policy == Policy::bbs || policy == Policy::fgreedy || policy == Policy::icrowd) {
                    CHECK(r.counters.rounds > 0);
                }
            }
        }
    }
}

TEST_CASE("identical configs give identical output") {
    for (auto policy : kPolicies) {
        const auto a = run(small(policy, 4));
        const auto b = run(small(policy, 4));
        CHECK(metrics_row(a) == metrics_row(b));
        CHECK(trace_csv(a) == trace_csv(b));
    }
}

TEST_CASE("horizon cuts off unfinished work") {
    SimConfig c = small(Policy::bbs);
    c.horizon = 60.0;
    const auto r = run(c);
    CHECK(r.completed < c.tasks);
    CHECK(r.max_latency == 60.0);
    CHECK(r.counters.conserved());
}

TEST_CASE("metrics csv layout") {
    const auto r = run(small(Policy::rbs));
    CHECK(metrics_header() == "seed,policy,m,n,L,qlo,qhi,max_latency,avg_accuracy,throughput\n");
    const auto row = metrics_row(r);
    CHECK(row.starts_with("1,RBS,120,15,3,0.8,0.85,"));
    CHECK(std::ranges::count(row, ',') == 9);
    const auto trace = trace_csv(r);
    CHECK(std::ranges::count(trace, '\n') == 121);
}

TEST_CASE("precision and recall on a five-worker fixture") {
    // Workers 1..5; 2 and 4 act in the window. Predict 1, 2, 3.
    const std::vector predicted{WorkerId(1), WorkerId(2), WorkerId(3)};
    const std::vector active{WorkerId(2), WorkerId(4)};
    const auto pr = precision_recall(predicted, active);
    CHECK(pr.precision == doctest::Approx(1.0 / 3.0));
    REQUIRE(pr.recall);
    CHECK(*pr.recall == doctest::Approx(0.5));

    const auto exact = precision_recall(active, active);
    CHECK(exact.precision == 1.0);
    CHECK(*exact.recall == 1.0);
    CHECK_FALSE(precision_recall(predicted, {}).recall);
    CHECK(precision_recall({}, active).precision == 0.0);
}

TEST_CASE("notification evaluation") {
    const auto social = generate_social_log({});
    CHECK(social.graph.symmetric());
    CHECK(social.cold_start.size() == 20);

    SUBCASE("self-only mixture reproduces plain KDE") {
        NotifyEvalOptions opt;
        opt.methods = {NotifyMethod::skde, NotifyMethod::kde};
        opt.fixed_weights = std::vector{1.0, 0.0, 0.0};
        const auto rows = run_notification_eval(social.log, social.graph, opt);
        const std::size_t F = opt.fractions.size();
        for (std::size_t i = 0; i < F; ++i) {
            CHECK(rows[i].precision == rows[F + i].precision);
            CHECK(rows[i].recall == rows[F + i].recall);
        }
    }
    SUBCASE("random guessing matches its analytic expectation") {
        double recall = 0.0, precision = 0.0, base = 0.0, share = 0.0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            NotifyEvalOptions opt;
            opt.methods = {NotifyMethod::random};
            opt.fractions = {0.1, 1.0};
            opt.seed = seed;
            const auto rows = run_notification_eval(social.log, social.graph, opt);
            precision += rows[0].precision;
            recall += rows[0].recall;
            // Predicting everyone measures the base rate N_a / W directly.
            base += rows[1].precision;
            share += static_cast<double>(rows[0].predicted) / static_cast<double>(rows[1].predicted);
        }
        CHECK(recall / 20 == doctest::Approx(share / 20).epsilon(0.2));
        CHECK(precision / 20 == doctest::Approx(base / 20).epsilon(0.2));
    }
    SUBCASE("bad input") {
        CHECK_THROWS_AS(run_notification_eval({}, social.graph), ConfigError);
        NotifyEvalOptions opt;
        opt.fractions = {0.0};
        CHECK_THROWS_AS(run_notification_eval(social.log, social.graph, opt), ConfigError);
    }
}
