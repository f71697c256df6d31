#include <doctest.h>

#include <cmath>
#include <random>

#include "frog/errors.hpp"
#include "frog/profiling.hpp"

using namespace frog;
using namespace frog::profiling;

namespace {

QualificationRecord record(std::uint32_t worker, std::vector<int> answers, std::vector<int> truth,
                           std::vector<double> difficulties = {}) {
    return {WorkerId(worker), 0, std::move(answers), std::move(truth), std::move(difficulties)};
}

Task task_with(std::initializer_list<int> choices, int R = 2) {
    auto t = Task::make(TaskId(0), 0, 0.8, 0.0, R);
    std::uint32_t w = 0;
    for (int c : choices) t.add_answer({WorkerId(w++), t.id, c, 1.0, 1.0});
    return t;
}

} // namespace

TEST_CASE("initial accuracy") {
    CHECK(initial_accuracy(record(0, {1, 1, 1, 1, 0}, {1, 1, 1, 1, 1})).value == doctest::Approx(0.8));
    CHECK(initial_accuracy(record(0, {1, 1, 1, 1, 1}, {1, 1, 1, 1, 1})).value == 1.0);
    const auto flipped = initial_accuracy(record(0, {1, 1, 0, 0, 0}, {1, 1, 1, 1, 1}));
    CHECK(raw_initial_accuracy(record(0, {1, 1, 0, 0, 0}, {1, 1, 1, 1, 1})) == doctest::Approx(0.4));
    CHECK(flipped.value == doctest::Approx(0.6));
    CHECK(flipped.flipped);
    CHECK_THROWS_AS(initial_accuracy(record(0, {}, {})), EmptyTest);
    CHECK_THROWS_AS(initial_accuracy(record(0, {1}, {1, 0})), DomainError);
}

TEST_CASE("testing task difficulty") {
    const std::vector acc{0.9, 0.6};
    CHECK(testing_task_difficulty(acc, {true, false}) == doctest::Approx(0.6));
    CHECK(testing_task_difficulty(acc, {false, false}) == 0.0);
    CHECK(testing_task_difficulty(acc, {true, true}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(testing_task_difficulty(std::vector<double>{}, {}), EmptyCohort);
}

TEST_CASE("testing task difficulty is bounded and monotone in wrong flags") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 8;
        std::vector<double> acc(n);
        std::vector<bool> wrong(n);
        for (std::size_t j = 0; j < n; ++j) {
            acc[j] = u(rng);
            wrong[j] = rng() % 2 == 0;
        }
        const double before = testing_task_difficulty(acc, wrong);
        CHECK(before >= 0.0);
        CHECK(before <= 1.0 + 1e-12);
        const std::size_t j = rng() % n;
        if (wrong[j]) continue;
        wrong[j] = true;
        CHECK(testing_task_difficulty(acc, wrong) > before);
    }
}

TEST_CASE("weighted accuracy") {
    CHECK(weighted_accuracy(record(0, {1, 1, 1, 1, 0}, {1, 1, 1, 1, 1}, {1, 1, 1, 1, 1})).value ==
          doctest::Approx(0.8));
    CHECK(weighted_accuracy(record(0, {1, 0, 0, 0, 0}, {1, 1, 1, 1, 1}, {1, 0, 0, 0, 0})).value == 1.0);
    CHECK(weighted_accuracy(record(0, {1, 0}, {1, 1}, {0.6, 0.4})).value == doctest::Approx(0.6));
    CHECK_THROWS_AS(weighted_accuracy(record(0, {1, 0}, {1, 1}, {0.0, 0.0})), DegenerateWeights);
}

TEST_CASE("uniform difficulty weights reproduce the plain fraction") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        std::vector<int> a(n), g(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = static_cast<int>(rng() % 2);
            g[i] = static_cast<int>(rng() % 2);
        }
        // Power-of-two weights make the equality exact in floating point;
        // any other constant weight agrees to rounding.
        const double dyadic = std::ldexp(1.0, -static_cast<int>(rng() % 4));
        CHECK(raw_weighted_accuracy(record(0, a, g, std::vector<double>(n, dyadic))) ==
              raw_initial_accuracy(record(0, a, g)));
        const double w = 0.1 + static_cast<double>(rng() % 9) / 10.0;
        CHECK(raw_weighted_accuracy(record(0, a, g, std::vector<double>(n, w))) ==
              doctest::Approx(raw_initial_accuracy(record(0, a, g))).epsilon(1e-15));
    }
}

TEST_CASE("cohort calibration") {
    SUBCASE("single perfect worker") {
        const std::vector recs{record(0, {1, 0, 1}, {1, 0, 1})};
        const auto c = calibrate_cohort(recs);
        CHECK(c.accuracies[0].value == 1.0);
        for (double b : c.difficulties.at(0)) CHECK(b == 0.0);
    }
    SUBCASE("identical workers reach the fixed point at once") {
        const std::vector recs{record(0, {1, 1, 1, 0}, {1, 0, 1, 0}), record(1, {1, 1, 1, 0}, {1, 0, 1, 0})};
        // Identical answers make every difficulty 0 or 1 whatever the accuracies.
        const auto one = calibrate_cohort(recs, kCalibrationTolerance, 1);
        const auto two = calibrate_cohort(recs, kCalibrationTolerance, 2);
        CHECK(one.difficulties == two.difficulties);
        CHECK(two.raw_accuracies[0] == two.raw_accuracies[1]);
        const auto full = calibrate_cohort(recs);
        CHECK(full.converged);
        CHECK(full.iterations == 3);
        CHECK(full.raw_accuracies == two.raw_accuracies);
    }
    SUBCASE("crafted three-worker cohort") {
        // Reference values frozen from an independent run of the alternation.
        const std::vector recs{record(0, {1, 1, 1}, {1, 0, 1}), record(1, {0, 0, 1}, {1, 0, 1}),
                               record(2, {1, 1, 0}, {1, 0, 1})};
        const auto c = calibrate_cohort(recs);
        CHECK(c.converged);
        CHECK(c.iterations == 55);
        const std::vector raw{0.5320891133245778, 0.6527032178828938, 0.3472967821171062};
        const std::vector beta{0.42602170605243156, 0.5739782939475685, 0.22668184186981447};
        for (std::size_t j = 0; j < 3; ++j) CHECK(c.raw_accuracies[j] == doctest::Approx(raw[j]).epsilon(1e-6));
        for (std::size_t i = 0; i < 3; ++i) CHECK(c.difficulties.at(0)[i] == doctest::Approx(beta[i]).epsilon(1e-6));
        CHECK(c.accuracies[2].flipped);
        CHECK(c.accuracies[2].value == doctest::Approx(1.0 - raw[2]).epsilon(1e-6));
    }
}

TEST_CASE("accuracy update") {
    std::vector<RecentOutcome> recent(10, {1, 1});
    recent[0] = {0, 1};
    CHECK(update_accuracy(0.8, 10, recent).value == doctest::Approx(0.85));

    std::vector<RecentOutcome> matching(10, {1, 1});
    for (int i = 0; i < 2; ++i) matching[static_cast<std::size_t>(i)] = {0, 1};
    CHECK(update_accuracy(0.8, 25, matching).value == doctest::Approx(0.8));
    CHECK(update_accuracy(0.8, 1000000000, recent).value == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(update_accuracy(0.8, 10, std::vector<RecentOutcome>{}).value == 0.8);
}

TEST_CASE("accuracy update stays between anchor and recent rate") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.5001, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double anchor = u(rng);
        const std::size_t k = 1 + rng() % 20;
        std::vector<RecentOutcome> recent(k);
        std::size_t correct = 0;
        for (auto& r : recent) {
            r = {static_cast<int>(rng() % 2), 1};
            correct += r.answer == 1;
        }
        const double rate = static_cast<double>(correct) / static_cast<double>(k);
        const auto out = update_accuracy(anchor, 1 + rng() % 30, recent);
        CHECK(out.value > 0.5);
        CHECK(out.value <= 1.0);
        if (!out.flipped) {
            CHECK(out.value >= std::min(anchor, rate) - 1e-12);
            CHECK(out.value <= std::max(anchor, rate) + 1e-12);
        }
    }
}

TEST_CASE("response-time prediction") {
    const std::vector<ResponseSample> flat{{0, 10}, {1, 10}, {2, 10}};
    CHECK(predict_response_time(flat, 3, 3.0) == doctest::Approx(10.0));
    const std::vector<ResponseSample> rising{{0, 10}, {1, 12}};
    CHECK(predict_response_time(rising, 2, 2.0) == doctest::Approx(14.0));
    const std::vector<ResponseSample> same_time{{0, 10}, {0, 20}};
    CHECK(predict_response_time(same_time, 2, 1.0) == doctest::Approx(15.0));
    const std::vector<ResponseSample> single{{5, 7}};
    CHECK(predict_response_time(single, 3, 100.0) == 7.0);
    const std::vector<ResponseSample> falling{{0, 10}, {1, 5}};
    CHECK(predict_response_time(falling, 2, 10.0) == kMinPredictedResponse);
    CHECK_THROWS_AS(predict_response_time(std::vector<ResponseSample>{}, 3, 0.0), NoHistory);
}

TEST_CASE("least squares reproduces affine series") {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double slope = u(rng);
        const double intercept = 50.0 + 10.0 * u(rng);
        std::vector<ResponseSample> h;
        double t = 0.0;
        for (int i = 0; i < 8; ++i) {
            t += 1.0 + std::abs(u(rng));
            h.push_back({t, intercept + slope * t});
        }
        const double at = t + 3.0;
        CHECK(predict_response_time(h, 5, at) == doctest::Approx(intercept + slope * at).epsilon(1e-9));
    }
}

TEST_CASE("recent sample count") {
    std::vector<ResponseSample> h;
    for (int i = 0; i < 100; ++i) h.push_back({i * 60.0, 10.0});
    CHECK(recent_sample_count(h, 99 * 60.0) == 16);
    CHECK(recent_sample_count(h, 99 * 60.0 + 5000.0) == 3);
    const std::vector<ResponseSample> two{{0, 1}, {1, 1}};
    CHECK(recent_sample_count(two, 1.0) == 2);
    std::vector<ResponseSample> dense;
    for (int i = 0; i < 200; ++i) dense.push_back({i * 1.0, 10.0});
    CHECK(recent_sample_count(dense, 199.0) == 50);
}

TEST_CASE("task difficulty") {
    const std::vector eq(4, 0.8);
    auto split = task_with({0, 0, 1, 1});
    CHECK(task_difficulty(split, eq).difficulty == 1.0);
    auto same = task_with({1, 1, 1, 1});
    CHECK(task_difficulty(same, eq).difficulty == doctest::Approx(0.01));
    auto skipped = task_with({kSkip, kSkip});
    const auto d = task_difficulty(skipped, std::vector(2, 0.8));
    CHECK(d.difficulty == 1.0);
    CHECK(d.skips + d.answered == d.assignees);

    auto none = Task::make(TaskId(0), 0, 0.8, 0.0);
    CHECK_THROWS_AS(task_difficulty(none, std::vector<double>{}), NoAssignees);
}

TEST_CASE("difficulty entropy peaks at equal masses") {
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> u(0.55, 0.95);
    for (int trial = 0; trial < 200; ++trial) {
        const int R = 2 + static_cast<int>(rng() % 3);
        auto t = Task::make(TaskId(0), 0, 0.8, 0.0, R);
        std::vector<double> acc;
        for (std::uint32_t j = 0; j < 2 + rng() % 6; ++j) {
            t.add_answer({WorkerId(j), t.id, static_cast<int>(rng() % R), 1.0, 1.0});
            acc.push_back(u(rng));
        }
        const auto e = task_difficulty(t, acc);
        CHECK(e.entropy >= 0.0);
        CHECK(e.entropy <= std::log(R) + 1e-12);
        CHECK(e.difficulty > 0.0);
        CHECK(e.difficulty <= 1.0);
        CHECK(e.skips + e.answered == e.assignees);
    }
    // R voters with equal accuracy, one per choice: the maximum.
    auto t = Task::make(TaskId(0), 0, 0.8, 0.0, 3);
    for (std::uint32_t j = 0; j < 3; ++j) t.add_answer({WorkerId(j), t.id, static_cast<int>(j), 1.0, 1.0});
    CHECK(task_difficulty(t, std::vector(3, 0.7)).entropy == doctest::Approx(std::log(3.0)));
}
