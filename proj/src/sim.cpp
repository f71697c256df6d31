#include "frog/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <queue>

#include "frog/errors.hpp"
#include "frog/io.hpp"
#include "frog/profiling.hpp"
#include "frog/scheduling.hpp"
#include "frog/voting.hpp"

namespace frog::sim {

std::string policy_name(Policy p) {
    switch (p) {
    case Policy::rbs: return "RBS";
    case Policy::bbs: return "BBS";
    case Policy::random: return "RANDOM";
    case Policy::fgreedy: return "fGreedy";
    case Policy::icrowd: return "iCrowd";
    }
    return "?";
}

Policy parse_policy(const std::string& name, std::optional<std::size_t>* k) {
    for (auto p : {Policy::rbs, Policy::bbs, Policy::random, Policy::fgreedy, Policy::icrowd}) {
        if (name == policy_name(p)) return p;
    }
    const std::string prefix = "iCrowd-";
    if (name.starts_with(prefix)) {
        const auto v = io::parse_int(std::string_view(name).substr(prefix.size()), "policy");
        if (v < 1) throw ConfigError("policy", "iCrowd needs k >= 1");
        if (k) *k = static_cast<std::size_t>(v);
        return Policy::icrowd;
    }
    throw ConfigError("policy", "unknown policy '" + name + "'");
}

void SimConfig::validate() const {
    if (categories == 0) throw ConfigError("L", "at least one category is required");
    if (!(quality_low > 0.5 && quality_high < 1.0)) {
        throw ConfigError("q", "quality range must lie inside (0.5, 1)");
    }
    if (quality_low > quality_high) throw ConfigError("q", "lower bound exceeds upper bound");
    if (!(interval > 0.0)) throw ConfigError("interval", "must be positive");
    if (!(skip_probability >= 0.0 && skip_probability < 1.0)) {
        throw ConfigError("skip_probability", "must lie in [0, 1)");
    }
    if (choice_count < 2) throw ConfigError("choices", "at least two choices are required");
    if (!(arrival_rate > 0.0)) throw ConfigError("arrival_rate", "must be positive");
    if (!(horizon > 0.0)) throw ConfigError("horizon", "must be positive");
    if (!(response_variance >= 0.0)) throw ConfigError("response_variance", "must be non-negative");
    if (policy == Policy::icrowd && icrowd_k == 0) throw ConfigError("icrowd_k", "must be positive");
}

const std::vector<Archetype>& default_archetypes() {
    // Accuracy / mean response per category (DED, CWD, BPRV, SAA, ASM).
    static const std::vector<Archetype> table = [] {
        auto make = [](std::string name, std::vector<double> acc, std::vector<double> resp) {
            return Archetype{std::move(name), std::move(acc), std::move(resp),
                             std::vector<double>(5, 4.0)};
        };
        return std::vector<Archetype>{
            make("42", {0.90, 0.91, 0.96, 0.96, 0.87}, {17.78, 13.12, 4.56, 11.45, 10.33}),
            make("57", {0.94, 0.94, 0.99, 0.97, 0.92}, {21.25, 14.52, 4.41, 13.82, 12.48}),
            make("134", {0.78, 0.83, 0.94, 0.87, 0.89}, {15.79, 10.51, 5.15, 11.97, 11.29}),
            make("153", {0.65, 0.74, 0.63, 0.91, 0.87}, {24.06, 12.08, 8.53, 16.75, 9.79}),
            make("155", {0.83, 0.95, 0.92, 0.88, 0.93}, {19.97, 13.04, 5.03, 7.37, 14.38}),
        };
    }();
    return table;
}

std::vector<Archetype> load_archetypes(const std::filesystem::path& path) {
    std::map<std::string, std::map<std::int64_t, std::array<double, 3>>> rows;
    std::vector<std::string> order;
    for (const auto& row : io::read_csv(path, {"archetype", "column", "accuracy", "mean_response",
                                               "variance"})) {
        const auto key = path.filename().string() + ":" + std::to_string(row.line);
        const auto column = io::parse_int(row.fields[1], key);
        const double acc = io::parse_double(row.fields[2], key);
        const double mean = io::parse_double(row.fields[3], key);
        const double var = io::parse_double(row.fields[4], key);
        if (column < 0) throw ConfigError(key, "negative column");
        if (!(acc > 0.5 && acc <= 1.0)) throw ConfigError(key, "accuracy must lie in (0.5, 1]");
        if (!(mean >= kMinResponse)) throw ConfigError(key, "mean response below 0.5 s");
        if (!(var >= 0.0)) throw ConfigError(key, "negative variance");
        if (!rows.contains(row.fields[0])) order.push_back(row.fields[0]);
        if (!rows[row.fields[0]].emplace(column, std::array{acc, mean, var}).second) {
            throw ConfigError(key, "duplicate column");
        }
    }
    if (rows.empty()) throw ConfigError(path.filename().string(), "no archetypes");

    std::vector<Archetype> out;
    std::size_t width = 0;
    for (const auto& name : order) {
        const auto& cols = rows[name];
        Archetype a{name, {}, {}, {}};
        std::int64_t expect = 0;
        for (const auto& [c, v] : cols) {
            if (c != expect++) throw ConfigError(path.filename().string(), "archetype " + name + " has a gap in its columns");
            a.accuracy.push_back(v[0]);
            a.mean_response.push_back(v[1]);
            a.variance.push_back(v[2]);
        }
        if (width == 0) width = cols.size();
        if (cols.size() != width) {
            throw ConfigError(path.filename().string(), "archetypes disagree on column count");
        }
        out.push_back(std::move(a));
    }
    return out;
}

Seconds draw_response(std::mt19937_64& rng, Seconds mean, double variance) {
    if (variance <= 0.0) return std::max(mean, kMinResponse);
    std::normal_distribution<double> normal(mean, std::sqrt(variance));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double x = normal(rng);
        if (x >= kMinResponse) return x;
    }
    return kMinResponse;
}

namespace {

// Independent streams so that, for one seed, changing n leaves the task set
// untouched and vice versa.
std::mt19937_64 stream(std::uint64_t seed, std::uint32_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      purpose};
    return std::mt19937_64(seq);
}

} // namespace

Population generate_population(const SimConfig& config, const std::vector<Archetype>& archetypes) {
    config.validate();
    if (archetypes.empty()) throw ConfigError("archetypes", "no archetypes");
    const std::size_t width = archetypes.front().accuracy.size();

    Population pop;
    const std::size_t L = config.categories;
    pop.category_mean_response.assign(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        double sum = 0.0;
        for (const auto& a : archetypes) sum += a.mean_response[l % width];
        pop.category_mean_response[l] = sum / static_cast<double>(archetypes.size());
    }

    auto wrng = stream(config.seed, 1);
    std::uniform_int_distribution<std::size_t> pick(0, archetypes.size() - 1);
    for (std::size_t j = 0; j < config.workers; ++j) {
        const auto& a = archetypes[pick(wrng)];
        Worker w;
        w.id = WorkerId(static_cast<std::uint32_t>(j));
        WorkerTruth truth;
        for (std::size_t l = 0; l < L; ++l) {
            const std::size_t c = l % width;
            const Seconds mean = draw_response(wrng, a.mean_response[c], a.variance[c]);
            truth.accuracy.push_back(a.accuracy[c]);
            truth.mean_response.push_back(mean);
            truth.variance.push_back(a.variance[c]);
            // The scheduler starts from the real worker's statistics.
            w.subscribe(static_cast<CategoryIndex>(l), a.accuracy[c], a.mean_response[c]);
        }
        pop.workers.push_back(std::move(w));
        pop.truth.push_back(std::move(truth));
    }

    auto trng = stream(config.seed, 2);
    std::uniform_int_distribution<std::size_t> category(0, L - 1);
    std::uniform_real_distribution<double> quality(config.quality_low, config.quality_high);
    std::uniform_int_distribution<int> truth(0, config.choice_count - 1);
    std::exponential_distribution<double> gap(config.arrival_rate);
    Seconds clock = 0.0;
    for (std::size_t i = 0; i < config.tasks; ++i) {
        const auto c = static_cast<CategoryIndex>(category(trng));
        const double q = config.quality_low == config.quality_high ? config.quality_low
                                                                   : quality(trng);
        const int gt = truth(trng);
        if (config.arrival == Arrival::poisson) clock += gap(trng);
        pop.tasks.push_back(Task::make(TaskId(static_cast<std::uint32_t>(i)), c, q, clock,
                                       config.choice_count, gt));
    }
    return pop;
}

Population generate_population(const SimConfig& config) {
    if (config.archetypes.empty()) return generate_population(config, default_archetypes());
    return generate_population(config, load_archetypes(config.archetypes));
}

namespace {

// Observations needed before a category's running mean replaces the prior.
constexpr std::size_t kCategoryWarmup = 5;

class Engine {
public:
    Engine(const SimConfig& config, Population pop)
        : config_(config), pop_(std::move(pop)), rng_(stream(config.seed, 3)) {
        state_.resize(pop_.workers.size());
        sums_.assign(config_.categories, 0.0);
        counts_.assign(config_.categories, 0);
        means_ = pop_.category_mean_response;
        // Tasks are served to the scheduler as an arrived prefix.
        std::ranges::stable_sort(pop_.tasks, {}, &Task::start_time);
        index_of_.resize(pop_.tasks.size());
        for (std::size_t i = 0; i < pop_.tasks.size(); ++i) index_of_[pop_.tasks[i].id.value] = i;
    }

    MetricsReport run();

private:
    enum class Kind : std::uint8_t { arrival, answer, round };

    struct Event {
        Seconds time;
        std::uint64_t seq;
        Kind kind;
        std::uint32_t worker;
        std::uint32_t task;
        std::uint64_t token;

        bool operator>(const Event& o) const {
            return time != o.time ? time > o.time : seq > o.seq;
        }
    };

    struct WorkerState {
        std::deque<std::size_t> queue;
        bool busy{};
        bool waiting{};
        std::size_t current{};
        Seconds started{};
        std::uint64_t token{};
    };

    bool request_based() const {
        return config_.policy == Policy::rbs || config_.policy == Policy::random;
    }

    void push(Seconds t, Kind kind, std::uint32_t worker = 0, std::uint32_t task = 0,
              std::uint64_t token = 0) {
        events_.push({t, seq_++, kind, worker, task, token});
    }

    std::span<const Task> arrived() const {
        return std::span<const Task>(pop_.tasks).first(arrived_);
    }

    scheduling::UrgencyContext context(Seconds now) const {
        return {now, scheduling::max_lapse(arrived(), now), means_};
    }

    void request(std::size_t w, Seconds now);
    void assign(std::size_t task, std::size_t w);
    void start_next(std::size_t w, Seconds now);
    void on_answer(const Event& e);
    void on_round(Seconds now);
    void finish_if_done(std::size_t task, Seconds now, std::vector<std::size_t>& freed);
    void wake(Seconds now);
    Seconds pending_work(std::size_t w, Seconds now) const;
    MetricsReport report() const;

    SimConfig config_;
    Population pop_;
    std::mt19937_64 rng_;
    std::vector<WorkerState> state_;
    std::vector<std::size_t> index_of_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::uint64_t seq_{};
    std::size_t arrived_{};
    std::size_t completed_{};
    Seconds last_finish_{};
    bool wake_pending_{};
    std::vector<double> sums_;
    std::vector<std::size_t> counts_;
    std::vector<Seconds> means_;
    std::vector<std::optional<double>> expected_;
    Counters counters_;
};

void Engine::assign(std::size_t task, std::size_t w) {
    pop_.tasks[task].in_flight.push_back(pop_.workers[w].id);
    state_[w].queue.push_back(task);
    ++counters_.issued;
}

void Engine::request(std::size_t w, Seconds now) {
    auto& ws = state_[w];
    if (ws.busy || !ws.queue.empty() || !pop_.workers[w].online) return;
    std::optional<scheduling::RequestDecision> d;
    if (config_.policy == Policy::rbs) {
        d = scheduling::greedy_request(pop_.workers[w], arrived(), pop_.workers, context(now));
    } else {
        d = scheduling::random_schedule(pop_.workers[w], arrived(), pop_.workers, rng_);
    }
    if (!d) {
        ws.waiting = true;
        return;
    }
    ws.waiting = false;
    assign(d->task_index, w);
    start_next(w, now);
}

void Engine::start_next(std::size_t w, Seconds now) {
    auto& ws = state_[w];
    while (!ws.queue.empty()) {
        const std::size_t t = ws.queue.front();
        ws.queue.pop_front();
        const Task& task = pop_.tasks[t];
        if (!task.is_open()) continue;
        const auto& truth = pop_.truth[w];
        const Seconds duration =
            draw_response(rng_, truth.mean_response[task.category], truth.variance[task.category]);
        ws.busy = true;
        ws.current = t;
        ws.started = now;
        ++ws.token;
        push(now + duration, Kind::answer, static_cast<std::uint32_t>(w),
             static_cast<std::uint32_t>(t), ws.token);
        return;
    }
    ws.busy = false;
    if (request_based()) request(w, now);
}

void Engine::wake(Seconds now) {
    for (std::size_t w = 0; w < state_.size(); ++w) {
        if (state_[w].waiting && !state_[w].busy) request(w, now);
    }
}

void Engine::finish_if_done(std::size_t t, Seconds now, std::vector<std::size_t>& freed) {
    Task& task = pop_.tasks[t];
    if (!task.is_open()) return;
    std::vector<double> acc;
    for (const auto& a : task.answers) {
        if (!a.is_skip()) acc.push_back(pop_.workers[a.worker.value].accuracy(task.category));
    }
    if (acc.empty()) return;
    const double expected =
        voting::expected_accuracy_majority(acc, voting::EvenSizes::formula_as_written);
    const bool done = config_.policy == Policy::icrowd
                          ? acc.size() >= config_.icrowd_k
                          : acc.size() % 2 == 1 && expected >= task.quality_threshold;
    if (!done) return;

    task.complete(now);
    expected_[t] = expected;
    ++completed_;
    last_finish_ = std::max(last_finish_, now);
    for (auto w : task.in_flight) {
        auto& ws = state_[w.value];
        if (ws.busy && ws.current == t) {
            ++ws.token; // drops the pending answer event
            ws.busy = false;
            freed.push_back(w.value);
        } else {
            std::erase(ws.queue, t);
        }
        ++counters_.cancelled;
    }
    task.in_flight.clear();
}

void Engine::on_answer(const Event& e) {
    const std::size_t w = e.worker;
    auto& ws = state_[w];
    if (e.token != ws.token || !ws.busy) return;
    ws.busy = false;

    Task& task = pop_.tasks[e.task];
    const Seconds now = e.time;
    const Seconds duration = now - ws.started;
    Worker& worker = pop_.workers[w];
    const auto cat = task.category;
    std::erase(task.in_flight, worker.id);

    int choice = kSkip;
    std::bernoulli_distribution skip(config_.skip_probability);
    if (!(config_.skip_probability > 0.0 && skip(rng_))) {
        std::bernoulli_distribution correct(pop_.truth[w].accuracy[cat]);
        const int gt = *task.ground_truth;
        if (correct(rng_)) {
            choice = gt;
        } else {
            std::uniform_int_distribution<int> other(0, task.choice_count - 2);
            choice = other(rng_);
            if (choice >= gt) ++choice;
        }
    }
    task.add_answer({worker.id, task.id, choice, now, now - task.start_time});
    if (choice == kSkip) {
        ++counters_.skipped;
    } else {
        ++counters_.answered;
    }

    // Profiling: response history, category mean, prediction, difficulty.
    worker.record_response(cat, now, duration);
    sums_[cat] += duration;
    if (++counts_[cat] >= kCategoryWarmup) means_[cat] = sums_[cat] / counts_[cat];
    auto& profile = worker.profile(cat);
    if (profile.history.size() >= profiling::RecentWindow{}.min_count) {
        const auto eta = profiling::recent_sample_count(profile.history, now);
        profile.predicted_response = profiling::predict_response_time(profile.history, eta, now);
    }
    std::vector<double> acc;
    for (const auto& a : task.answers) acc.push_back(pop_.workers[a.worker.value].accuracy(cat));
    task.difficulty = profiling::task_difficulty(task, acc).difficulty;

    std::vector<std::size_t> freed{w};
    finish_if_done(e.task, now, freed);
    if (choice == kSkip && request_based()) wake_pending_ = true;
    for (auto f : freed) start_next(f, now);
}

Seconds Engine::pending_work(std::size_t w, Seconds now) const {
    const auto& ws = state_[w];
    const Worker& worker = pop_.workers[w];
    Seconds total = 0.0;
    if (ws.busy) {
        const auto cat = pop_.tasks[ws.current].category;
        total += std::max(0.0, worker.predicted_response(cat) - (now - ws.started));
    }
    for (auto t : ws.queue) total += worker.predicted_response(pop_.tasks[t].category);
    return total;
}

void Engine::on_round(Seconds now) {
    ++counters_.rounds;
    std::vector<Seconds> budgets(pop_.workers.size());
    std::vector<WorkerId> available;
    for (std::size_t w = 0; w < pop_.workers.size(); ++w) {
        budgets[w] = config_.interval - pending_work(w, now);
        if (pop_.workers[w].online) available.push_back(pop_.workers[w].id);
    }
    scheduling::BatchOptions opts;
    opts.interval = config_.interval;
    opts.icrowd_k = config_.icrowd_k;
    opts.rule = config_.policy == Policy::bbs       ? scheduling::BatchRule::min_worker_set
                : config_.policy == Policy::fgreedy ? scheduling::BatchRule::fastest_first
                                                    : scheduling::BatchRule::top_k_accuracy;
    const auto plan =
        scheduling::greedy_batch(arrived(), pop_.workers, available, budgets, context(now), opts);
    for (const auto& [task, worker] : plan.assignment.pairs) {
        assign(index_of_[task.value], worker.value);
    }
    for (std::size_t w = 0; w < state_.size(); ++w) {
        if (!state_[w].busy) start_next(w, now);
    }
    if (completed_ < pop_.tasks.size() && now + config_.interval <= config_.horizon) {
        push(now + config_.interval, Kind::round);
    }
}

MetricsReport Engine::run() {
    expected_.assign(pop_.tasks.size(), std::nullopt);
    for (std::size_t t = 0; t < pop_.tasks.size(); ++t) {
        push(pop_.tasks[t].start_time, Kind::arrival, 0, static_cast<std::uint32_t>(t));
    }
    if (request_based()) {
        for (auto& ws : state_) ws.waiting = true;
    } else if (!pop_.workers.empty()) {
        push(0.0, Kind::round);
    }

    while (!events_.empty() && completed_ < pop_.tasks.size()) {
        const Event e = events_.top();
        if (e.time > config_.horizon) break;
        events_.pop();
        switch (e.kind) {
        case Kind::arrival:
            arrived_ = std::max<std::size_t>(arrived_, e.task + 1);
            if (request_based()) wake_pending_ = true;
            break;
        case Kind::answer:
            on_answer(e);
            break;
        case Kind::round:
            on_round(e.time);
            break;
        }
        // Simultaneous events settle before idle workers ask again.
        if (wake_pending_ && (events_.empty() || events_.top().time > e.time)) {
            wake_pending_ = false;
            wake(e.time);
        }
    }
    return report();
}

MetricsReport Engine::report() const {
    MetricsReport r;
    r.seed = config_.seed;
    r.policy = config_.policy;
    r.tasks = config_.tasks;
    r.workers = config_.workers;
    r.categories = config_.categories;
    r.quality_low = config_.quality_low;
    r.quality_high = config_.quality_high;
    r.completed = completed_;
    r.makespan = last_finish_;
    r.counters = counters_;

    std::size_t correct = 0;
    std::vector<TaskRecord> records(pop_.tasks.size());
    for (std::size_t t = 0; t < pop_.tasks.size(); ++t) {
        const Task& task = pop_.tasks[t];
        r.counters.outstanding += task.in_flight.size();
        TaskRecord rec;
        rec.task = task.id;
        rec.category = task.category;
        rec.quality = task.quality_threshold;
        rec.start = task.start_time;
        rec.finish = task.finish_time;
        rec.answers = task.answered_count();
        rec.skips = task.skip_count;
        rec.ground_truth = task.ground_truth;
        rec.expected_accuracy = expected_[t];
        const Seconds end = task.finish_time.value_or(config_.horizon);
        r.max_latency = std::max(r.max_latency, std::max(0.0, end - task.start_time));
        if (!task.is_open()) {
            rec.aggregated = voting::aggregate(task.answers, voting::Scheme::majority,
                                               {.choice_count = task.choice_count})
                                 .choice;
            if (rec.aggregated && rec.aggregated == task.ground_truth) ++correct;
        }
        records[task.id.value] = rec;
    }
    r.records = std::move(records);
    r.avg_accuracy = completed_ == 0 ? 0.0 : static_cast<double>(correct) / completed_;
    r.throughput = r.makespan > 0.0 ? completed_ / (r.makespan / 3600.0) : 0.0;
    return r;
}

} // namespace

MetricsReport run(const SimConfig& config, Population population) {
    config.validate();
    return Engine(config, std::move(population)).run();
}

MetricsReport run(const SimConfig& config) {
    return run(config, generate_population(config));
}

std::string metrics_header() {
    return "seed,policy,m,n,L,qlo,qhi,max_latency,avg_accuracy,throughput\n";
}

std::string metrics_row(const MetricsReport& r) {
    using io::format_double;
    std::string policy = policy_name(r.policy);
    return std::to_string(r.seed) + "," + policy + "," + std::to_string(r.tasks) + "," +
           std::to_string(r.workers) + "," + std::to_string(r.categories) + "," +
           format_double(r.quality_low) + "," + format_double(r.quality_high) + "," +
           format_double(r.max_latency) + "," + format_double(r.avg_accuracy) + "," +
           format_double(r.throughput) + "\n";
}

std::string trace_csv(const MetricsReport& r) {
    using io::format_double;
    auto opt = [](const auto& v) -> std::string {
        if (!v) return "";
        if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, double>) {
            return format_double(*v);
        } else {
            return std::to_string(*v);
        }
    };
    std::string out =
        "task_id,category,quality,start,finish,latency,answers,skips,expected_accuracy,"
        "aggregated,ground_truth\n";
    for (const auto& rec : r.records) {
        std::optional<double> latency;
        if (rec.finish) latency = *rec.finish - rec.start;
        out += std::to_string(rec.task.value) + "," + std::to_string(rec.category) + "," +
               format_double(rec.quality) + "," + format_double(rec.start) + "," +
               opt(rec.finish) + "," + opt(latency) + "," + std::to_string(rec.answers) + "," +
               std::to_string(rec.skips) + "," + opt(rec.expected_accuracy) + "," +
               opt(rec.aggregated) + "," + opt(rec.ground_truth) + "\n";
    }
    return out;
}

} // namespace frog::sim
