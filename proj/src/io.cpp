#include "frog/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "frog/errors.hpp"

namespace frog::io {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path.string(), "cannot write file");
    out << text;
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path,
                             std::initializer_list<std::string_view> header) {
    std::istringstream in(read_text(path));
    const std::string key = path.filename().string();
    std::string line;
    std::size_t number = 0;
    bool seen_header = false;
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        if (!seen_header) {
            if (!std::equal(fields.begin(), fields.end(), header.begin(), header.end())) {
                std::string expected;
                for (auto h : header) expected += (expected.empty() ? "" : ",") + std::string(h);
                throw ConfigError(key, "expected header '" + expected + "'");
            }
            seen_header = true;
            continue;
        }
        if (fields.size() != header.size()) {
            throw ConfigError(key + ":" + std::to_string(number), "wrong number of fields");
        }
        rows.push_back({number, std::move(fields)});
    }
    if (!seen_header) throw ConfigError(key, "file is empty");
    return rows;
}

double parse_double(std::string_view text, const std::string& key) {
    double v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError(key, "not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::int64_t parse_int(std::string_view text, const std::string& key) {
    std::int64_t v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError(key, "not an integer: '" + std::string(text) + "'");
    }
    return v;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

namespace {

WorkerId parse_worker(std::string_view text, const std::string& key) {
    const auto v = parse_int(text, key);
    if (v < 0 || v > static_cast<std::int64_t>(UINT32_MAX)) {
        throw ConfigError(key, "worker id out of range");
    }
    return WorkerId(static_cast<std::uint32_t>(v));
}

std::string where(const std::filesystem::path& path, const CsvRow& row) {
    return path.filename().string() + ":" + std::to_string(row.line);
}

} // namespace

sim::ActivityLog read_events(const std::filesystem::path& path) {
    sim::ActivityLog log;
    for (const auto& row : read_csv(path, {"worker_id", "timestamp_epoch_seconds"})) {
        const auto key = where(path, row);
        log[parse_worker(row.fields[0], key)].push_back(parse_double(row.fields[1], key));
    }
    for (auto& [_, ts] : log) std::ranges::sort(ts);
    return log;
}

std::string events_csv(const sim::ActivityLog& log) {
    std::string out = "worker_id,timestamp_epoch_seconds\n";
    for (const auto& [w, ts] : log) {
        for (double t : ts) out += std::to_string(w.value) + "," + format_double(t) + "\n";
    }
    return out;
}

notification::FriendGraph read_friends(const std::filesystem::path& path) {
    notification::FriendGraph graph;
    for (const auto& row : read_csv(path, {"worker_id_a", "worker_id_b"})) {
        const auto key = where(path, row);
        graph.add_edge(parse_worker(row.fields[0], key), parse_worker(row.fields[1], key));
    }
    return graph;
}

std::string friends_csv(const notification::FriendGraph& graph) {
    std::string out = "worker_id_a,worker_id_b\n";
    for (const auto& [a, fs] : graph.adjacency()) {
        for (auto b : fs) {
            if (a < b) out += std::to_string(a.value) + "," + std::to_string(b.value) + "\n";
        }
    }
    return out;
}

std::vector<profiling::QualificationRecord> read_qualification(const std::filesystem::path& path) {
    using Key = std::pair<WorkerId, CategoryIndex>;
    std::map<Key, std::map<std::int64_t, std::pair<int, int>>> grouped;
    for (const auto& row : read_csv(path, {"worker_id", "category", "task_index", "answer",
                                           "ground_truth"})) {
        const auto key = where(path, row);
        const auto worker = parse_worker(row.fields[0], key);
        const auto category = parse_int(row.fields[1], key);
        if (category < 0) throw ConfigError(key, "negative category");
        const auto index = parse_int(row.fields[2], key);
        const int answer = static_cast<int>(parse_int(row.fields[3], key));
        const int truth = static_cast<int>(parse_int(row.fields[4], key));
        auto& tasks = grouped[{worker, static_cast<CategoryIndex>(category)}];
        if (!tasks.emplace(index, std::pair{answer, truth}).second) {
            throw ConfigError(key, "duplicate task_index for this worker and category");
        }
    }
    std::vector<profiling::QualificationRecord> records;
    for (const auto& [k, tasks] : grouped) {
        profiling::QualificationRecord r;
        r.worker = k.first;
        r.category = k.second;
        for (const auto& [_, at] : tasks) {
            r.answers.push_back(at.first);
            r.ground_truth.push_back(at.second);
        }
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace frog::io
