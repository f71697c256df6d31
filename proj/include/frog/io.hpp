#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "frog/notification.hpp"
#include "frog/profiling.hpp"
#include "frog/sim.hpp"

namespace frog::io {

struct CsvRow {
    std::size_t line{};
    std::vector<std::string> fields;
};

/// Reads a comma-separated file whose first line must equal `header`.
/// Blank lines are skipped. Throws ConfigError keyed by the file name.
std::vector<CsvRow> read_csv(const std::filesystem::path& path,
                             std::initializer_list<std::string_view> header);

std::vector<std::string> split_line(std::string_view line);

double parse_double(std::string_view text, const std::string& key);
std::int64_t parse_int(std::string_view text, const std::string& key);

/// Shortest round-tripping decimal form.
std::string format_double(double value);

/// `worker_id,timestamp_epoch_seconds`
sim::ActivityLog read_events(const std::filesystem::path& path);
std::string events_csv(const sim::ActivityLog& log);

/// `worker_id_a,worker_id_b`, one undirected edge per row.
notification::FriendGraph read_friends(const std::filesystem::path& path);
std::string friends_csv(const notification::FriendGraph& graph);

/// `worker_id,category,task_index,answer,ground_truth`; rows of one
/// (worker, category) pair form one record, ordered by task_index.
std::vector<profiling::QualificationRecord> read_qualification(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

} // namespace frog::io
