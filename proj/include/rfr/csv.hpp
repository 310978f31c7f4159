#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rfr::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
  // Leading '#' comment lines, without the marker.
  std::vector<std::string> comments;
};

// Reads a comma-delimited file. Blank lines are skipped; lines starting with
// '#' before the header are collected as comments. Throws DataError if the
// file is missing or the header differs from `expected_header` (when given).
Table read(const std::filesystem::path& path,
           const std::vector<std::string>& expected_header = {});

std::vector<std::string> split(std::string_view line);

double parse_double(std::string_view text, std::size_t line, std::string_view field);
long long parse_int(std::string_view text, std::size_t line, std::string_view field);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

}  // namespace rfr::csv
