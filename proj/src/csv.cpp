#include "rfr/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "rfr/errors.hpp"

namespace rfr::csv {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

Table read(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  Table table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!have_header) {
      if (t.front() == '#') {
        table.comments.push_back(trim(std::string_view(t).substr(1)));
        continue;
      }
      table.header = split(t);
      if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0)
        table.header[0].erase(0, 3);  // UTF-8 BOM
      if (!expected_header.empty() && table.header != expected_header) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": header '" +
                        join(table.header) + "' does not match expected '" +
                        join(expected_header) + "'");
      }
      have_header = true;
      continue;
    }
    Row row{lineno, split(t)};
    if (row.fields.size() != table.header.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(row.fields.size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw DataError(path.string() + ": missing header row");
  return table;
}

double parse_double(std::string_view text, std::size_t line, std::string_view field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(line) + ": malformed " + std::string(field) +
                    " '" + std::string(text) + "'");
  }
  return v;
}

long long parse_int(std::string_view text, std::size_t line, std::string_view field) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    // Accept integral values written in floating form, e.g. "61000000.0".
    const double d = parse_double(text, line, field);
    if (d != std::floor(d)) {
      throw DataError("line " + std::to_string(line) + ": non-integral " + std::string(field) +
                      " '" + std::string(text) + "'");
    }
    return static_cast<long long>(d);
  }
  return v;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace rfr::csv
