#include "dofvo/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "dofvo/error.hpp"

namespace dofvo::csv {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

}  // namespace

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::vector<Row> read_rows(const std::filesystem::path& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path.string());
  std::vector<Row> rows;
  std::string line;
  std::size_t number = 0;
  bool header_pending = skip_header;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    rows.push_back({number, split(t)});
  }
  return rows;
}

std::int64_t to_int64(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw data_error("malformed integer '" + s + "' at " + where(path, line));
  }
  return v;
}

double to_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  // from_chars for double is missing from older libstdc++; strtod is locale-bound but C-locale here.
  if (s.empty()) throw data_error("empty numeric field at " + where(path, line));
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw data_error("malformed number '" + s + "' at " + where(path, line));
  return v;
}

std::string format_double(double v, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw data_error("cannot write " + path.string());
  return out;
}

}  // namespace dofvo::csv
