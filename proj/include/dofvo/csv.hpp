#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace dofvo::csv {

/// One data row with its 1-based line number in the source file.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Reads comma-separated rows, skipping blank lines and lines starting with '#'.
/// If `skip_header` is set, the first non-comment line is dropped as well.
std::vector<Row> read_rows(const std::filesystem::path& path, bool skip_header = false);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Strict conversions; throw data_error naming `path:line` on failure.
std::int64_t to_int64(const std::string& s, const std::filesystem::path& path, std::size_t line);
double to_double(const std::string& s, const std::filesystem::path& path, std::size_t line);

/// `%.<digits>g` formatting.
std::string format_double(double v, int significant_digits = 17);

std::ofstream open_for_write(const std::filesystem::path& path);

}  // namespace dofvo::csv
