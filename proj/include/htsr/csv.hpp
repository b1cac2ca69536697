#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace htsr::csv {

/// A parsed comma-separated file. Quoting is not supported; fields are
/// trimmed of surrounding whitespace.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;

  /// Column position of `name`, throws ParseError when absent.
  std::size_t column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);
Table parse(std::string_view text, std::string_view source = "<memory>");

std::vector<std::string> split_line(std::string_view line);

double parse_double(std::string_view field, std::string_view what);
long long parse_int(std::string_view field, std::string_view what);

/// Shortest representation that round-trips to the same double.
std::string format_double(double value);

/// Writes `content` to `path` through a sibling temporary file and a rename,
/// so readers never observe a partially written file.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace htsr::csv
