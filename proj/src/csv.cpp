#include "htsr/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "htsr/error.hpp"

namespace htsr::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError(fmt::format("missing column '{}'", name));
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    fields.emplace_back(trim(field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

Table parse(std::string_view text, std::string_view source) {
  Table table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  // Strip a UTF-8 byte order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto fields = split_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != table.header.size()) {
        throw ParseError(fmt::format("{}: line {}: expected {} fields, found {}", source, line_no,
                                     table.header.size(), fields.size()));
      }
      table.rows.push_back(std::move(fields));
      table.lines.push_back(line_no);
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw ParseError(fmt::format("{}: empty file", source));
  return table;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Table read(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

double parse_double(std::string_view field, std::string_view what) {
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(fmt::format("{}: '{}' is not a number", what, field));
  }
  return value;
}

long long parse_int(std::string_view field, std::string_view what) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(fmt::format("{}: '{}' is not an integer", what, field));
  }
  return value;
}

std::string format_double(double value) { return fmt::format("{}", value); }

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(fmt::format("write failed for '{}'", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot rename '{}': {}", tmp.string(), ec.message()));
}

}  // namespace htsr::csv
