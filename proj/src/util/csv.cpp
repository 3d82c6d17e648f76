#include "util/csv.hpp"

#include <charconv>
#include <fstream>

#include "periocular/error.hpp"

namespace periocular::csv {

std::vector<std::string> split_row(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (!have_header) {
      // tolerate a UTF-8 byte order mark
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      table.header = split_row(line);
      have_header = true;
      continue;
    }
    table.rows.push_back(split_row(line));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw FormatError(path.string() + ": missing header row");
  return table;
}

double parse_double(const std::string& field, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw FormatError("cannot parse " + std::string(what) + " from '" + field + "'");
  return value;
}

long parse_long(const std::string& field, std::string_view what) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw FormatError("cannot parse " + std::string(what) + " from '" + field + "'");
  return value;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace periocular::csv
