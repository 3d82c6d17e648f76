#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace periocular::csv {

// Plain comma-separated rows; the file formats used here never quote fields.
std::vector<std::string> split_row(std::string_view line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

Table read(const std::filesystem::path& path);

double parse_double(const std::string& field, std::string_view what);
long parse_long(const std::string& field, std::string_view what);

// Shortest round-trip representation.
std::string format_double(double value);

}  // namespace periocular::csv
