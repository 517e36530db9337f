#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hdh::csv {

/// Splits one CSV record on commas and trims surrounding blanks. No quoting support:
/// every file this library reads or writes is plain numeric CSV.
std::vector<std::string> split(std::string_view line);

/// Parses a decimal number; an empty cell, `NA` or `nan` yields std::nullopt.
std::optional<double> parse_number(std::string_view cell);

/// Shortest text that round-trips the double exactly.
std::string format(double value);

std::ifstream open_in(const std::filesystem::path& path);
std::ofstream open_out(const std::filesystem::path& path);

}  // namespace hdh::csv
