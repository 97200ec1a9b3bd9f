#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dfs::text {

std::string read_file(const std::filesystem::path& path);

// Splits one line on `sep`. No quoting: none of the file schemas need it.
std::vector<std::string_view> split(std::string_view line, char sep = ',');

std::vector<std::string_view> lines(std::string_view text);

std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest representation that round-trips to the same double.
std::string format_double(double value);

// Fixed precision, for human-facing report columns.
std::string format_fixed(double value, int digits);

}  // namespace dfs::text
