#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace critbus::text {

/// Whitespace-split tokens of one line with any '#' comment removed.
std::vector<std::string_view> tokenize(std::string_view line);

/// Locale-independent decimal parse of the whole token.
std::optional<double> parse_double(std::string_view token);
std::optional<int> parse_int(std::string_view token);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::vector<std::string_view> split_lines(std::string_view text);

std::string read_file(const std::string &path);

}  // namespace critbus::text
