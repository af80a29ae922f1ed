#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mwtp::text {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

/// Whole-token decimal parse; rejects trailing garbage, inf and nan.
std::optional<double> parse_number(std::string_view token);

std::string_view trim(std::string_view s);

/// Split on runs of spaces/tabs.
std::vector<std::string_view> split_ws(std::string_view s);

/// Split into lines, dropping a trailing '\r' from each.
std::vector<std::string_view> lines(std::string_view body);

bool starts_with(std::string_view s, std::string_view prefix);

} // namespace mwtp::text
