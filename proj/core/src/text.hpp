#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bufsim::text {

std::vector<std::string_view> split(std::string_view line, char sep);

std::optional<double> to_double(std::string_view s);
std::optional<std::int64_t> to_int(std::string_view s);
std::optional<std::uint64_t> to_uint(std::string_view s);

/// Fixed-point with `digits` fractional digits ("0.020625000").
std::string fixed(double v, int digits = 9);
/// Shortest representation that round-trips to the same double.
std::string shortest(double v);

std::string_view trim(std::string_view s);

}  // namespace bufsim::text
