#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mna {

/// Significant digits used for every floating-point value written to disk.
inline constexpr int kOutputPrecision = 12;

/// Locale-independent, shortest of fixed/scientific at 12 significant digits.
std::string format_double(double value);

// Whole-string parses; nullopt on trailing garbage, sign errors or overflow.
std::optional<double> parse_double(std::string_view text);
std::optional<std::uint64_t> parse_u64(std::string_view text);
std::optional<std::int64_t> parse_i64(std::string_view text);

}  // namespace mna
