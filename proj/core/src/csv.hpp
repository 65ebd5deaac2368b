#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rhythm::detail {

/// Quote a field if it contains a comma, quote or line break.
[[nodiscard]] std::string csv_escape(std::string_view field);

/// Split one CSV record (no embedded line breaks). Handles "" escapes.
[[nodiscard]] std::vector<std::string> csv_split(std::string_view line);

/// 17 significant digits: round-trips every binary64 value.
[[nodiscard]] std::string format_double(double v);

/// Strict full-string parses; throw DataError naming `what` on failure.
[[nodiscard]] double parse_double(const std::string& text, std::string_view what);
[[nodiscard]] long long parse_integer(const std::string& text, std::string_view what);

[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace rhythm::detail
