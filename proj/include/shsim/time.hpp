#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace shsim {

// Milliseconds since the run's simulation epoch.
using VirtualTime = std::int64_t;

using WallTime = std::chrono::sys_time<std::chrono::milliseconds>;

/// Parses `YYYY-MM-DDTHH:MM:SS[.mmm]Z`. Only the canonical form is accepted:
/// the fraction, when present, is exactly three digits and not `.000`.
std::optional<WallTime> parse_iso8601(std::string_view text);

/// Inverse of parse_iso8601 for years 0000..9999.
std::string format_iso8601(WallTime t);

constexpr VirtualTime to_virtual(WallTime epoch, WallTime t) {
  return (t - epoch).count();
}

constexpr WallTime to_wall(WallTime epoch, VirtualTime v) {
  return epoch + std::chrono::milliseconds{v};
}

}  // namespace shsim
