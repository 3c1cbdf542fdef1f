#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shsim/time.hpp"

namespace shsim::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// `1h`, `90m`, `1h30m`, `45s`, `250ms`; or an ISO-8601 datetime resolved
/// through `epoch`. Result must be positive.
std::optional<VirtualTime> parse_horizon(std::string_view text, WallTime epoch);

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err);

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shsim::cli
