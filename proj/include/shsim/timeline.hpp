#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "shsim/project.hpp"

namespace shsim {

enum class SourceKind { Scenario, Task, Remote, Manual };

struct Provenance {
  SourceKind kind = SourceKind::Scenario;
  std::string source_id;
  std::int64_t instance = 0;
  std::vector<std::size_t> entry_path;

  /// `scenario:<id>#<k>@<i.j.k>`, `task:<id>`, `remote:<command id>` or
  /// `manual:<id>`.
  std::string to_string() const;

  bool operator==(const Provenance&) const = default;
};

struct SimEvent {
  VirtualTime fire_time = 0;
  std::uint64_t seq = 0;
  TaskAction action;
  Provenance provenance;

  bool operator==(const SimEvent&) const = default;
};

// One task entry of a scenario with nested scenarios inlined. offset is
// measured from the instance launch.
struct ChainStep {
  VirtualTime offset = 0;
  std::vector<std::size_t> path;
  TaskAction action;
};

std::vector<ChainStep> flatten_scenario(const Schedule& schedule, const Scenario& scenario);

// Total order used to break ties among events with equal fire_time.
struct EventOrderKey {
  VirtualTime fire_time = 0;
  int source_rank = 0;  // scenarios before standalone tasks
  std::size_t definition_index = 0;
  std::int64_t instance = 0;
  std::vector<std::size_t> entry_path;

  auto operator<=>(const EventOrderKey&) const = default;
};

/// Every event with fire_time <= horizon, assuming no runtime toggles and no
/// external commands. seq numbers are 0..n-1 in order.
std::vector<SimEvent> compile_timeline(const Project& project, VirtualTime horizon);

}  // namespace shsim
