#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "shsim/model.hpp"

namespace shsim {

using TaskId = std::string;
using ScenarioId = std::string;

struct TaskAction {
  DeviceId device;
  SensorId sensor;
  SensorValue value;

  bool operator==(const TaskAction&) const = default;
};

// absolute_time is only honoured for standalone firing; scenarios reuse the
// action and ignore it.
struct ScheduledTask {
  TaskId id;
  std::string name;
  TaskAction action;
  std::optional<WallTime> absolute_time;

  bool operator==(const ScheduledTask&) const = default;
};

struct TaskRef {
  TaskId id;
  bool operator==(const TaskRef&) const = default;
};

struct ScenarioRef {
  ScenarioId id;
  bool operator==(const ScenarioRef&) const = default;
};

struct ScenarioEntry {
  std::int64_t delay_ms = 0;
  std::variant<TaskRef, ScenarioRef> target;

  bool operator==(const ScenarioEntry&) const = default;
};

struct Scenario {
  ScenarioId id;
  std::string name;
  WallTime first_time{};
  std::optional<std::int64_t> repeat_ms;
  bool enabled = true;
  std::vector<ScenarioEntry> entries;

  bool operator==(const Scenario&) const = default;
};

struct Schedule {
  std::vector<ScheduledTask> tasks;
  std::vector<Scenario> scenarios;

  /// Registers a task, or replaces the one with `id` when given and present.
  TaskId define_task(const House& house, std::string name, TaskAction action,
                     std::optional<WallTime> absolute_time,
                     std::optional<TaskId> id = std::nullopt);

  /// Registers (enabled) or redefines a scenario. Rejects anything that would
  /// make the inclusion graph cyclic; the error entity is the cycle path.
  ScenarioId define_scenario(std::string name, WallTime first_time,
                             std::optional<std::int64_t> repeat_ms,
                             std::vector<ScenarioEntry> entries,
                             std::optional<ScenarioId> id = std::nullopt);

  const ScheduledTask* find_task(std::string_view id) const;
  const Scenario* find_scenario(std::string_view id) const;
  std::optional<std::size_t> scenario_index(std::string_view id) const;

  bool operator==(const Schedule&) const = default;
};

/// Checks a task action against the house; nullopt when it resolves and the
/// value fits the sensor's format.
std::optional<Violation> check_action(const House& house, const TaskAction& action,
                                      std::string_view owner);

/// First cycle in the scenario inclusion graph as a closed path
/// (e.g. {"b", "a", "b"}), or nullopt when acyclic.
std::optional<std::vector<ScenarioId>> find_inclusion_cycle(const Schedule& schedule);

std::string format_cycle(const std::vector<ScenarioId>& path);

std::vector<Violation> validate_schedule(const House& house, const Schedule& schedule);

}  // namespace shsim
