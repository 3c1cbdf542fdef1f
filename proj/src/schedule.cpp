#include "shsim/schedule.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace shsim {

namespace {

template <class Taken>
std::string fresh_id(std::string_view base, Taken&& taken) {
  for (std::size_t n = 1;; ++n) {
    std::string candidate = std::string(base) + "-" + std::to_string(n);
    if (!taken(candidate)) return candidate;
  }
}

const ScenarioId* scenario_target(const ScenarioEntry& e) {
  if (const auto* ref = std::get_if<ScenarioRef>(&e.target)) return &ref->id;
  return nullptr;
}

// DFS over the inclusion graph. Returns the closed path of the first cycle
// reachable from `start`.
std::optional<std::vector<ScenarioId>> cycle_from(const Schedule& schedule, const ScenarioId& start) {
  std::vector<ScenarioId> stack;
  std::set<ScenarioId> done;
  std::function<std::optional<std::vector<ScenarioId>>(const ScenarioId&)> visit =
      [&](const ScenarioId& id) -> std::optional<std::vector<ScenarioId>> {
    auto on_stack = std::find(stack.begin(), stack.end(), id);
    if (on_stack != stack.end()) {
      std::vector<ScenarioId> path(on_stack, stack.end());
      path.push_back(id);
      return path;
    }
    if (done.count(id)) return std::nullopt;
    const Scenario* s = schedule.find_scenario(id);
    if (!s) return std::nullopt;
    stack.push_back(id);
    for (const auto& e : s->entries) {
      if (const ScenarioId* child = scenario_target(e)) {
        if (auto cycle = visit(*child)) return cycle;
      }
    }
    stack.pop_back();
    done.insert(id);
    return std::nullopt;
  };
  return visit(start);
}

}  // namespace

std::optional<Violation> check_action(const House& house, const TaskAction& action,
                                      std::string_view owner) {
  const std::string entity(owner);
  const Device* dev = house.find_device(action.device);
  if (!dev) return Violation{ErrorCode::UnknownDevice, entity, "unknown device '" + action.device + "'"};
  const SensorInstance* sensor = dev->find_sensor(action.sensor);
  if (!sensor) {
    return Violation{ErrorCode::UnknownSensor, entity,
                     "device '" + action.device + "' has no sensor '" + action.sensor + "'"};
  }
  const SensorKind* kind = house.find_kind(sensor->kind);
  if (!kind) return Violation{ErrorCode::UnknownSensorKind, entity, "sensor kind '" + sensor->kind + "' missing"};
  if (auto bad = validate_value(kind->format, action.value)) {
    return Violation{ErrorCode::InvalidValue, entity, *bad};
  }
  return std::nullopt;
}

TaskId Schedule::define_task(const House& house, std::string name, TaskAction action,
                             std::optional<WallTime> absolute_time, std::optional<TaskId> id) {
  if (name.empty()) throw Error(ErrorCode::InvalidArgument, "task", "name must be non-empty");
  if (id && !is_safe_id(*id)) throw Error(ErrorCode::InvalidArgument, *id, "task id is not a safe identifier");
  if (auto bad = check_action(house, action, id ? *id : name)) {
    throw Error(bad->code, bad->entity, bad->message);
  }
  ScheduledTask task{id ? *id : fresh_id(slugify(name, "task"), [&](const std::string& c) { return find_task(c); }),
                     std::move(name), std::move(action), absolute_time};
  for (auto& existing : tasks) {
    if (existing.id == task.id) {
      existing = std::move(task);
      return existing.id;
    }
  }
  tasks.push_back(std::move(task));
  return tasks.back().id;
}

ScenarioId Schedule::define_scenario(std::string name, WallTime first_time,
                                     std::optional<std::int64_t> repeat_ms,
                                     std::vector<ScenarioEntry> entries,
                                     std::optional<ScenarioId> id) {
  if (name.empty()) throw Error(ErrorCode::InvalidArgument, "scenario", "name must be non-empty");
  if (id && !is_safe_id(*id)) throw Error(ErrorCode::InvalidArgument, *id, "scenario id is not a safe identifier");
  if (repeat_ms && *repeat_ms <= 0) {
    throw Error(ErrorCode::InvalidArgument, id ? *id : name, "repeat_ms must be positive");
  }
  const ScenarioId new_id =
      id ? *id : fresh_id(slugify(name, "scenario"), [&](const std::string& c) { return find_scenario(c); });

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string entity = new_id + "/entries/" + std::to_string(i);
    if (e.delay_ms < 0) throw Error(ErrorCode::NegativeDelay, entity, "delay must be non-negative");
    if (const auto* t = std::get_if<TaskRef>(&e.target)) {
      if (!find_task(t->id)) throw Error(ErrorCode::UnknownTarget, entity, "unknown task '" + t->id + "'");
    } else {
      const auto& sid = std::get<ScenarioRef>(e.target).id;
      if (sid != new_id && !find_scenario(sid)) {
        throw Error(ErrorCode::UnknownTarget, entity, "unknown scenario '" + sid + "'");
      }
    }
  }

  Scenario scenario{new_id, std::move(name), first_time, repeat_ms, true, std::move(entries)};

  // Check acyclicity on a candidate copy so a rejected definition leaves the
  // schedule untouched.
  Schedule candidate = *this;
  auto slot = std::find_if(candidate.scenarios.begin(), candidate.scenarios.end(),
                           [&](const Scenario& s) { return s.id == new_id; });
  if (slot != candidate.scenarios.end()) {
    scenario.enabled = slot->enabled;
    *slot = scenario;
  } else {
    candidate.scenarios.push_back(scenario);
  }
  if (auto cycle = cycle_from(candidate, new_id)) {
    throw Error(ErrorCode::CycleDetected, format_cycle(*cycle), "scenario inclusion cycle");
  }
  *this = std::move(candidate);
  return new_id;
}

const ScheduledTask* Schedule::find_task(std::string_view id) const {
  for (const auto& t : tasks) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const Scenario* Schedule::find_scenario(std::string_view id) const {
  for (const auto& s : scenarios) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::optional<std::size_t> Schedule::scenario_index(std::string_view id) const {
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (scenarios[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::vector<ScenarioId>> find_inclusion_cycle(const Schedule& schedule) {
  for (const auto& s : schedule.scenarios) {
    if (auto cycle = cycle_from(schedule, s.id)) return cycle;
  }
  return std::nullopt;
}

std::string format_cycle(const std::vector<ScenarioId>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += "->";
    out += path[i];
  }
  return out;
}

std::vector<Violation> validate_schedule(const House& house, const Schedule& schedule) {
  std::vector<Violation> out;
  std::set<std::string_view> task_ids;
  for (const auto& t : schedule.tasks) {
    const std::string entity = "task:" + t.id;
    if (!is_safe_id(t.id)) out.push_back({ErrorCode::InvalidArgument, entity, "task id is not a safe identifier"});
    if (!task_ids.insert(t.id).second) out.push_back({ErrorCode::DuplicateId, entity, "duplicate task id"});
    if (t.name.empty()) out.push_back({ErrorCode::InvalidArgument, entity, "task name is empty"});
    if (auto bad = check_action(house, t.action, entity)) out.push_back(*bad);
  }

  std::set<std::string_view> scenario_ids;
  for (const auto& s : schedule.scenarios) {
    const std::string entity = "scenario:" + s.id;
    if (!is_safe_id(s.id)) out.push_back({ErrorCode::InvalidArgument, entity, "scenario id is not a safe identifier"});
    if (!scenario_ids.insert(s.id).second) out.push_back({ErrorCode::DuplicateId, entity, "duplicate scenario id"});
    if (s.name.empty()) out.push_back({ErrorCode::InvalidArgument, entity, "scenario name is empty"});
    if (s.repeat_ms && *s.repeat_ms <= 0) {
      out.push_back({ErrorCode::InvalidArgument, entity, "repeat_ms must be positive"});
    }
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      const auto& e = s.entries[i];
      const std::string entry_entity = entity + "/entries/" + std::to_string(i);
      if (e.delay_ms < 0) out.push_back({ErrorCode::NegativeDelay, entry_entity, "delay must be non-negative"});
      if (const auto* t = std::get_if<TaskRef>(&e.target)) {
        if (!schedule.find_task(t->id)) {
          out.push_back({ErrorCode::UnknownTarget, entry_entity, "unknown task '" + t->id + "'"});
        }
      } else if (!schedule.find_scenario(std::get<ScenarioRef>(e.target).id)) {
        out.push_back({ErrorCode::UnknownTarget, entry_entity,
                       "unknown scenario '" + std::get<ScenarioRef>(e.target).id + "'"});
      }
    }
  }
  if (auto cycle = find_inclusion_cycle(schedule)) {
    out.push_back({ErrorCode::CycleDetected, format_cycle(*cycle), "scenario inclusion cycle"});
  }
  return out;
}

}  // namespace shsim
