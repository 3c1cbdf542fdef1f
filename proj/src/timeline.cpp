#include "shsim/timeline.hpp"

#include <algorithm>

namespace shsim {

std::string Provenance::to_string() const {
  switch (kind) {
    case SourceKind::Scenario: {
      std::string out = "scenario:" + source_id + "#" + std::to_string(instance) + "@";
      for (std::size_t i = 0; i < entry_path.size(); ++i) {
        if (i) out += '.';
        out += std::to_string(entry_path[i]);
      }
      return out;
    }
    case SourceKind::Task: return "task:" + source_id;
    case SourceKind::Remote: return "remote:" + source_id;
    case SourceKind::Manual: return "manual:" + source_id;
  }
  return source_id;
}

namespace {

void flatten_into(const Schedule& schedule, const Scenario& scenario, VirtualTime start,
                  std::vector<std::size_t>& path, std::vector<ChainStep>& out) {
  VirtualTime cursor = start;
  for (std::size_t i = 0; i < scenario.entries.size(); ++i) {
    const auto& entry = scenario.entries[i];
    cursor += entry.delay_ms;
    path.push_back(i);
    if (const auto* ref = std::get_if<TaskRef>(&entry.target)) {
      if (const ScheduledTask* task = schedule.find_task(ref->id)) {
        out.push_back({cursor, path, task->action});
      }
    } else if (const Scenario* sub = schedule.find_scenario(std::get<ScenarioRef>(entry.target).id)) {
      // The sub-chain starts here; the parent cursor does not wait for it.
      flatten_into(schedule, *sub, cursor, path, out);
    }
    path.pop_back();
  }
}

}  // namespace

std::vector<ChainStep> flatten_scenario(const Schedule& schedule, const Scenario& scenario) {
  std::vector<ChainStep> out;
  std::vector<std::size_t> path;
  flatten_into(schedule, scenario, 0, path, out);
  return out;
}

std::vector<SimEvent> compile_timeline(const Project& project, VirtualTime horizon) {
  struct Keyed {
    EventOrderKey key;
    SimEvent event;
  };
  std::vector<Keyed> pending;
  const Schedule& schedule = project.schedule;

  for (std::size_t si = 0; si < schedule.scenarios.size(); ++si) {
    const Scenario& scenario = schedule.scenarios[si];
    if (!scenario.enabled) continue;
    const auto chain = flatten_scenario(schedule, scenario);
    if (chain.empty()) continue;
    const VirtualTime first = to_virtual(project.epoch, scenario.first_time);
    for (std::int64_t k = 0;; ++k) {
      const VirtualTime launch = first + k * scenario.repeat_ms.value_or(0);
      if (launch > horizon) break;
      if (launch >= 0) {
        for (const auto& step : chain) {
          const VirtualTime t = launch + step.offset;
          if (t > horizon) continue;
          Provenance prov{SourceKind::Scenario, scenario.id, k, step.path};
          pending.push_back({EventOrderKey{t, 0, si, k, step.path}, SimEvent{t, 0, step.action, std::move(prov)}});
        }
      }
      if (!scenario.repeat_ms) break;
    }
  }

  for (std::size_t ti = 0; ti < schedule.tasks.size(); ++ti) {
    const ScheduledTask& task = schedule.tasks[ti];
    if (!task.absolute_time) continue;
    const VirtualTime t = to_virtual(project.epoch, *task.absolute_time);
    if (t < 0 || t > horizon) continue;
    pending.push_back({EventOrderKey{t, 1, ti, 0, {}},
                       SimEvent{t, 0, task.action, Provenance{SourceKind::Task, task.id, 0, {}}}});
  }

  std::sort(pending.begin(), pending.end(),
            [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
  std::vector<SimEvent> events;
  events.reserve(pending.size());
  for (auto& p : pending) {
    p.event.seq = events.size();
    events.push_back(std::move(p.event));
  }
  return events;
}

}  // namespace shsim
