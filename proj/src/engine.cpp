#include "shsim/engine.hpp"

#include <algorithm>
#include <limits>

namespace shsim {

std::string LogEntry::outcome_text() const {
  switch (outcome) {
    case Outcome::Applied: return "applied";
    case Outcome::Suppressed: return "suppressed";
    case Outcome::Rejected:
      return "rejected:" + std::string(to_string(error.value_or(ErrorCode::InvalidArgument)));
  }
  return "applied";
}

bool Engine::ItemAfter::operator()(const Item& a, const Item& b) const {
  if (a.time != b.time) return a.time > b.time;
  if (a.cls != b.cls) return a.cls > b.cls;
  return b.key < a.key;
}

Engine::Engine(Project project) : project_(std::move(project)) {
  if (auto violations = validate_project(project_); !violations.empty()) {
    const auto& v = violations.front();
    throw Error(v.code, v.entity, v.message);
  }
  const auto& scenarios = project_.schedule.scenarios;
  chains_.reserve(scenarios.size());
  for (const auto& s : scenarios) {
    chains_.push_back(flatten_scenario(project_.schedule, s));
    enabled_.push_back(s.enabled);
    generation_.push_back(0);
  }
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    if (!enabled_[si] || chains_[si].empty()) continue;
    if (auto k = first_instance_at_or_after(si, 0)) schedule_launch(si, *k);
  }
  const auto& tasks = project_.schedule.tasks;
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    if (!tasks[ti].absolute_time) continue;
    const VirtualTime t = to_virtual(project_.epoch, *tasks[ti].absolute_time);
    if (t < 0) continue;
    queue_.push(Item{t, 1, EventOrderKey{t, 1, ti, 0, {}},
                     Fire{tasks[ti].action, Provenance{SourceKind::Task, tasks[ti].id, 0, {}}, std::nullopt}});
  }
}

bool Engine::scenario_enabled(const ScenarioId& id) const {
  auto idx = project_.schedule.scenario_index(id);
  if (!idx) throw Error(ErrorCode::UnknownScenario, id, "no such scenario");
  return enabled_[*idx];
}

std::optional<std::int64_t> Engine::first_instance_at_or_after(std::size_t si, VirtualTime t) const {
  const Scenario& s = project_.schedule.scenarios[si];
  const VirtualTime first = to_virtual(project_.epoch, s.first_time);
  if (first >= t) return 0;
  if (!s.repeat_ms) return std::nullopt;
  const std::int64_t r = *s.repeat_ms;
  return (t - first + r - 1) / r;
}

void Engine::schedule_launch(std::size_t si, std::int64_t instance) {
  const Scenario& s = project_.schedule.scenarios[si];
  const VirtualTime launch = to_virtual(project_.epoch, s.first_time) + instance * s.repeat_ms.value_or(0);
  queue_.push(Item{launch, 0, EventOrderKey{launch, 0, si, instance, {}},
                   Launch{si, instance, generation_[si]}});
}

void Engine::expand_launch(const Item& item, const Launch& launch) {
  const std::size_t si = launch.scenario;
  if (launch.generation != generation_[si] || !enabled_[si]) return;
  const Scenario& s = project_.schedule.scenarios[si];
  for (const auto& step : chains_[si]) {
    const VirtualTime t = item.time + step.offset;
    queue_.push(Item{t, 1, EventOrderKey{t, 0, si, launch.instance, step.path},
                     Fire{step.action, Provenance{SourceKind::Scenario, s.id, launch.instance, step.path}, si}});
  }
  if (s.repeat_ms) schedule_launch(si, launch.instance + 1);
}

void Engine::apply_toggle(const Toggle& toggle) {
  now_ = std::max(now_, toggle.at);
  const std::size_t si = toggle.scenario;
  project_.schedule.scenarios[si].enabled = toggle.enabled;
  if (enabled_[si] == toggle.enabled) return;
  enabled_[si] = toggle.enabled;
  ++generation_[si];
  if (toggle.enabled && !chains_[si].empty()) {
    if (auto k = first_instance_at_or_after(si, toggle.at)) schedule_launch(si, *k);
  }
}

LogEntry Engine::execute_fire(VirtualTime time, const Fire& fire) {
  now_ = time;
  LogEntry entry{time, next_seq_++, fire.action.device, fire.action.sensor,
                 encode_value(fire.action.value), fire.provenance, Outcome::Applied, std::nullopt};
  if (fire.root_scenario && !enabled_[*fire.root_scenario]) {
    entry.outcome = Outcome::Suppressed;
  } else {
    try {
      project_.house.set_sensor_value(fire.action.device, fire.action.sensor, fire.action.value, time);
      notify(StatusChange{fire.action.device, fire.action.sensor, fire.action.value, time});
    } catch (const Error& e) {
      entry.outcome = Outcome::Rejected;
      entry.error = e.code();
    }
  }
  log_.push_back(entry);
  notify(entry);
  return entry;
}

std::vector<LogEntry> Engine::advance(VirtualTime limit, std::size_t max_fires) {
  std::vector<LogEntry> out;
  while (out.size() < max_fires) {
    const bool have_item = !queue_.empty();
    const VirtualTime top = have_item ? queue_.top().time : std::numeric_limits<VirtualTime>::max();
    if (!toggles_.empty() && toggles_.front().at <= limit && toggles_.front().at <= top) {
      const Toggle toggle = toggles_.front();
      toggles_.erase(toggles_.begin());
      apply_toggle(toggle);
      continue;
    }
    if (!have_item || top > limit) break;
    Item item = queue_.top();
    queue_.pop();
    if (const auto* launch = std::get_if<Launch>(&item.payload)) {
      expand_launch(item, *launch);
      continue;
    }
    out.push_back(execute_fire(item.time, std::get<Fire>(item.payload)));
  }
  return out;
}

std::vector<LogEntry> Engine::run_until(VirtualTime t) {
  if (t < now_) {
    throw Error(ErrorCode::ClockRegression, std::to_string(t),
                "cannot run back from " + std::to_string(now_));
  }
  const std::size_t first = log_.size();
  drain_inbox();
  advance(t, std::numeric_limits<std::size_t>::max());
  now_ = t;
  return {log_.begin() + static_cast<std::ptrdiff_t>(first), log_.end()};
}

std::optional<LogEntry> Engine::step() {
  drain_inbox();
  auto fired = advance(std::numeric_limits<VirtualTime>::max(), 1);
  if (fired.empty()) return std::nullopt;
  return fired.front();
}

void Engine::set_enabled(const ScenarioId& id, bool enabled, VirtualTime at) {
  auto idx = project_.schedule.scenario_index(id);
  if (!idx) throw Error(ErrorCode::UnknownScenario, id, "no such scenario");
  if (at < now_) {
    throw Error(ErrorCode::ClockRegression, id,
                "toggle at " + std::to_string(at) + " precedes now " + std::to_string(now_));
  }
  Toggle toggle{at, next_toggle_order_++, *idx, enabled};
  auto pos = std::upper_bound(toggles_.begin(), toggles_.end(), toggle, [](const Toggle& a, const Toggle& b) {
    return a.at != b.at ? a.at < b.at : a.order < b.order;
  });
  toggles_.insert(pos, toggle);
  while (!toggles_.empty() && toggles_.front().at <= now_) {
    const Toggle due = toggles_.front();
    toggles_.erase(toggles_.begin());
    apply_toggle(due);
  }
}

void Engine::submit(InboxCommand command) {
  inbox_.push_back({now_, std::move(command)});
}

std::vector<CommandOutcome> Engine::drain_inbox() {
  std::vector<CommandOutcome> outcomes;
  while (!inbox_.empty()) {
    StampedCommand item = std::move(inbox_.front());
    inbox_.pop_front();
    const InboxCommand& cmd = item.command;

    LogEntry entry{item.stamp, next_seq_++, cmd.device, cmd.sensor, cmd.value, cmd.source,
                   Outcome::Rejected, std::nullopt};
    CommandOutcome outcome{cmd.source.source_id, CommandResult::Rejected, std::nullopt, entry.seq};

    const DataFormat* format = project_.house.sensor_format(cmd.device, cmd.sensor);
    if (!format) {
      outcome.result = CommandResult::UnknownTarget;
      outcome.error = project_.house.find_device(cmd.device) ? ErrorCode::UnknownSensor : ErrorCode::UnknownDevice;
    } else if (auto value = decode_value(*format, cmd.value); !value) {
      outcome.error = ErrorCode::InvalidValue;
    } else {
      try {
        project_.house.set_sensor_value(cmd.device, cmd.sensor, *value, item.stamp);
        outcome.result = CommandResult::Applied;
        entry.outcome = Outcome::Applied;
        notify(StatusChange{cmd.device, cmd.sensor, *value, item.stamp});
      } catch (const Error& e) {
        outcome.error = e.code();
      }
    }
    entry.error = outcome.error;
    log_.push_back(entry);
    notify(entry);
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

std::size_t Engine::subscribe(Observer observer) {
  const std::size_t token = next_observer_++;
  observers_.emplace(token, std::move(observer));
  return token;
}

void Engine::unsubscribe(std::size_t token) { observers_.erase(token); }

void Engine::notify(const Notification& n) {
  for (const auto& [token, observer] : observers_) observer(n);
}

}  // namespace shsim
