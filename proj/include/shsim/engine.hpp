#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "shsim/project.hpp"
#include "shsim/timeline.hpp"

namespace shsim {

enum class Outcome { Applied, Rejected, Suppressed };

// One executed (or refused) action. Scheduled events and inbox commands share
// the same record and the same seq counter.
struct LogEntry {
  VirtualTime fire_time = 0;
  std::uint64_t seq = 0;
  DeviceId device;
  SensorId sensor;
  std::string value;
  Provenance provenance;
  Outcome outcome = Outcome::Applied;
  std::optional<ErrorCode> error;

  /// `applied`, `suppressed` or `rejected:<ErrorCode>`.
  std::string outcome_text() const;

  bool operator==(const LogEntry&) const = default;
};

struct StatusChange {
  DeviceId device;
  SensorId sensor;
  SensorValue value;
  VirtualTime at = 0;
};

using Notification = std::variant<LogEntry, StatusChange>;

// A value write arriving from outside the schedule (remote server or UI).
// The value is still text; it is decoded against the target sensor's format
// when applied.
struct InboxCommand {
  Provenance source;
  DeviceId device;
  SensorId sensor;
  std::string value;
};

enum class CommandResult { Applied, Rejected, UnknownTarget };

struct CommandOutcome {
  std::string command_id;
  CommandResult result = CommandResult::Applied;
  std::optional<ErrorCode> error;
  std::uint64_t seq = 0;
};

// Discrete-event executor. Single writer of the house state and the virtual
// clock; not thread-safe, callers serialize access.
class Engine {
 public:
  explicit Engine(Project project);

  VirtualTime now() const { return now_; }
  const Project& project() const { return project_; }
  const House& house() const { return project_.house; }
  const std::vector<LogEntry>& log() const { return log_; }
  bool scenario_enabled(const ScenarioId& id) const;

  /// Applies everything due at or before `t`, then sets the clock to `t`.
  /// Returns the log entries produced by this call.
  std::vector<LogEntry> run_until(VirtualTime t);

  /// Processes exactly one scheduled event (applied or suppressed) and moves
  /// the clock to its fire time.
  std::optional<LogEntry> step();

  /// Takes effect at virtual time `at` (>= now), ahead of anything else
  /// scheduled for that instant.
  void set_enabled(const ScenarioId& id, bool enabled, VirtualTime at);

  /// Queues an external write stamped with the current virtual time.
  void submit(InboxCommand command);

  /// Applies queued external writes in arrival order.
  std::vector<CommandOutcome> drain_inbox();

  using Observer = std::function<void(const Notification&)>;
  std::size_t subscribe(Observer observer);
  void unsubscribe(std::size_t token);

 private:
  struct Toggle {
    VirtualTime at;
    std::uint64_t order;
    std::size_t scenario;
    bool enabled;
  };

  struct Launch {
    std::size_t scenario;
    std::int64_t instance;
    std::uint64_t generation;
  };

  struct Fire {
    TaskAction action;
    Provenance provenance;
    std::optional<std::size_t> root_scenario;
  };

  struct Item {
    VirtualTime time;
    int cls;  // 0 launch, 1 fire
    EventOrderKey key;
    std::variant<Launch, Fire> payload;
  };

  struct ItemAfter {
    bool operator()(const Item& a, const Item& b) const;
  };

  struct StampedCommand {
    VirtualTime stamp;
    InboxCommand command;
  };

  void schedule_launch(std::size_t scenario, std::int64_t instance);
  std::optional<std::int64_t> first_instance_at_or_after(std::size_t scenario,
                                                         VirtualTime t) const;
  void apply_toggle(const Toggle& toggle);
  void expand_launch(const Item& item, const Launch& launch);
  LogEntry execute_fire(VirtualTime time, const Fire& fire);
  std::vector<LogEntry> advance(VirtualTime limit, std::size_t max_fires);
  void notify(const Notification& n);

  Project project_;
  VirtualTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_toggle_order_ = 0;

  std::vector<std::vector<ChainStep>> chains_;
  std::vector<bool> enabled_;
  std::vector<std::uint64_t> generation_;

  std::priority_queue<Item, std::vector<Item>, ItemAfter> queue_;
  std::vector<Toggle> toggles_;  // sorted by (at, order)
  std::deque<StampedCommand> inbox_;
  std::vector<LogEntry> log_;

  std::map<std::size_t, Observer> observers_;
  std::size_t next_observer_ = 0;
};

}  // namespace shsim
