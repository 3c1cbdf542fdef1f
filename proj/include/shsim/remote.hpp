#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <vector>

#include "shsim/engine.hpp"
#include "shsim/wire.hpp"

namespace httplib {
class Server;
}

namespace shsim::remote {

using wire::RemoteCommand;
using wire::StatusPacket;

// Request/response byte exchange with the remote-controlling server. Throws
// Error{Unreachable} when the server cannot be reached.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string exchange(std::string_view request) = 0;
};

// Test double for the remote-controlling server. Thread-safe.
//
// Requests it understands:
//   POLL|<session>      queued CMD lines (each served once) + END
//   STAT|... (1+ lines) stores the lines, answers ACK|<n>
//   ENQ|<CMD line>      queues a command, answers OK
//   AVAIL|on / AVAIL|off
//   DUMP                stored STAT lines + END
// While unavailable, POLL and STAT answer ERR|unavailable.
class MockRemoteServer {
 public:
  std::string handle(std::string_view request);

  void enqueue(const RemoteCommand& command);
  void set_available(bool available);
  bool available() const;

  std::vector<std::string> received_lines() const;
  std::size_t poll_count() const;

 private:
  mutable std::mutex mutex_;
  bool available_ = true;
  std::deque<std::string> pending_;
  std::vector<std::string> received_;
  std::size_t polls_ = 0;
};

class InProcessTransport : public Transport {
 public:
  explicit InProcessTransport(MockRemoteServer& server) : server_(server) {}
  std::string exchange(std::string_view request) override;

 private:
  MockRemoteServer& server_;
};

// POSTs the request body to `http://host:port[/path]`.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::string url);
  std::string exchange(std::string_view request) override;

 private:
  std::string origin_;
  std::string path_;
};

// serve_mock_remote: the mock behind an HTTP endpoint accepting POST / and
// POST /remote.
class MockRemoteHttpServer {
 public:
  explicit MockRemoteHttpServer(MockRemoteServer& server);
  ~MockRemoteHttpServer();

  MockRemoteHttpServer(const MockRemoteHttpServer&) = delete;
  MockRemoteHttpServer& operator=(const MockRemoteHttpServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Throws Error{BindFailure}.
  int start(const std::string& host, int port);

  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);

  void stop();

 private:
  MockRemoteServer& server_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
};

struct LinkConfig {
  std::string endpoint;
  std::int64_t poll_interval_ms = 1000;
  std::string session_id = "sim";
};

struct PollResult {
  std::vector<RemoteCommand> commands;
  std::size_t malformed = 0;
};

class RemoteLink {
 public:
  RemoteLink(LinkConfig config, std::shared_ptr<Transport> transport);

  const LinkConfig& config() const { return config_; }

  /// Fetches pending commands, dropping command ids seen before.
  /// Malformed lines are skipped and counted.
  PollResult poll_once();

  /// Queues the packets and sends everything queued, oldest first. Returns
  /// the number acknowledged; on Error{Unreachable} nothing is dropped.
  std::size_t push_statuses(const std::vector<StatusPacket>& packets);

  /// Retries the queued packets only.
  std::size_t flush() { return push_statuses({}); }

  std::size_t queued() const { return outbox_.size(); }
  std::size_t malformed_total() const { return malformed_total_; }
  std::size_t seen_commands() const { return seen_.size(); }

 private:
  LinkConfig config_;
  std::shared_ptr<Transport> transport_;
  std::unordered_set<std::string> seen_;
  std::deque<std::string> outbox_;
  std::size_t malformed_total_ = 0;
};

/// Feeds commands through the engine inbox at the current virtual time.
std::vector<CommandOutcome> apply_commands(Engine& engine,
                                           const std::vector<RemoteCommand>& commands);

StatusPacket to_packet(const Engine& engine, const StatusChange& change);

struct LinkedRunStats {
  std::size_t cycles = 0;
  std::size_t unreachable_polls = 0;
  std::size_t unreachable_pushes = 0;
  std::size_t commands_applied = 0;
  std::size_t commands_rejected = 0;
  std::size_t packets_acked = 0;
};

// Drives an engine to a horizon while talking to the remote server at every
// poll boundary (virtual 0, P, 2P, ... and the horizon): scheduled events up
// to the boundary run first, then commands are polled and applied at the
// boundary, then status packets for every applied write are pushed.
class LinkedRun {
 public:
  LinkedRun(Engine& engine, RemoteLink& link);
  ~LinkedRun();

  LinkedRun(const LinkedRun&) = delete;
  LinkedRun& operator=(const LinkedRun&) = delete;

  /// Invoked at each boundary before polling, with the cycle number and
  /// virtual time.
  std::function<void(std::size_t, VirtualTime)> on_cycle;

  /// Replaces Engine::run_until for reaching each boundary (real-time pacing).
  std::function<void(VirtualTime)> advance_to;

  LinkedRunStats run(VirtualTime horizon);

 private:
  void cycle(VirtualTime t);

  Engine& engine_;
  RemoteLink& link_;
  std::size_t token_;
  std::vector<StatusPacket> fresh_;
  LinkedRunStats stats_;
};

}  // namespace shsim::remote
