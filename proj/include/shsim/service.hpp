#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "shsim/engine.hpp"

namespace httplib {
class Server;
}

namespace shsim {

// Append-only buffer of JSON-lines records shared with stream subscribers.
class StreamHub {
 public:
  void publish(std::string line);

  /// Blocks up to `wait` for records at index >= cursor.
  std::vector<std::string> read_from(std::size_t& cursor, std::chrono::milliseconds wait);

  std::size_t size() const;
  void close();

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<std::string> lines_;
  bool closed_ = false;
};

// HTTP API around one engine (cmd_serve). The engine starts paused at
// virtual 0; every handler takes the engine lock.
//
//   GET  /api/project                      current project document
//   PUT  /api/project                      replace project, engine reset
//   POST /api/project/save                 write project to its file
//   GET  /api/devices/<id>/status          device status
//   POST /api/devices/<id>/sensors/<sid>   {"value": text | typed value}
//   POST /api/scenarios/<id>/enabled       {"enabled": bool}
//   POST /api/run                          {"action": run|pause|step|until, "t": ms, "speed": x}
//   GET  /api/stream                       JSON lines {"type": "event"|"status", ...}
class ApiService {
 public:
  ApiService(Project project, std::optional<std::filesystem::path> project_path);
  ~ApiService();

  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  /// Binds (port 0 picks one) and serves on a background thread.
  int start(const std::string& host, int port);

  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);

  void stop();

  StreamHub& stream() { return hub_; }

 private:
  void install_routes();
  void reset_engine(Project project);
  void start_clock(double speed);
  void stop_clock();

  std::mutex engine_mutex_;
  std::unique_ptr<Engine> engine_;
  std::optional<std::filesystem::path> project_path_;
  StreamHub hub_;

  std::unique_ptr<httplib::Server> http_;
  std::thread server_thread_;

  std::atomic<bool> clock_running_{false};
  std::thread clock_thread_;
  std::uint64_t manual_writes_ = 0;
};

nlohmann::json status_to_json(const DeviceStatus& status, WallTime epoch);
nlohmann::json log_entry_to_json(const LogEntry& entry);

}  // namespace shsim
