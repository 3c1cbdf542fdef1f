#include "shsim/service.hpp"

#include <httplib.h>

#include <charconv>

#include "shsim/persistence.hpp"

namespace shsim {

using nlohmann::json;

namespace {

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownDevice:
    case ErrorCode::UnknownSensor:
    case ErrorCode::UnknownScenario:
    case ErrorCode::UnknownTask:
    case ErrorCode::UnknownTarget:
      return 404;
    case ErrorCode::ClockRegression:
      return 409;
    case ErrorCode::IoFailure:
      return 500;
    default:
      return 400;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump() + "\n", "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& entity, const std::string& message) {
  send_json(res, {{"error", std::string(to_string(code))}, {"entity", entity}, {"message", message}},
            http_status_for(code));
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "body", e.what());
  }
}

json optional_value_json(const std::optional<SensorValue>& v) {
  return v ? json(encode_value(*v)) : json(nullptr);
}

}  // namespace

json status_to_json(const DeviceStatus& status, WallTime epoch) {
  json entries = json::array();
  for (const auto& e : status.entries) {
    entries.push_back({{"sensor_id", e.sensor_id},
                       {"value", optional_value_json(e.value)},
                       {"last_update_ms", e.last_update ? json(*e.last_update) : json(nullptr)},
                       {"timestamp", e.last_update ? json(format_iso8601(to_wall(epoch, *e.last_update)))
                                                   : json(nullptr)}});
  }
  return {{"device_id", status.device_id}, {"entries", entries}};
}

json log_entry_to_json(const LogEntry& entry) {
  const auto r = to_record(entry);
  return {{"fire_time_ms", r.fire_time_ms}, {"seq", r.seq},         {"object_id", r.object_id},
          {"sensor_id", r.sensor_id},       {"value", r.value},     {"outcome", r.outcome},
          {"provenance", r.provenance}};
}

// ---------------------------------------------------------------------------

void StreamHub::publish(std::string line) {
  {
    std::lock_guard lock(mutex_);
    lines_.push_back(std::move(line));
  }
  cv_.notify_all();
}

std::vector<std::string> StreamHub::read_from(std::size_t& cursor, std::chrono::milliseconds wait) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, wait, [&] { return closed_ || cursor < lines_.size(); });
  std::vector<std::string> out;
  for (; cursor < lines_.size(); ++cursor) out.push_back(lines_[cursor]);
  return out;
}

std::size_t StreamHub::size() const {
  std::lock_guard lock(mutex_);
  return lines_.size();
}

void StreamHub::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

// ---------------------------------------------------------------------------

ApiService::ApiService(Project project, std::optional<std::filesystem::path> project_path)
    : project_path_(std::move(project_path)), http_(std::make_unique<httplib::Server>()) {
  reset_engine(std::move(project));
  install_routes();
}

ApiService::~ApiService() { stop(); }

void ApiService::reset_engine(Project project) {
  auto engine = std::make_unique<Engine>(std::move(project));
  const WallTime epoch = engine->project().epoch;
  engine->subscribe([this, epoch](const Notification& n) {
    if (const auto* entry = std::get_if<LogEntry>(&n)) {
      json record = log_entry_to_json(*entry);
      record["type"] = "event";
      hub_.publish(record.dump());
    } else {
      const auto& change = std::get<StatusChange>(n);
      hub_.publish(json{{"type", "status"},
                        {"device_id", change.device},
                        {"sensor_id", change.sensor},
                        {"value", encode_value(change.value)},
                        {"at_ms", change.at},
                        {"timestamp", format_iso8601(to_wall(epoch, change.at))}}
                       .dump());
    }
  });
  engine_ = std::move(engine);
}

void ApiService::start_clock(double speed) {
  stop_clock();
  clock_running_ = true;
  clock_thread_ = std::thread([this, speed] {
    const auto wall_start = std::chrono::steady_clock::now();
    VirtualTime virtual_start = 0;
    {
      std::lock_guard lock(engine_mutex_);
      virtual_start = engine_->now();
    }
    while (clock_running_) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      const double elapsed =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start).count();
      std::lock_guard lock(engine_mutex_);
      const auto target = virtual_start + static_cast<VirtualTime>(elapsed * speed);
      if (target > engine_->now()) engine_->run_until(target);
    }
  });
}

void ApiService::stop_clock() {
  clock_running_ = false;
  if (clock_thread_.joinable()) clock_thread_.join();
}

void ApiService::install_routes() {
  auto guarded = [this](auto handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        send_error(res, e.code(), e.entity(), e.what());
      } catch (const json::exception& e) {
        send_error(res, ErrorCode::InvalidArgument, "body", e.what());
      }
    };
  };

  http_->Get("/api/project", guarded([this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(engine_mutex_);
    res.set_content(serialize_project(engine_->project()), "application/json");
  }));

  http_->Put("/api/project", guarded([this](const httplib::Request& req, httplib::Response& res) {
    Project project = parse_project(req.body);
    stop_clock();
    std::lock_guard lock(engine_mutex_);
    reset_engine(std::move(project));
    res.set_content(serialize_project(engine_->project()), "application/json");
  }));

  http_->Post("/api/project/save", guarded([this](const httplib::Request&, httplib::Response& res) {
    if (!project_path_) throw Error(ErrorCode::IoFailure, "project", "service was started without a file");
    std::lock_guard lock(engine_mutex_);
    save_project(engine_->project(), *project_path_);
    send_json(res, {{"saved", project_path_->string()}});
  }));

  auto status_handler = guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(engine_mutex_);
    send_json(res, status_to_json(engine_->house().get_status(req.matches[1]), engine_->project().epoch));
  });
  http_->Get(R"(/api/devices/([^/]+)/status)", status_handler);
  http_->Post(R"(/api/devices/([^/]+)/status)", status_handler);

  http_->Post(R"(/api/devices/([^/]+)/sensors/([^/]+))",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("value")) throw Error(ErrorCode::InvalidArgument, "value", "missing value");
                const json& v = body.at("value");
                std::string text;
                if (v.is_string()) {
                  text = v.get<std::string>();
                } else if (v.is_number()) {
                  text = format_number(v.get<double>());
                } else if (v.is_object() && v.value("type", "") == "state") {
                  text = v.at("name").get<std::string>();
                } else if (v.is_object() && v.value("type", "") == "number") {
                  text = format_number(v.at("value").get<double>());
                } else if (v.is_object() && v.value("type", "") == "position") {
                  text = format_number(v.at("x").get<double>()) + "," + format_number(v.at("y").get<double>());
                } else {
                  throw Error(ErrorCode::InvalidArgument, "value", "unsupported value shape");
                }
                std::lock_guard lock(engine_mutex_);
                const std::string id = "ui-" + std::to_string(++manual_writes_);
                engine_->submit(InboxCommand{Provenance{SourceKind::Manual, id, 0, {}}, req.matches[1],
                                             req.matches[2], text});
                const auto outcomes = engine_->drain_inbox();
                const auto& outcome = outcomes.back();
                if (outcome.result != CommandResult::Applied) {
                  const ErrorCode code = outcome.error.value_or(ErrorCode::InvalidValue);
                  throw Error(code, std::string(req.matches[1]) + "/" + std::string(req.matches[2]),
                              "write rejected");
                }
                send_json(res, status_to_json(engine_->house().get_status(req.matches[1]), engine_->project().epoch));
              }));

  http_->Post(R"(/api/scenarios/([^/]+)/enabled)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("enabled") || !body.at("enabled").is_boolean()) {
                  throw Error(ErrorCode::InvalidArgument, "enabled", "expected a boolean");
                }
                const bool enabled = body.at("enabled").get<bool>();
                std::lock_guard lock(engine_mutex_);
                engine_->set_enabled(req.matches[1], enabled, engine_->now());
                send_json(res, {{"id", std::string(req.matches[1])}, {"enabled", enabled}, {"at_ms", engine_->now()}});
              }));

  http_->Post("/api/run", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string action = body.value("action", "");
    if (action == "run") {
      const double speed = body.value("speed", 1.0);
      if (!(speed > 0.0)) throw Error(ErrorCode::InvalidArgument, "speed", "must be positive");
      start_clock(speed);
      std::lock_guard lock(engine_mutex_);
      send_json(res, {{"running", true}, {"now_ms", engine_->now()}});
    } else if (action == "pause") {
      stop_clock();
      std::lock_guard lock(engine_mutex_);
      send_json(res, {{"running", false}, {"now_ms", engine_->now()}});
    } else if (action == "step") {
      std::lock_guard lock(engine_mutex_);
      const auto entry = engine_->step();
      send_json(res, {{"event", entry ? log_entry_to_json(*entry) : json(nullptr)}, {"now_ms", engine_->now()}});
    } else if (action == "until") {
      if (!body.contains("t") || !body.at("t").is_number_integer()) {
        throw Error(ErrorCode::InvalidArgument, "t", "expected integer virtual milliseconds");
      }
      std::lock_guard lock(engine_mutex_);
      json events = json::array();
      for (const auto& e : engine_->run_until(body.at("t").get<VirtualTime>())) events.push_back(log_entry_to_json(e));
      send_json(res, {{"events", events}, {"now_ms", engine_->now()}});
    } else {
      throw Error(ErrorCode::InvalidArgument, "action", "expected run, pause, step or until");
    }
  }));

  http_->Get("/api/stream", [this](const httplib::Request& req, httplib::Response& res) {
    auto cursor = std::make_shared<std::size_t>(hub_.size());
    if (req.has_param("from")) {
      const std::string from = req.get_param_value("from");
      const auto [end, ec] = std::from_chars(from.data(), from.data() + from.size(), *cursor);
      if (ec != std::errc() || end != from.data() + from.size()) {
        send_error(res, ErrorCode::InvalidArgument, "from", "expected a record index");
        return;
      }
    }
    res.set_chunked_content_provider("application/x-ndjson", [this, cursor](std::size_t, httplib::DataSink& sink) {
      for (const auto& line : hub_.read_from(*cursor, std::chrono::milliseconds(200))) {
        const std::string chunk = line + "\n";
        if (!sink.write(chunk.data(), chunk.size())) return false;
      }
      if (!http_->is_running()) {
        sink.done();
        return true;
      }
      return sink.is_writable();
    });
  });
}

int ApiService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = http_->bind_to_any_port(host);
  } else if (!http_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::BindFailure, host + ":" + std::to_string(port), "cannot bind");
  server_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return bound;
}

void ApiService::run(const std::string& host, int port) {
  if (!http_->bind_to_port(host, port)) {
    throw Error(ErrorCode::BindFailure, host + ":" + std::to_string(port), "cannot bind");
  }
  http_->listen_after_bind();
}

void ApiService::stop() {
  stop_clock();
  hub_.close();
  if (http_) http_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace shsim
