#include "shsim/remote.hpp"

#include <httplib.h>

#include <algorithm>

namespace shsim::remote {

namespace {

constexpr std::string_view kUnavailable = "ERR|unavailable\n";

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

[[noreturn]] void unreachable(const std::string& endpoint, const std::string& why) {
  throw Error(ErrorCode::Unreachable, endpoint, why);
}

}  // namespace

// ---------------------------------------------------------------------------
// MockRemoteServer

std::string MockRemoteServer::handle(std::string_view request) {
  std::lock_guard lock(mutex_);
  const auto lines = wire::split_lines(request);
  if (lines.empty()) return "ERR|empty\n";
  const std::string_view head = lines.front();

  if (starts_with(head, "POLL|")) {
    if (!available_) return std::string(kUnavailable);
    ++polls_;
    std::string out;
    while (!pending_.empty()) {
      out += pending_.front();
      pending_.pop_front();
    }
    return out + "END\n";
  }
  if (starts_with(head, "STAT|")) {
    if (!available_) return std::string(kUnavailable);
    std::size_t stored = 0;
    for (auto line : lines) {
      try {
        wire::decode_status_packet(line);
      } catch (const Error&) {
        continue;
      }
      received_.push_back(std::string(line) + "\n");
      ++stored;
    }
    return "ACK|" + std::to_string(stored) + "\n";
  }
  if (starts_with(head, "ENQ|")) {
    // The payload is a complete CMD line; it may itself end in a newline.
    std::string_view payload = request.substr(4);
    try {
      const auto cmd = wire::decode_command(payload);
      pending_.push_back(wire::encode_command(cmd));
    } catch (const Error&) {
      return "ERR|malformed\n";
    }
    return "OK\n";
  }
  if (head == "AVAIL|on" || head == "AVAIL|off") {
    available_ = head == "AVAIL|on";
    return "OK\n";
  }
  if (head == "DUMP") {
    std::string out;
    for (const auto& line : received_) out += line;
    return out + "END\n";
  }
  return "ERR|unknown request\n";
}

void MockRemoteServer::enqueue(const RemoteCommand& command) {
  std::lock_guard lock(mutex_);
  pending_.push_back(wire::encode_command(command));
}

void MockRemoteServer::set_available(bool available) {
  std::lock_guard lock(mutex_);
  available_ = available;
}

bool MockRemoteServer::available() const {
  std::lock_guard lock(mutex_);
  return available_;
}

std::vector<std::string> MockRemoteServer::received_lines() const {
  std::lock_guard lock(mutex_);
  return received_;
}

std::size_t MockRemoteServer::poll_count() const {
  std::lock_guard lock(mutex_);
  return polls_;
}

// ---------------------------------------------------------------------------
// Transports

std::string InProcessTransport::exchange(std::string_view request) {
  return server_.handle(request);
}

HttpTransport::HttpTransport(std::string url) {
  // http://host:port[/path]
  const std::string scheme = "http://";
  std::string rest = starts_with(url, scheme) ? url.substr(scheme.size()) : url;
  const auto slash = rest.find('/');
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  origin_ = scheme + rest.substr(0, slash);
  if (rest.empty() || rest.substr(0, slash).empty()) {
    throw Error(ErrorCode::InvalidArgument, url, "remote endpoint needs host:port");
  }
}

std::string HttpTransport::exchange(std::string_view request) {
  httplib::Client client(origin_);
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(5, 0);
  auto res = client.Post(path_, std::string(request), "text/plain");
  if (!res) unreachable(origin_, httplib::to_string(res.error()));
  if (res->status != 200) unreachable(origin_, "HTTP " + std::to_string(res->status));
  return res->body;
}

MockRemoteHttpServer::MockRemoteHttpServer(MockRemoteServer& server)
    : server_(server), http_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(server_.handle(req.body), "text/plain");
  };
  http_->Post("/", handler);
  http_->Post("/remote", handler);
}

MockRemoteHttpServer::~MockRemoteHttpServer() { stop(); }

int MockRemoteHttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = http_->bind_to_any_port(host);
  } else if (!http_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::BindFailure, host + ":" + std::to_string(port), "cannot bind");
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return bound;
}

void MockRemoteHttpServer::run(const std::string& host, int port) {
  if (!http_->bind_to_port(host, port)) {
    throw Error(ErrorCode::BindFailure, host + ":" + std::to_string(port), "cannot bind");
  }
  http_->listen_after_bind();
}

void MockRemoteHttpServer::stop() {
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

// ---------------------------------------------------------------------------
// RemoteLink

RemoteLink::RemoteLink(LinkConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (config_.poll_interval_ms <= 0) {
    throw Error(ErrorCode::InvalidArgument, "poll_interval_ms", "must be positive");
  }
}

PollResult RemoteLink::poll_once() {
  const std::string response = transport_->exchange(wire::encode_poll(config_.session_id));
  if (starts_with(response, "ERR|")) unreachable(config_.endpoint, response.substr(4));

  PollResult result;
  for (auto line : wire::split_lines(response)) {
    if (line == "END") break;
    try {
      auto cmd = wire::decode_command(line);
      if (seen_.insert(cmd.command_id).second) result.commands.push_back(std::move(cmd));
    } catch (const Error&) {
      ++result.malformed;
    }
  }
  malformed_total_ += result.malformed;
  return result;
}

std::size_t RemoteLink::push_statuses(const std::vector<StatusPacket>& packets) {
  for (const auto& p : packets) outbox_.push_back(wire::encode_status_packet(p));
  if (outbox_.empty()) return 0;

  std::string body;
  for (const auto& line : outbox_) body += line;
  const std::string response = transport_->exchange(body);
  if (starts_with(response, "ERR|")) unreachable(config_.endpoint, response.substr(4));
  if (!starts_with(response, "ACK|")) unreachable(config_.endpoint, "unexpected reply to status push");

  const std::size_t sent = outbox_.size();
  outbox_.clear();
  std::size_t acked = 0;
  const auto digits = std::string_view(response).substr(4);
  for (char c : digits) {
    if (c < '0' || c > '9') break;
    acked = acked * 10 + static_cast<std::size_t>(c - '0');
  }
  return std::min(acked, sent);
}

// ---------------------------------------------------------------------------

std::vector<CommandOutcome> apply_commands(Engine& engine, const std::vector<RemoteCommand>& commands) {
  for (const auto& cmd : commands) {
    engine.submit(InboxCommand{Provenance{SourceKind::Remote, cmd.command_id, 0, {}}, cmd.object_id,
                               cmd.sensor_id, cmd.value});
  }
  return engine.drain_inbox();
}

StatusPacket to_packet(const Engine& engine, const StatusChange& change) {
  return StatusPacket{change.device, change.sensor, encode_value(change.value),
                      to_wall(engine.project().epoch, change.at)};
}

LinkedRun::LinkedRun(Engine& engine, RemoteLink& link) : engine_(engine), link_(link) {
  token_ = engine_.subscribe([this](const Notification& n) {
    if (const auto* change = std::get_if<StatusChange>(&n)) fresh_.push_back(to_packet(engine_, *change));
  });
}

LinkedRun::~LinkedRun() { engine_.unsubscribe(token_); }

void LinkedRun::cycle(VirtualTime t) {
  if (advance_to) {
    advance_to(t);
  } else {
    engine_.run_until(t);
  }
  if (on_cycle) on_cycle(stats_.cycles, t);
  ++stats_.cycles;

  try {
    auto polled = link_.poll_once();
    for (const auto& outcome : apply_commands(engine_, polled.commands)) {
      if (outcome.result == CommandResult::Applied) {
        ++stats_.commands_applied;
      } else {
        ++stats_.commands_rejected;
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unreachable) throw;
    ++stats_.unreachable_polls;
  }

  std::vector<StatusPacket> batch;
  batch.swap(fresh_);
  try {
    stats_.packets_acked += link_.push_statuses(batch);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unreachable) throw;
    ++stats_.unreachable_pushes;
  }
}

LinkedRunStats LinkedRun::run(VirtualTime horizon) {
  const std::int64_t interval = link_.config().poll_interval_ms;
  VirtualTime t = engine_.now();
  while (true) {
    cycle(t);
    if (t >= horizon) break;
    t = std::min(horizon, (t / interval + 1) * interval);
  }
  return stats_;
}

}  // namespace shsim::remote
