#include "shsim/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <ostream>
#include <thread>

#include "shsim/engine.hpp"
#include "shsim/persistence.hpp"
#include "shsim/remote.hpp"
#include "shsim/service.hpp"

namespace shsim::cli {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::IoFailure: return kExitIo;
    case ErrorCode::Unreachable:
    case ErrorCode::BindFailure:
    case ErrorCode::ClockRegression:
      return kExitRuntime;
    default: return kExitValidation;
  }
}

bool split_address(const std::string& addr, std::string& host, int& port) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) return false;
  host = addr.substr(0, colon);
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) return false;
  } catch (const std::logic_error&) {
    return false;
  }
  if (host.empty()) host = "127.0.0.1";
  return port >= 0 && port <= 65535;
}

// Advances the engine in 20 ms wall ticks so that `speed` virtual ms elapse
// per wall ms. Event order is the same as in fast mode.
void paced_run_until(Engine& engine, VirtualTime target, double speed) {
  const auto wall_start = std::chrono::steady_clock::now();
  const VirtualTime virtual_start = engine.now();
  while (engine.now() < target && !g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start).count();
    const auto v = virtual_start + static_cast<VirtualTime>(elapsed * speed);
    engine.run_until(std::min(v, target));
  }
  if (engine.now() < target) engine.run_until(target);
}

void wait_for_interrupt() {
  g_interrupted = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

struct RunOptions {
  std::string project;
  std::string until;
  std::optional<double> speed;
  bool fast = false;
  std::string remote;
  std::int64_t poll_ms = 1000;
  std::string session = "sim";
  std::string log_path;
  std::string log_format = "csv";
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  Project project;
  try {
    project = load_project(opts.project);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e);
  }
  const auto horizon = parse_horizon(opts.until, project.epoch);
  if (!horizon) {
    err << "invalid --until '" << opts.until << "': expected a positive duration (e.g. 1h, 90m, 1500ms) "
        << "or an ISO-8601 datetime after the epoch\n";
    return kExitValidation;
  }
  if (opts.speed && !(*opts.speed > 0.0)) {
    err << "--speed must be positive\n";
    return kExitValidation;
  }
  const bool realtime = opts.speed.has_value() && !opts.fast;

  try {
    Engine engine(std::move(project));
    auto advance = [&](VirtualTime t) {
      if (realtime) {
        paced_run_until(engine, t, *opts.speed);
      } else {
        engine.run_until(t);
      }
    };

    if (!opts.remote.empty()) {
      remote::RemoteLink link({opts.remote, opts.poll_ms, opts.session},
                              std::make_shared<remote::HttpTransport>(opts.remote));
      remote::LinkedRun linked(engine, link);
      linked.advance_to = advance;
      const auto stats = linked.run(*horizon);
      if (link.queued() > 0) {
        try {
          link.flush();
        } catch (const Error&) {
        }
      }
      if (stats.unreachable_polls + stats.unreachable_pushes > 0) {
        err << "remote unreachable: " << stats.unreachable_polls << " polls, " << stats.unreachable_pushes
            << " pushes failed\n";
      }
      if (link.queued() > 0) err << link.queued() << " status packets could not be delivered\n";
      out << "remote: commands applied=" << stats.commands_applied << " rejected=" << stats.commands_rejected
          << " packets acked=" << stats.packets_acked << "\n";
    } else {
      advance(*horizon);
    }

    std::size_t applied = 0, rejected = 0, suppressed = 0;
    for (const auto& e : engine.log()) {
      if (e.outcome == Outcome::Applied) ++applied;
      if (e.outcome == Outcome::Rejected) ++rejected;
      if (e.outcome == Outcome::Suppressed) ++suppressed;
    }
    if (!opts.log_path.empty()) {
      export_event_log(engine.log(), opts.log_path, opts.log_format == "jsonl" ? LogFormat::Jsonl : LogFormat::Csv);
    }
    out << "events: applied=" << applied << " rejected=" << rejected << " suppressed=" << suppressed
        << " until_ms=" << *horizon << "\n";
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::IoFailure ? kExitIo : kExitRuntime;
  }
  return kExitOk;
}

int cmd_serve(const std::string& path, const std::string& listen, std::ostream& out, std::ostream& err) {
  std::string host;
  int port = 0;
  if (!split_address(listen, host, port)) {
    err << "invalid --listen address '" << listen << "'\n";
    return kExitValidation;
  }
  try {
    ApiService service(load_project(path), std::filesystem::path(path));
    const int bound = service.start(host, port);
    out << "serving " << path << " on http://" << host << ":" << bound << "\n" << std::flush;
    wait_for_interrupt();
    service.stop();
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}

int cmd_mock_remote(const std::string& listen, std::ostream& out, std::ostream& err) {
  std::string host;
  int port = 0;
  if (!split_address(listen, host, port)) {
    err << "invalid --listen address '" << listen << "'\n";
    return kExitValidation;
  }
  try {
    remote::MockRemoteServer server;
    remote::MockRemoteHttpServer http(server);
    const int bound = http.start(host, port);
    out << "mock remote on http://" << host << ":" << bound << "\n" << std::flush;
    wait_for_interrupt();
    http.stop();
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace

std::optional<VirtualTime> parse_horizon(std::string_view text, WallTime epoch) {
  if (auto t = parse_iso8601(text)) {
    const VirtualTime v = to_virtual(epoch, *t);
    return v > 0 ? std::optional(v) : std::nullopt;
  }
  VirtualTime total = 0;
  std::size_t i = 0;
  if (text.empty()) return std::nullopt;
  while (i < text.size()) {
    std::int64_t n = 0;
    const std::size_t digits_start = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      n = n * 10 + (text[i] - '0');
      if (n > 1'000'000'000'000LL) return std::nullopt;
      ++i;
    }
    if (i == digits_start) return std::nullopt;
    const std::size_t unit_start = i;
    while (i < text.size() && text[i] >= 'a' && text[i] <= 'z') ++i;
    const auto unit = text.substr(unit_start, i - unit_start);
    std::int64_t scale = 0;
    if (unit == "ms") scale = 1;
    else if (unit == "s") scale = 1000;
    else if (unit == "m") scale = 60'000;
    else if (unit == "h") scale = 3'600'000;
    else if (unit == "d") scale = 86'400'000;
    else return std::nullopt;
    total += n * scale;
  }
  return total > 0 ? std::optional(total) : std::nullopt;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  try {
    const Project project = load_project(path);
    out << path << ": ok (" << project.house.devices.size() << " devices, " << project.schedule.tasks.size()
        << " tasks, " << project.schedule.scenarios.size() << " scenarios)\n";
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scenario-based smart house simulator", "shsim"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a project file");
  validate->add_option("file", validate_path, "Project file")->required();

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run a project headless on the virtual clock");
  run->add_option("file", run_opts.project, "Project file")->required();
  run->add_option("--until", run_opts.until, "Horizon: duration (1h, 90m, 30s, 500ms) or ISO-8601 datetime")
      ->required();
  auto* speed = run->add_option("--speed", run_opts.speed, "Real-time mode: virtual ms per wall ms");
  auto* fast = run->add_flag("--fast", run_opts.fast, "As fast as possible (default)");
  speed->excludes(fast);
  auto* remote_opt = run->add_option("--remote", run_opts.remote, "Remote server URL (http://host:port)");
  run->add_option("--poll-ms", run_opts.poll_ms, "Remote poll interval in virtual ms")
      ->needs(remote_opt)
      ->check(CLI::PositiveNumber);
  run->add_option("--session", run_opts.session, "Remote session id")->needs(remote_opt);
  auto* log_opt = run->add_option("--log", run_opts.log_path, "Event log export path");
  run->add_option("--log-format", run_opts.log_format, "csv or jsonl")
      ->needs(log_opt)
      ->check(CLI::IsMember({"csv", "jsonl"}));

  std::string serve_path;
  std::string serve_listen = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API and live stream");
  serve->add_option("file", serve_path, "Project file")->required();
  serve->add_option("--listen", serve_listen, "host:port");

  std::string mock_listen = "127.0.0.1:9000";
  auto* mock = app.add_subcommand("mock-remote", "Run the mock remote-controlling server");
  mock->add_option("--listen", mock_listen, "host:port");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (validate->parsed()) return cmd_validate(validate_path, out, err);
  if (run->parsed()) return cmd_run(run_opts, out, err);
  if (serve->parsed()) return cmd_serve(serve_path, serve_listen, out, err);
  if (mock->parsed()) return cmd_mock_remote(mock_listen, out, err);
  return kExitValidation;
}

}  // namespace shsim::cli
