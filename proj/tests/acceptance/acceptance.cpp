// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "shsim/cli.hpp"
#include "shsim/engine.hpp"
#include "shsim/persistence.hpp"
#include "shsim/remote.hpp"
#include "shsim/wire.hpp"
#include "support/demo.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

using namespace shsim;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr int kOracleProjects = 100;
constexpr double kOracleBudgetSeconds = 10.0;
constexpr std::int64_t kOracleMaxHorizonMs = 3600000;
constexpr int kSplitFixtures = 50;
constexpr int kWireRoundTrips = 10000;
constexpr int kWireFuzzLines = 10000;
constexpr int kPersistenceProjects = 100;
constexpr std::int64_t kPollIntervalMs = 1000;

struct Verdict {
  bool pass = true;
  std::string detail;
};

Verdict fail(std::string why) { return {false, std::move(why)}; }

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "shsim-acceptance";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<oracle::Fired> rendered(const std::vector<SimEvent>& events) {
  std::vector<oracle::Fired> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    out.push_back({e.fire_time, e.action.device, e.action.sensor, encode_value(e.action.value),
                   e.provenance.to_string()});
  }
  return out;
}

Verdict scheduler_matches_oracle() {
  gen::Rng rng(20210101);
  const gen::ScheduleLimits lim;  // <=5 scenarios, <=10 entries, depth <=3, delays <=60 s, repeat <=120 s
  std::size_t total_events = 0;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < kOracleProjects; ++i) {
    const std::int64_t horizon = gen::uniform(rng, 1, kOracleMaxHorizonMs / 1000) * 1000;
    const auto project = gen::random_project(rng, horizon, false, lim);
    const auto got = rendered(compile_timeline(project, horizon));
    const auto want = oracle::walk(project, horizon, &encode_value);
    if (got != want) {
      return fail("project " + std::to_string(i) + ": " + std::to_string(got.size()) + " events vs oracle " +
                  std::to_string(want.size()));
    }
    total_events += got.size();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << kOracleProjects << " projects, " << total_events << " events, " << secs << " s";
  if (secs >= kOracleBudgetSeconds) return fail(d.str() + " (over budget)");
  return {true, d.str()};
}

Verdict repeating_chain_times() {
  auto d = demo::make();
  demo::add_morning(d, 60000);
  Engine engine(d.project);
  std::vector<VirtualTime> applied;
  for (const auto& e : engine.run_until(250000)) {
    if (e.outcome == Outcome::Applied) applied.push_back(e.fire_time);
  }
  const std::vector<VirtualTime> want{105000, 115000, 165000, 175000, 225000, 235000};
  if (applied != want) return fail("applied at " + std::to_string(applied.size()) + " unexpected times");
  return {true, "105 115 165 175 225 235 s"};
}

int run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli::run_cli(args, out, err);
}

Verdict fast_runs_are_deterministic() {
  const auto dir = scratch_dir();
  std::vector<fs::path> fixtures{fs::path(SHSIM_FIXTURES_DIR) / "demo_house.json",
                                 fs::path(SHSIM_FIXTURES_DIR) / "minimal.json"};
  gen::Rng rng(7);
  for (int i = 0; i < 8; ++i) {
    const auto p = dir / ("det-" + std::to_string(i) + ".json");
    save_project(gen::random_project(rng, 3600000), p);
    fixtures.push_back(p);
  }
  std::size_t compared = 0;
  for (const auto& f : fixtures) {
    for (const std::string fmt : {"csv", "jsonl"}) {
      const auto a = dir / ("a." + fmt), b = dir / ("b." + fmt);
      const std::vector<std::string> base{"run", f.string(), "--until", "3h", "--fast", "--log-format", fmt, "--log"};
      auto args_a = base, args_b = base;
      args_a.push_back(a.string());
      args_b.push_back(b.string());
      if (run_cli(args_a) != 0 || run_cli(args_b) != 0) return fail("run failed for " + f.filename().string());
      if (slurp(a) != slurp(b)) return fail(f.filename().string() + " " + fmt + " logs differ");
      ++compared;
    }
  }
  return {true, std::to_string(compared) + " log pairs identical"};
}

Verdict split_run_equality() {
  gen::Rng rng(4242);
  for (int i = 0; i < kSplitFixtures; ++i) {
    const std::int64_t horizon = gen::uniform(rng, 2, 3600) * 1000;
    const auto project = gen::random_project(rng, horizon);
    Engine whole(project);
    whole.run_until(horizon);
    Engine split(project);
    split.run_until(horizon / 2);
    split.run_until(horizon);
    if (split.log() != whole.log()) return fail("fixture " + std::to_string(i) + ": logs differ");
    if (split.house() != whole.house()) return fail("fixture " + std::to_string(i) + ": house state differs");
  }
  return {true, std::to_string(kSplitFixtures) + " fixtures"};
}

Verdict wire_round_trip_and_fuzz() {
  gen::Rng rng(99);
  auto id = [&] {
    auto s = gen::random_text(rng, 10);
    return s.empty() ? std::string("id") : s;
  };
  auto when = [&] { return gen::epoch() + std::chrono::milliseconds(gen::uniform(rng, -100000000000, 5000000000000)); };
  for (int i = 0; i < kWireRoundTrips; ++i) {
    const wire::StatusPacket p{id(), id(), gen::random_text(rng, 24), when()};
    if (wire::decode_status_packet(wire::encode_status_packet(p)) != p) return fail("status packet " + std::to_string(i));
    const wire::RemoteCommand c{id(), id(), id(), gen::random_text(rng, 24), when()};
    if (wire::decode_command(wire::encode_command(c)) != c) return fail("command " + std::to_string(i));
  }
  std::size_t accepted = 0;
  const std::string alphabet = "STATCMD|\\pn:-.T0123456789Z\n";
  for (int i = 0; i < kWireFuzzLines; ++i) {
    std::string line;
    auto random_byte = [&] {
      return gen::chance(rng, 0.3) ? static_cast<char>(gen::uniform(rng, 0, 255))
                                   : alphabet[static_cast<std::size_t>(gen::uniform(rng, 0, alphabet.size() - 1))];
    };
    if (i % 2 == 0) {
      // Small mutations of a valid line.
      line = gen::chance(rng, 0.5)
                 ? wire::encode_status_packet({id(), id(), gen::random_text(rng, 12), when()})
                 : wire::encode_command({id(), id(), id(), gen::random_text(rng, 12), when()});
      const auto edits = gen::uniform(rng, 0, 3);
      for (std::int64_t k = 0; k < edits && !line.empty(); ++k) {
        const auto pos = static_cast<std::size_t>(gen::uniform(rng, 0, line.size() - 1));
        switch (gen::uniform(rng, 0, 2)) {
          case 0: line[pos] = random_byte(); break;
          case 1: line.erase(pos, 1); break;
          default: line.insert(pos, 1, random_byte());
        }
      }
    } else {
      if (gen::chance(rng, 0.5)) line = gen::chance(rng, 0.5) ? "STAT|" : "CMD|";
      const auto n = gen::uniform(rng, 0, 80);
      for (std::int64_t k = 0; k < n; ++k) line += random_byte();
    }
    for (int which = 0; which < 2; ++which) {
      try {
        which ? (void)wire::decode_command(line) : (void)wire::decode_status_packet(line);
        ++accepted;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::MalformedLine) return fail("unexpected error kind on fuzz line " + std::to_string(i));
      } catch (...) {
        return fail("non-protocol exception on fuzz line " + std::to_string(i));
      }
    }
  }
  return {true, std::to_string(kWireRoundTrips) + "+" + std::to_string(kWireRoundTrips) + " round trips, " +
                    std::to_string(kWireFuzzLines) + " fuzz lines (" + std::to_string(accepted) + " decoded)"};
}

Verdict remote_loop() {
  remote::MockRemoteServer server;
  remote::MockRemoteHttpServer http(server);
  const int port = http.start("127.0.0.1", 0);
  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/remote";

  // Part one: a command enqueued mid-interval is applied by the next poll and echoed.
  {
    auto d = demo::make();
    Engine engine(d.project);
    remote::RemoteLink link({url, kPollIntervalMs, "acceptance"}, std::make_shared<remote::HttpTransport>(url));
    remote::LinkedRun run(engine, link);
    VirtualTime enqueued_at = -1;
    run.advance_to = [&](VirtualTime t) {
      if (t == 3 * kPollIntervalMs) {
        engine.run_until(t - kPollIntervalMs / 2);
        enqueued_at = engine.now();
        remote::HttpTransport(url).exchange(
            "ENQ|" + wire::encode_command({"cmd-1", d.heater, d.temp, "22.5", to_wall(d.project.epoch, enqueued_at)}));
      }
      engine.run_until(t);
    };
    run.run(6 * kPollIntervalMs);
    const auto& log = engine.log();
    auto it = std::find_if(log.begin(), log.end(), [](const LogEntry& e) { return e.provenance.source_id == "cmd-1"; });
    if (it == log.end() || it->outcome != Outcome::Applied) return fail("command not applied");
    if (it->fire_time - enqueued_at > kPollIntervalMs) return fail("command applied after more than one interval");
    bool echoed = false;
    for (const auto& line : server.received_lines()) {
      const auto p = wire::decode_status_packet(line);
      echoed |= p.object_id == d.heater && p.sensor_id == d.temp && p.sensor_value == "22.5";
    }
    if (!echoed) return fail("no matching STAT line");
  }

  // Part two: outage for two cycles, then recovery.
  {
    auto d = demo::make();
    d.project.schedule.define_scenario("Tick", d.at(0), 700,
                                       {{300, TaskRef{d.heat}}, {100, TaskRef{d.light_on}}, {100, TaskRef{d.light_off}}});
    Engine engine(d.project);
    remote::RemoteLink link({url, kPollIntervalMs, "acceptance"}, std::make_shared<remote::HttpTransport>(url));
    const std::size_t before = server.received_lines().size();
    std::size_t applied_writes = 0;
    engine.subscribe([&](const Notification& n) { applied_writes += std::holds_alternative<StatusChange>(n); });
    remote::LinkedRun run(engine, link);
    run.on_cycle = [&](std::size_t n, VirtualTime) { server.set_available(!(n == 3 || n == 4)); };
    const auto stats = run.run(10 * kPollIntervalMs);
    if (stats.unreachable_polls != 2 || stats.unreachable_pushes != 2) return fail("outage not observed");
    const auto lines = server.received_lines();
    if (lines.size() - before != applied_writes) {
      return fail(std::to_string(lines.size() - before) + " STAT lines for " + std::to_string(applied_writes) + " writes");
    }
    std::map<std::string, WallTime> last;
    for (std::size_t i = before; i < lines.size(); ++i) {
      const auto p = wire::decode_status_packet(lines[i]);
      const auto key = p.object_id + "/" + p.sensor_id;
      if (last.count(key) && p.timestamp < last[key]) return fail("per-sensor order broken for " + key);
      last[key] = p.timestamp;
    }
  }
  http.stop();
  return {true, "command applied within one interval; all STAT lines delivered after 2-cycle outage"};
}

Verdict validation_gates() {
  struct Case {
    const char* file;
    ErrorCode code;
    std::vector<std::string> names;
  };
  const std::vector<Case> cases{
      {"cyclic.json", ErrorCode::CycleDetected, {"morning", "arrival"}},
      {"bad_numeral.json", ErrorCode::InvalidValue, {"heat"}},
      {"bad_state.json", ErrorCode::InvalidValue, {"light-on"}},
      {"oob_placement.json", ErrorCode::OutOfBounds, {"lamp-1"}},
  };
  for (const auto& c : cases) {
    try {
      load_project(fs::path(SHSIM_FIXTURES_DIR) / c.file);
      return fail(std::string(c.file) + " accepted");
    } catch (const Error& e) {
      if (e.code() != c.code) return fail(std::string(c.file) + ": got " + std::string(to_string(e.code())));
      for (const auto& name : c.names) {
        if (std::string(e.what()).find(name) == std::string::npos) return fail(std::string(c.file) + ": diagnostic lacks " + name);
      }
    }
  }

  // The same four through the building operations.
  auto d = demo::make();
  auto& s = d.project.schedule;
  const auto a = s.define_scenario("A", d.at(0), {}, {});
  const auto b = s.define_scenario("B", d.at(0), {}, {{0, ScenarioRef{a}}});
  auto rejects = [](const std::function<void()>& fn, ErrorCode code, const std::string& name) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code() == code && std::string(e.what()).find(name) != std::string::npos;
    }
    return false;
  };
  if (!rejects([&] { s.define_scenario("A", d.at(0), {}, {{0, ScenarioRef{b}}}, a); }, ErrorCode::CycleDetected, b))
    return fail("cycle via define_scenario");
  if (!rejects([&] { s.define_task(d.project.house, "Hot", {d.heater, d.temp, NumberValue{40.001}}, {}, "hot"); },
               ErrorCode::InvalidValue, "hot"))
    return fail("numeral via define_task");
  if (!rejects([&] { s.define_task(d.project.house, "Dim", {d.lamp, d.light, StateValue{"on"}}, {}, "dim"); },
               ErrorCode::InvalidValue, "dim"))
    return fail("state via define_task");
  if (!rejects([&] { d.project.house.place_device(d.lamp, {10.001, 1}); }, ErrorCode::OutOfBounds, d.lamp))
    return fail("placement via place_device");
  return {true, "4 file cases + 4 operation cases rejected with entity named"};
}

Verdict persistence_round_trip() {
  gen::Rng rng(8);
  const auto path = scratch_dir() / "roundtrip.json";
  for (int i = 0; i < kPersistenceProjects; ++i) {
    const auto project = gen::random_project(rng, 3600000);
    save_project(project, path);
    const auto first = slurp(path);
    const auto loaded = load_project(path);
    if (loaded != project) return fail("project " + std::to_string(i) + " changed on load");
    save_project(loaded, path);
    if (slurp(path) != first) return fail("project " + std::to_string(i) + " bytes changed on re-save");
  }
  return {true, std::to_string(kPersistenceProjects) + " projects"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"scheduler-matches-brute-force-oracle", scheduler_matches_oracle},
      {"repeating-delay-chain-fire-times", repeating_chain_times},
      {"fast-run-logs-byte-identical", fast_runs_are_deterministic},
      {"split-run-equals-single-run", split_run_equality},
      {"wire-round-trip-and-fuzz", wire_round_trip_and_fuzz},
      {"remote-loop-against-mock", remote_loop},
      {"validation-gates-name-entity", validation_gates},
      {"persistence-round-trip-byte-stable", persistence_round_trip},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << "\n";
    failures += !v.pass;
  }
  std::cout << (failures ? "acceptance: FAILED\n" : "acceptance: all passed\n");
  return failures ? 1 : 0;
}
