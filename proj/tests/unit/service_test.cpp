#include <gtest/gtest.h>

#include <httplib.h>

#include <fstream>
#include <json.hpp>

#include "shsim/persistence.hpp"
#include "shsim/service.hpp"

using namespace shsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Served {
  Project project = load_project(fs::path(SHSIM_FIXTURES_DIR) / "demo_house.json");
  fs::path path = fs::temp_directory_path() / "shsim-service-test.json";
  std::unique_ptr<ApiService> service;
  std::unique_ptr<httplib::Client> client;

  Served() {
    save_project(project, path);
    service = std::make_unique<ApiService>(project, path);
    const int port = service->start("127.0.0.1", 0);
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(5, 0);
  }
  ~Served() { service->stop(); }

  json post(const std::string& path, const json& body, int expect = 200) {
    auto res = client->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << res->body;
    return json::parse(res->body);
  }
};

}  // namespace

TEST(Service, ServesProjectDocument) {
  Served s;
  auto res = s.client->Get("/api/project");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(parse_project(res->body), s.project);
}

TEST(Service, StepUntilAndStatus) {
  Served s;
  const auto step = s.post("/api/run", {{"action", "step"}});
  EXPECT_EQ(step["event"]["fire_time_ms"], 105000);
  EXPECT_EQ(step["event"]["provenance"], "scenario:morning#0@0");
  const auto until = s.post("/api/run", {{"action", "until"}, {"t", 120000}});
  EXPECT_EQ(until["events"].size(), 1u);
  EXPECT_EQ(until["now_ms"], 120000);

  auto res = s.client->Get("/api/devices/lamp-1/status");
  ASSERT_TRUE(res);
  const auto status = json::parse(res->body);
  EXPECT_EQ(status["entries"][0]["value"], "On");
  EXPECT_EQ(status["entries"][0]["timestamp"], "2021-01-01T06:01:55Z");

  s.post("/api/run", {{"action", "until"}, {"t", 1000}}, 409);
  EXPECT_EQ(s.client->Get("/api/devices/ghost/status")->status, 404);
}

TEST(Service, ManualSensorWrites) {
  Served s;
  auto status = s.post("/api/devices/heater-1/sensors/temp", {{"value", 21.5}});
  EXPECT_EQ(status["entries"][0]["value"], "21.5");
  status = s.post("/api/devices/tracker-1/sensors/presence", {{"value", "3,4"}});
  EXPECT_EQ(status["entries"][0]["value"], "3,4");
  const auto err = s.post("/api/devices/heater-1/sensors/temp", {{"value", 99}}, 400);
  EXPECT_EQ(err["error"], "InvalidValue");
  s.post("/api/devices/heater-1/sensors/nope", {{"value", 1}}, 404);
}

TEST(Service, ToggleScenarioAndSave) {
  Served s;
  s.post("/api/run", {{"action", "step"}});
  const auto r = s.post("/api/scenarios/morning/enabled", {{"enabled", false}});
  EXPECT_EQ(r.at("enabled"), false);
  EXPECT_EQ(r.at("at_ms"), 105000);
  const auto until = s.post("/api/run", {{"action", "until"}, {"t", 120000}});
  ASSERT_EQ(until.at("events").size(), 1u);
  EXPECT_EQ(until.at("events").at(0).at("outcome"), "suppressed");
  s.post("/api/scenarios/ghost/enabled", {{"enabled", true}}, 404);
  s.post("/api/project/save", json::object());
  EXPECT_FALSE(load_project(s.path).schedule.find_scenario("morning")->enabled);
}

TEST(Service, ReplaceProjectValidates) {
  Served s;
  auto res = s.client->Put("/api/project", "{\"schema_version\": 1}", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["error"], "SchemaViolation");
  res = s.client->Put("/api/project", serialize_project(s.project), "application/json");
  EXPECT_EQ(res->status, 200);
}

TEST(Service, StreamReplaysEventsAndStatus) {
  Served s;
  s.post("/api/run", {{"action", "until"}, {"t", 120000}});
  std::vector<json> records;
  std::string buffer;
  auto res = s.client->Get("/api/stream?from=0", [&](const char* data, std::size_t n) {
    buffer.append(data, n);
    std::size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      records.push_back(json::parse(buffer.substr(0, pos)));
      buffer.erase(0, pos + 1);
    }
    return records.size() < 4;
  });
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0]["type"], "status");
  EXPECT_EQ(records[1]["type"], "event");
  EXPECT_EQ(records[1]["fire_time_ms"], 105000);
  EXPECT_EQ(s.client->Get("/api/stream?from=x")->status, 400);
}

TEST(StreamHub, ReadFromCursor) {
  StreamHub hub;
  hub.publish("a");
  hub.publish("b");
  std::size_t cursor = 1;
  EXPECT_EQ(hub.read_from(cursor, std::chrono::milliseconds(0)), (std::vector<std::string>{"b"}));
  EXPECT_EQ(cursor, 2u);
  EXPECT_TRUE(hub.read_from(cursor, std::chrono::milliseconds(10)).empty());
}
