#include <gtest/gtest.h>

#include <numeric>

#include "shsim/timeline.hpp"
#include "support/demo.hpp"
#include "support/oracle.hpp"

using namespace shsim;

namespace {

std::vector<VirtualTime> times(const std::vector<SimEvent>& events) {
  std::vector<VirtualTime> out;
  for (const auto& e : events) out.push_back(e.fire_time);
  return out;
}

std::vector<oracle::Fired> rendered(const std::vector<SimEvent>& events) {
  std::vector<oracle::Fired> out;
  for (const auto& e : events) {
    out.push_back({e.fire_time, e.action.device, e.action.sensor, encode_value(e.action.value),
                   e.provenance.to_string()});
  }
  return out;
}

}  // namespace

TEST(Timeline, DelaysAccumulate) {
  auto d = demo::make();
  demo::add_morning(d, std::nullopt);
  const auto events = compile_timeline(d.project, 1000000);
  EXPECT_EQ(times(events), (std::vector<VirtualTime>{105000, 115000}));
  EXPECT_EQ(events[0].action.device, d.heater);
  EXPECT_EQ(events[1].action.value, SensorValue{StateValue{"On"}});
}

TEST(Timeline, RepeatingScenario) {
  auto d = demo::make();
  demo::add_morning(d, 60000);
  const auto events = compile_timeline(d.project, 250000);
  EXPECT_EQ(times(events), (std::vector<VirtualTime>{105000, 115000, 165000, 175000, 225000, 235000}));
  EXPECT_EQ(events[2].provenance.to_string(), "scenario:" + d.project.schedule.scenarios[0].id + "#1@0");
}

TEST(Timeline, ZeroDelaysKeepEntryOrder) {
  auto d = demo::make();
  d.project.schedule.define_scenario("Burst", d.at(10), {},
                                     {{0, TaskRef{d.light_on}}, {0, TaskRef{d.light_off}}, {0, TaskRef{d.heat}}});
  const auto events = compile_timeline(d.project, 60000);
  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(times(events), (std::vector<VirtualTime>{10000, 10000, 10000}));
  EXPECT_EQ(events[0].action.value, SensorValue{StateValue{"On"}});
  EXPECT_EQ(events[1].action.value, SensorValue{StateValue{"Off"}});
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].seq, i);
}

TEST(Timeline, NestedScenarioStartsAtParentCursor) {
  auto d = demo::make();
  auto& s = d.project.schedule;
  const auto inner = s.define_scenario("Inner", d.at(5000), {}, {{2000, TaskRef{d.light_on}}, {3000, TaskRef{d.light_off}}});
  s.scenarios[0].enabled = false;
  s.define_scenario("Outer", d.at(10), {}, {{1000, TaskRef{d.heat}}, {4000, ScenarioRef{inner}}, {1000, TaskRef{d.heat}}});
  const auto events = compile_timeline(d.project, 60000);
  // Inner's own enabled flag does not matter when included.
  std::vector<VirtualTime> expected{11000, 16000, 17000, 20000};
  EXPECT_EQ(times(events), expected);
  EXPECT_EQ(events[1].provenance.entry_path, (std::vector<std::size_t>{2}));
  EXPECT_EQ(events[2].provenance.entry_path, (std::vector<std::size_t>{1, 0}));
}

TEST(Timeline, StandaloneTasksAndHorizonEdge) {
  auto d = demo::make();
  auto& s = d.project.schedule;
  s.define_task(d.project.house, "Late", {d.heater, d.temp, NumberValue{30}}, d.at(60), "late");
  s.define_task(d.project.house, "Early", {d.heater, d.temp, NumberValue{10}}, d.at(-5), "early");
  EXPECT_EQ(times(compile_timeline(d.project, 60000)), (std::vector<VirtualTime>{60000}));
  EXPECT_TRUE(compile_timeline(d.project, 59999).empty());
}

TEST(Timeline, DisabledScenariosDoNotFire) {
  auto d = demo::make();
  demo::add_morning(d, 60000);
  d.project.schedule.scenarios[0].enabled = false;
  EXPECT_TRUE(compile_timeline(d.project, 1000000).empty());
}

TEST(Timeline, PrefixSumLaw) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = gen::random_project(rng, 3600000);
    for (const auto& sc : p.schedule.scenarios) {
      if (sc.entries.empty()) continue;
      bool flat = true;
      for (const auto& e : sc.entries) flat &= std::holds_alternative<TaskRef>(e.target);
      if (!flat) continue;
      const auto chain = flatten_scenario(p.schedule, sc);
      std::int64_t sum = 0;
      for (std::size_t k = 0; k < chain.size(); ++k) {
        sum += sc.entries[k].delay_ms;
        EXPECT_EQ(chain[k].offset, sum);
      }
    }
  }
}

TEST(Timeline, RepeatLaw) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = gen::random_project(rng, 3600000);
    const auto events = compile_timeline(p, 3600000);
    std::map<std::string, std::vector<VirtualTime>> by_entry;
    for (const auto& e : events) {
      if (e.provenance.kind != SourceKind::Scenario) continue;
      by_entry[e.provenance.source_id + "@" + oracle::join_path(e.provenance.entry_path)].push_back(e.fire_time);
    }
    for (const auto& [key, ts] : by_entry) {
      const auto id = key.substr(0, key.find('@'));
      const auto* sc = p.schedule.find_scenario(id);
      ASSERT_NE(sc, nullptr);
      for (std::size_t i = 1; i < ts.size(); ++i) {
        ASSERT_TRUE(sc->repeat_ms);
        EXPECT_EQ(ts[i] - ts[i - 1], *sc->repeat_ms);
      }
    }
  }
}

TEST(Timeline, OrderedAndSequenced) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = gen::random_project(rng, 1800000);
    const auto events = compile_timeline(p, 1800000);
    for (std::size_t i = 0; i < events.size(); ++i) {
      EXPECT_EQ(events[i].seq, i);
      if (i) EXPECT_LE(events[i - 1].fire_time, events[i].fire_time);
      EXPECT_LE(events[i].fire_time, 1800000);
    }
  }
}

TEST(Timeline, MatchesBruteForceWalker) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::int64_t horizon = gen::uniform(rng, 1, 3600) * 1000;
    const auto p = gen::random_project(rng, horizon);
    ASSERT_EQ(rendered(compile_timeline(p, horizon)), oracle::walk(p, horizon, &encode_value)) << "trial " << trial;
  }
}
