// Copyright 2026 The Cyclotest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <thread>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "cyclotest/kernel.hpp"

namespace cyclotest {
namespace {

using ::testing::ElementsAre;
using namespace std::chrono_literals;

TEST(Kernel, SimulatedTimeAdvancesByPeriod) {
  Kernel k({.cycle_period_ms = 100});
  std::vector<TimeMs> seen;
  k.register_subsystem("csut", [&](const CycleContext& c) {
    std::this_thread::sleep_for(2ms);
    seen.push_back(c.sys_time_ms());
  });
  for (int i = 0; i < 4; ++i) k.run_cycle();
  EXPECT_THAT(seen, ElementsAre(0, 100, 200, 300));
  EXPECT_EQ(k.last_sys_time(), 300);
  EXPECT_EQ(k.next_cycle(), 4u);
}

TEST(Kernel, SysTimeConstantWithinCycle) {
  Kernel k({.cycle_period_ms = 10});
  std::vector<std::pair<std::uint64_t, TimeMs>> seen;
  for (const char* id : {"a", "b", "c"}) {
    k.register_subsystem(id, [&](const CycleContext& c) {
      seen.emplace_back(c.cycle_index(), c.sys_time_ms());
    });
  }
  for (int i = 0; i < 3; ++i) k.run_cycle();
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i].second, seen[i - i % 3].second);
    EXPECT_EQ(seen[i].second, static_cast<TimeMs>(seen[i].first) * 10);
  }
}

TEST(Kernel, SubsystemsRunInRegistrationOrder) {
  Kernel k({.cycle_period_ms = 1, .testing_mode = true});
  std::vector<std::string> calls;
  for (const char* id : {"set-mediator", "csut", "get-mediator"}) {
    k.register_subsystem(id, [&calls, id](const CycleContext&) { calls.push_back(id); });
  }
  k.run_cycle();
  EXPECT_THAT(calls, ElementsAre("set-mediator", "csut", "get-mediator"));
}

TEST(Kernel, TestingModeRequiresMediatorsAtEnds) {
  Kernel k({.cycle_period_ms = 1, .testing_mode = true});
  k.register_subsystem("csut", [](const CycleContext&) {});
  EXPECT_THROW(k.run_cycle(), Error);
}

TEST(Kernel, SingleSubsystemIsLegal) {
  Kernel k({.cycle_period_ms = 1});
  int n = 0;
  k.register_subsystem("csut", [&](const CycleContext&) { ++n; });
  k.run_cycle();
  EXPECT_EQ(n, 1);
}

TEST(Kernel, EmptyKernelCompletes) {
  Kernel k({.cycle_period_ms = 50, .streaming = false});
  CycleRecord r = k.run_cycle();
  EXPECT_FALSE(r.overrun);
  EXPECT_LT(r.exec_time_us, 50000);
}

TEST(Kernel, DuplicateIdRejected) {
  Kernel k({.cycle_period_ms = 1});
  k.register_subsystem("csut", [](const CycleContext&) {});
  EXPECT_THROW(k.register_subsystem("csut", [](const CycleContext&) {}), DuplicateId);
}

TEST(Kernel, RegistrationAfterStartRejected) {
  Kernel k({.cycle_period_ms = 1});
  k.run_cycle();
  EXPECT_THROW(k.register_subsystem("late", [](const CycleContext&) {}), RegistrationClosed);
}

TEST(Kernel, NonPositivePeriodRejected) {
  EXPECT_THROW(Kernel({.cycle_period_ms = 0}), Error);
}

TEST(Kernel, OverrunFlaggedWhenNotStreaming) {
  Kernel k({.cycle_period_ms = 100, .streaming = false, .writable_sys_time = false});
  k.register_subsystem("slow", [](const CycleContext&) { std::this_thread::sleep_for(150ms); });
  CycleRecord r = k.run_cycle();
  EXPECT_TRUE(r.overrun);
  EXPECT_GE(r.exec_time_us, 150000);
  EXPECT_TRUE(k.any_overrun());
}

TEST(Kernel, OverrunNotFlaggedWhenStreaming) {
  Kernel k({.cycle_period_ms = 10});
  k.register_subsystem("slow", [](const CycleContext&) { std::this_thread::sleep_for(20ms); });
  EXPECT_FALSE(k.run_cycle().overrun);
  EXPECT_FALSE(k.any_overrun());
}

TEST(Kernel, HardOverrunFailure) {
  Kernel k({.cycle_period_ms = 5, .streaming = false, .fail_on_overrun = true});
  k.register_subsystem("slow", [](const CycleContext&) { std::this_thread::sleep_for(20ms); });
  EXPECT_THROW(k.run_cycle(), OverrunError);
}

TEST(Kernel, NonStreamingWaitsOutPeriod) {
  Kernel k({.cycle_period_ms = 30, .streaming = false});
  auto start = std::chrono::steady_clock::now();
  k.run_cycle();
  k.run_cycle();
  EXPECT_GE(std::chrono::steady_clock::now() - start, 60ms);
}

TEST(Kernel, StreamingToggleMidRun) {
  Kernel k({.cycle_period_ms = 200, .streaming = false});
  k.run_cycle();
  k.set_streaming(true);
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 5; ++i) k.run_cycle();
  EXPECT_LT(std::chrono::steady_clock::now() - start, 200ms);
  EXPECT_EQ(k.last_sys_time(), 1000);
}

TEST(Kernel, WallClockModeReadsElapsedTime) {
  Kernel k({.cycle_period_ms = 20, .streaming = false, .writable_sys_time = false});
  k.run_cycle();
  CycleRecord r = k.run_cycle();
  EXPECT_GE(r.sys_time_ms, 19);
}

TEST(Kernel, PanicCarriesSubsystemId) {
  Kernel k({.cycle_period_ms = 1});
  k.register_subsystem("csut", [](const CycleContext&) { throw std::runtime_error("boom"); });
  try {
    k.run_cycle();
    FAIL();
  } catch (const SubsystemPanic& e) {
    EXPECT_EQ(e.subsystem(), "csut");
    EXPECT_THAT(e.what(), ::testing::HasSubstr("boom"));
  }
}

TEST(Kernel, StopRequestPassesThrough) {
  Kernel k({.cycle_period_ms = 1});
  k.register_subsystem("csut", [](const CycleContext&) { throw StopRequested{}; });
  EXPECT_THROW(k.run_cycle(), StopRequested);
}

TEST(Kernel, DeterministicRecords) {
  auto run = [] {
    Kernel k({.cycle_period_ms = 7});
    Value acc = 0;
    k.register_subsystem("csut", [&](const CycleContext& c) { acc = acc * 31 + c.sys_time_ms(); });
    std::vector<std::string> log;
    for (int i = 0; i < 20; ++i) log.push_back(cycle_record_json(k.run_cycle(), true));
    log.push_back(std::to_string(acc));
    return log;
  };
  EXPECT_EQ(run(), run());
}

TEST(Kernel, CycleRecordJson) {
  CycleRecord r{3, 300, 12, false};
  EXPECT_EQ(cycle_record_json(r, true), R"({"cycle":3,"sys_time_ms":300,"overrun":false})");
  EXPECT_EQ(cycle_record_json(r, false),
            R"({"cycle":3,"sys_time_ms":300,"exec_time_us":12,"overrun":false})");
}

TEST(Kernel, CustomClock) {
  Kernel k({.cycle_period_ms = 10});
  k.set_clock([](std::uint64_t i, TimeMs prev, TimeMs p) { return i % 2 ? prev : prev + p; });
  std::vector<TimeMs> seen;
  k.set_cycle_observer([&](const CycleRecord& r) { seen.push_back(r.sys_time_ms); });
  for (int i = 0; i < 4; ++i) k.run_cycle();
  EXPECT_THAT(seen, ElementsAre(10, 10, 20, 20));
}

}  // namespace
}  // namespace cyclotest
