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

#include <gtest/gtest.h>

#include "cyclotest/iron/sut.hpp"

namespace cyclotest::iron {
namespace {

// Drives a bare SUT at a 1 s period and returns heating per cycle.
std::vector<Value> run(Mutant m, const std::vector<std::pair<int, int>>& inputs, IronTiming timing = {}) {
  IronSut sut(timing, m);
  std::vector<Value> out;
  TimeMs t = 0;
  for (auto [move, position] : inputs) {
    sut.set_inputs({{"move", move}, {"position", position}});
    sut.step(t);
    t += timing.cycle_period_ms;
    out.push_back(sut.outputs().at("heating"));
  }
  return out;
}

std::vector<std::pair<int, int>> repeat(int move, int position, int n) {
  return std::vector<std::pair<int, int>>(static_cast<std::size_t>(n), {move, position});
}

// First cycle with heating off, or -1.
int first_off(const std::vector<Value>& h) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] == 0) return static_cast<int>(i);
  }
  return -1;
}

TEST(IronSut, MoveKeepsHeating) {
  for (int p = 0; p <= 1; ++p) {
    for (Value h : run(Mutant::None, repeat(1, p, 1000))) EXPECT_EQ(h, 1);
  }
}

TEST(IronSut, FlatShutsOffAtSixtySeconds) {
  EXPECT_EQ(first_off(run(Mutant::None, repeat(0, 0, 100))), 60);
}

TEST(IronSut, UprightShutsOffAtFifteenMinutes) {
  EXPECT_EQ(first_off(run(Mutant::None, repeat(0, 1, 1000))), 900);
}

TEST(IronSut, MoveRestartsTimer) {
  auto in = repeat(0, 0, 30);
  in.push_back({1, 0});
  auto rest = repeat(0, 0, 100);
  in.insert(in.end(), rest.begin(), rest.end());
  EXPECT_EQ(first_off(run(Mutant::None, in)), 31 + 60);
}

TEST(IronSut, PositionChangeRestartsTimer) {
  auto in = repeat(0, 1, 30);
  auto rest = repeat(0, 0, 100);
  in.insert(in.end(), rest.begin(), rest.end());
  EXPECT_EQ(first_off(run(Mutant::None, in)), 30 + 60);
}

TEST(IronSut, SignatureHasNoState) {
  IronSut sut;
  EXPECT_TRUE(sut.signature().state.empty());
  EXPECT_TRUE(sut.visible_state().empty());
}

TEST(Mutants, M1Complements) {
  auto good = run(Mutant::None, repeat(0, 0, 100));
  auto bad = run(Mutant::M1, repeat(0, 0, 100));
  for (std::size_t i = 0; i < good.size(); ++i) EXPECT_EQ(bad[i], 1 - good[i]);
}

TEST(Mutants, M2OneCycleEarly) {
  EXPECT_EQ(first_off(run(Mutant::M2, repeat(0, 1, 1000))), 899);
  EXPECT_EQ(first_off(run(Mutant::M2, repeat(0, 0, 100))), 60);
}

TEST(Mutants, M3DiffersOnlyOnBoundaryCycle) {
  auto good = run(Mutant::None, repeat(0, 0, 100));
  auto bad = run(Mutant::M3, repeat(0, 0, 100));
  for (std::size_t i = 0; i < good.size(); ++i) {
    if (i == 60) {
      EXPECT_NE(good[i], bad[i]);
    } else {
      EXPECT_EQ(good[i], bad[i]) << i;
    }
  }
}

TEST(Mutants, M4KeepsStillTimerOnMove) {
  auto in = repeat(0, 0, 70);
  in.push_back({1, 0});
  EXPECT_EQ(run(Mutant::None, in).back(), 1);
  EXPECT_EQ(run(Mutant::M4, in).back(), 0);
}

// Each branch now waits for the opposite posture, so heating never stops.
TEST(Mutants, M5InvertedPositionTest) {
  EXPECT_EQ(first_off(run(Mutant::M5, repeat(0, 1, 1000))), -1);
  EXPECT_EQ(first_off(run(Mutant::M5, repeat(0, 0, 1000))), -1);
}

TEST(Mutants, ParseNames) {
  EXPECT_EQ(parse_mutant("M3"), Mutant::M3);
  EXPECT_EQ(parse_mutant("none"), Mutant::None);
  EXPECT_EQ(parse_mutant("Mnd"), Mutant::Mnd);
  EXPECT_THROW(parse_mutant("M9"), UnknownMutant);
  for (Mutant m : {Mutant::None, Mutant::M1, Mutant::M5, Mutant::Mnd}) EXPECT_EQ(parse_mutant(mutant_name(m)), m);
}

TEST(Mutants, StallingClockRepeatsTime) {
  auto host = make_host(Mutant::Mnd);
  std::vector<TimeMs> times;
  for (int i = 0; i < 8; ++i) times.push_back(host->run_cycle({{"move", 0}, {"position", 0}}).sys_time_ms);
  EXPECT_EQ(times, (std::vector<TimeMs>{0, 1000, 2000, 3000, 4000, 5000, 5000, 6000}));
}

}  // namespace
}  // namespace cyclotest::iron
