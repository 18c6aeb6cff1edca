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

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "cyclotest/traversal.hpp"
#include "support/random_automata.hpp"

namespace cyclotest {
namespace {

using ::testing::HasSubstr;
using testing::ExplicitAutomaton;

// Wraps an explicit automaton as an implicit scenario. `glitch` (state,
// action, occurrence) sends that occurrence of the pair elsewhere.
struct Harness {
  explicit Harness(const ExplicitAutomaton& a) : m(a) {}
  const ExplicitAutomaton& m;
  int current = 0;
  std::map<std::pair<int, int>, int> applied;
  std::optional<std::tuple<int, int, int>> glitch;

  Scenario<int> scenario() {
    Scenario<int> sc;
    sc.init = [this] {
      current = 0;
      return std::vector<StimulusRecord>{};
    };
    sc.state = [this] { return current; };
    sc.describe = [](int s) { return "q" + std::to_string(s); };
    std::vector<Value> domain(m.actions());
    std::iota(domain.begin(), domain.end(), 0);
    sc.functions.push_back({"act", {{"k", domain}}, {}, [this](const Valuation& it) {
                              int k = static_cast<int>(it.at("k"));
                              int times = ++applied[{current, k}];
                              int next = m.next[current][k];
                              if (glitch && std::get<0>(*glitch) == current && std::get<1>(*glitch) == k &&
                                  std::get<2>(*glitch) == times) {
                                next = (next + 1) % m.states();
                              }
                              current = next;
                              return std::vector<StimulusRecord>{};
                            }});
    return sc;
  }
};

TEST(Traverse, RandomStronglyConnectedAutomata) {
  std::mt19937_64 rng(20261019);
  for (int round = 0; round < 100; ++round) {
    ExplicitAutomaton m = testing::random_strongly_connected(rng);
    ASSERT_TRUE(testing::strongly_connected(m));
    Harness h{m};
    auto r = traverse(h.scenario());
    ASSERT_EQ(static_cast<int>(r.automaton.states.size()), m.states());
    EXPECT_EQ(static_cast<int>(r.automaton.transition_count()), m.states() * m.actions());
    EXPECT_FALSE(r.automaton.has_pending());
    for (const auto& [s, info] : r.automaton.states) {
      for (int k = 0; k < m.actions(); ++k) {
        EXPECT_EQ(info.transitions.at("act(k=" + std::to_string(k) + ")"), m.next[s][k]);
        EXPECT_GE((h.applied[{s, k}]), 1);
      }
    }
  }
}

TEST(Traverse, InjectedNondeterminismDetected) {
  std::mt19937_64 rng(77);
  int injected = 0;
  for (int round = 0; round < 100; ++round) {
    ExplicitAutomaton m = testing::random_strongly_connected(rng);
    Harness clean{m};
    traverse(clean.scenario());
    std::vector<std::pair<int, int>> repeated;
    for (const auto& [pair, n] : clean.applied) {
      if (n >= 2) repeated.push_back(pair);
    }
    if (repeated.empty()) continue;
    auto [s, k] = repeated[rng() % repeated.size()];
    Harness faulty{m};
    faulty.glitch = std::make_tuple(s, k, 2);
    ++injected;
    EXPECT_THROW(traverse(faulty.scenario()), NondeterminismDetected) << "round " << round;
  }
  EXPECT_GT(injected, 50);
}

TEST(Traverse, FreshStateEveryCallExceedsBudget) {
  int counter = 0;
  Scenario<int> sc;
  sc.state = [&] { return counter++; };
  sc.functions.push_back({"tick", {}, {}, [](const Valuation&) { return std::vector<StimulusRecord>{}; }});
  try {
    traverse(sc, {{.max_actions = 1000, .max_states = 50}, {}});
    FAIL();
  } catch (const BudgetExceeded& e) {
    EXPECT_THAT(e.what(), HasSubstr("more than 50 abstract states"));
    EXPECT_THAT(e.dot(), HasSubstr("digraph"));
  }
}

TEST(Traverse, ActionBudget) {
  ExplicitAutomaton m{{{1, 0}, {0, 1}}};
  Harness h{m};
  EXPECT_THROW(traverse(h.scenario(), {{.max_actions = 2}, {}}), BudgetExceeded);
}

TEST(Traverse, StrandedPendingActions) {
  // q1 is a sink: q0's second action is never reachable again.
  ExplicitAutomaton m{{{1, 0}, {1, 1}}};
  Harness h{m};
  EXPECT_THROW(traverse(h.scenario()), StrandedPendingActions);
}

TEST(Traverse, FiltersRespected) {
  ExplicitAutomaton m{{{1, 0, 1}, {0, 1, 0}}};
  Harness h{m};
  auto sc = h.scenario();
  sc.functions[0].filter = [](const Valuation& it, int s) { return !(s == 1 && it.at("k") == 2); };
  auto r = traverse(sc);
  EXPECT_EQ(r.automaton.states.at(1).transitions.count("act(k=2)"), 0u);
  EXPECT_EQ((h.applied[{1, 2}]), 0);
  EXPECT_EQ(r.automaton.transition_count(), 5u);
}

TEST(Traverse, InitAndFinalizeCalled) {
  ExplicitAutomaton m{{{1, 0}, {0, 1}}};
  int finalized = 0;
  Harness ok(m);
  auto sc = ok.scenario();
  sc.finalize = [&] { ++finalized; };
  traverse(sc);
  EXPECT_EQ(finalized, 1);

  // Reaching q1's second action replays q0 --act(k=0)--> q1.
  Harness bad(m);
  bad.glitch = std::make_tuple(0, 0, 2);
  sc = bad.scenario();
  sc.finalize = [&] { ++finalized; };
  EXPECT_THROW(traverse(sc), NondeterminismDetected);
  EXPECT_EQ(finalized, 2);
}

TEST(Traverse, SeedShufflesButStillCovers) {
  std::mt19937_64 rng(5);
  ExplicitAutomaton m = testing::random_strongly_connected(rng, 10, 10, 4, 4);
  Harness a{m}, b{m};
  auto plain = traverse(a.scenario());
  auto shuffled = traverse(b.scenario(), {{}, 9});
  EXPECT_EQ(shuffled.automaton.transition_count(), 40u);
  EXPECT_EQ(export_dot<int>(plain.automaton, [](int s) { return std::to_string(s); }),
            export_dot<int>(shuffled.automaton, [](int s) { return std::to_string(s); }));
}

TEST(Traverse, Deterministic) {
  std::mt19937_64 rng(11);
  ExplicitAutomaton m = testing::random_strongly_connected(rng);
  Harness a{m}, b{m};
  EXPECT_EQ(traverse(a.scenario()).actions_applied, traverse(b.scenario()).actions_applied);
  EXPECT_EQ(a.applied, b.applied);
}

TEST(Labels, WithAndWithoutIterationVars) {
  EXPECT_EQ(action_label("reset", {}, {}), "reset");
  EXPECT_EQ(action_label("step", {{"move", {0, 1}}, {"position", {0, 1}}}, {{"move", 1}, {"position", 0}}),
            "step(move=1,position=0)");
  auto space = iteration_space({{"a", {0, 1}}, {"b", {5, 6, 7}}});
  ASSERT_EQ(space.size(), 6u);
  EXPECT_EQ(space[1], (Valuation{{"a", 0}, {"b", 6}}));
  EXPECT_EQ(iteration_space({}).size(), 1u);
}

TEST(ExportDot, Empty) {
  ExploredAutomaton<int> a;
  EXPECT_EQ(export_dot<int>(a, [](int) { return ""; }), "digraph {\n}\n");
}

TEST(ExportDot, EscapesAndOrders) {
  ExploredAutomaton<std::string> a;
  a.states["b"].transitions.emplace("say(\"hi\")", "a");
  a.states["a"].transitions.emplace("z", "b");
  a.states["a"].transitions.emplace("y", "a");
  EXPECT_EQ(export_dot<std::string>(a, [](const std::string& s) { return "\"" + s + "\""; }),
            "digraph {\n"
            "  s0 [label=\"\\\"a\\\"\"];\n"
            "  s1 [label=\"\\\"b\\\"\"];\n"
            "  s0 -> s0 [label=\"y\"];\n"
            "  s0 -> s1 [label=\"z\"];\n"
            "  s1 -> s0 [label=\"say(\\\"hi\\\")\"];\n"
            "}\n");
}

TEST(TestLog, JsonLines) {
  TestLog log;
  StimulusRecord ok{{{"move", 0}}, {VerdictKind::Pass, "", 3, {}}, {}, {}};
  StimulusRecord bad{{{"move", 1}}, {VerdictKind::PostconditionFailure, "differs", 4, {{"heating", 0, 1}}}, {}, {}};
  log.entries.push_back({"(0,1)", "step(move=0)", ok});
  log.entries.push_back({"(0,1)", "step(move=1)", bad});
  EXPECT_EQ(log.to_jsonl(),
            R"j({"cycle":3,"state":"(0,1)","action":"step(move=0)","verdict":"pass","inputs":{"move":0}})j"
            "\n"
            R"j({"cycle":4,"state":"(0,1)","action":"step(move=1)","verdict":"postcondition_failure","inputs":{"move":1},"detail":"differs","mismatches":[{"name":"heating","expected":0,"actual":1}]})j"
            "\n");
  EXPECT_EQ(log.failures(), 1u);
}

}  // namespace
}  // namespace cyclotest
