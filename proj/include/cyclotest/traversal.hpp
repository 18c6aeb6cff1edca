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

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclotest/contracts.hpp"

namespace cyclotest {

struct IterationVar {
  std::string name;
  std::vector<Value> domain;
};

// A test action family: one action per valuation of the iteration variables.
template <typename State>
struct ScenarioFunction {
  std::string name;
  std::vector<IterationVar> iteration_vars;
  // Empty means every valuation is enabled in every state.
  std::function<bool(const Valuation& iteration, const State& state)> filter;
  std::function<std::vector<StimulusRecord>(const Valuation& iteration)> body;
};

template <typename State>
struct Scenario {
  // Brings SUT and specification into the initial state. Its stimuli are
  // logged under the action "init".
  std::function<std::vector<StimulusRecord>()> init;
  std::function<State()> state;
  std::vector<ScenarioFunction<State>> functions;
  std::function<void()> finalize;
  std::function<std::string(const State&)> describe;
};

// name, or name(v=1,w=0) with every iteration variable.
inline std::string action_label(const std::string& name, const std::vector<IterationVar>& vars,
                                const Valuation& iteration) {
  if (vars.empty()) return name;
  std::string out = name + "(";
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += ",";
    out += vars[i].name + "=" + std::to_string(iteration.at(vars[i].name));
  }
  return out + ")";
}

// All valuations of `vars`, first variable varying slowest.
inline std::vector<Valuation> iteration_space(const std::vector<IterationVar>& vars) {
  std::vector<Valuation> out{Valuation{}};
  for (const auto& v : vars) {
    std::vector<Valuation> next;
    for (const auto& partial : out) {
      for (Value x : v.domain) {
        Valuation e = partial;
        e[v.name] = x;
        next.push_back(std::move(e));
      }
    }
    out = std::move(next);
  }
  return out;
}

struct LogEntry {
  std::string state;
  std::string action;
  StimulusRecord record;
};

struct TestLog {
  std::vector<LogEntry> entries;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const LogEntry& e) {
      return !e.record.verdict.pass();
    }));
  }

  static nlohmann::ordered_json entry_json(const LogEntry& e) {
    nlohmann::ordered_json j;
    j["cycle"] = e.record.verdict.cycle_index;
    j["state"] = e.state;
    j["action"] = e.action;
    j["verdict"] = to_string(e.record.verdict.kind);
    j["inputs"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e.record.inputs) j["inputs"][k] = v;
    if (!e.record.verdict.pass()) {
      j["detail"] = e.record.verdict.detail;
      if (!e.record.verdict.mismatches.empty()) j["mismatches"] = mismatches_json(e.record.verdict.mismatches);
    }
    return j;
  }

  // One JSON object per line.
  std::string to_jsonl() const {
    std::string out;
    for (const auto& e : entries) out += entry_json(e).dump() + "\n";
    return out;
  }
};

template <typename State>
struct ExploredAutomaton {
  struct Info {
    std::map<std::string, State> transitions;
    std::deque<std::string> pending;
  };
  std::map<State, Info> states;

  std::size_t transition_count() const {
    std::size_t n = 0;
    for (const auto& [s, info] : states) n += info.transitions.size();
    return n;
  }
  bool has_pending() const {
    return std::any_of(states.begin(), states.end(), [](const auto& kv) { return !kv.second.pending.empty(); });
  }
};

class TraversalError : public Error {
 public:
  TraversalError(const std::string& what, TestLog log, std::string dot)
      : Error(what), log_(std::move(log)), dot_(std::move(dot)) {}
  const TestLog& log() const { return log_; }
  // The automaton explored up to the failure, as DOT.
  const std::string& dot() const { return dot_; }

 private:
  TestLog log_;
  std::string dot_;
};

class NondeterminismDetected : public TraversalError {
 public:
  using TraversalError::TraversalError;
};

class StrandedPendingActions : public TraversalError {
 public:
  using TraversalError::TraversalError;
};

class BudgetExceeded : public TraversalError {
 public:
  using TraversalError::TraversalError;
};

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

// Nodes are numbered in state order; edges follow node then label order.
template <typename State>
std::string export_dot(const ExploredAutomaton<State>& a, const std::function<std::string(const State&)>& describe) {
  std::map<State, std::size_t> index;
  for (const auto& [s, info] : a.states) index.emplace(s, index.size());
  std::ostringstream out;
  out << "digraph {\n";
  for (const auto& [s, i] : index) out << "  s" << i << " [label=\"" << dot_escape(describe(s)) << "\"];\n";
  for (const auto& [s, info] : a.states) {
    for (const auto& [label, end] : info.transitions) {
      out << "  s" << index.at(s) << " -> s" << index.at(end) << " [label=\"" << dot_escape(label) << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

struct TraversalBudget {
  std::size_t max_actions = 100000;
  std::size_t max_states = 10000;
};

struct TraversalOptions {
  TraversalBudget budget;
  // Shuffles the order in which a new state's actions are tried.
  std::optional<std::uint64_t> seed;
};

template <typename State>
struct TraversalResult {
  TestLog log;
  ExploredAutomaton<State> automaton;
  std::size_t actions_applied = 0;
};

// Greedy on-the-fly traversal: apply an untried action of the current state
// when there is one, otherwise walk the shortest known path to the nearest
// state that still has untried actions.
template <typename State>
class Traversal {
 public:
  Traversal(Scenario<State> scenario, TraversalOptions options = {})
      : sc_(std::move(scenario)), options_(options) {
    if (!sc_.describe) sc_.describe = [](const State&) { return std::string("?"); };
    if (options_.seed) rng_.seed(*options_.seed);
    for (std::size_t f = 0; f < sc_.functions.size(); ++f) {
      for (auto& it : iteration_space(sc_.functions[f].iteration_vars)) {
        std::string label = action_label(sc_.functions[f].name, sc_.functions[f].iteration_vars, it);
        actions_.emplace(label, std::make_pair(f, std::move(it)));
        order_.push_back(label);
      }
    }
  }

  TraversalResult<State> run() {
    try {
      if (sc_.init) {
        for (auto& rec : sc_.init()) result_.log.entries.push_back({"-", "init", std::move(rec)});
      }
      State current = visit(sc_.state());
      for (;;) {
        auto& info = result_.automaton.states.at(current);
        if (!info.pending.empty()) {
          std::string label = info.pending.front();
          info.pending.pop_front();
          State next = visit(apply(current, label));
          result_.automaton.states.at(current).transitions.emplace(label, next);
          current = next;
          continue;
        }
        auto path = path_to_pending(current);
        if (!path) {
          if (result_.automaton.has_pending()) {
            fail<StrandedPendingActions>("actions left untried in states unreachable from " +
                                         sc_.describe(current) + " over explored transitions");
          }
          break;
        }
        for (const auto& label : *path) {
          State expected = result_.automaton.states.at(current).transitions.at(label);
          State got = apply(current, label);
          if (!(got == expected)) {
            fail<NondeterminismDetected>("transition " + sc_.describe(current) + " --" + label + "--> " +
                                         sc_.describe(got) + " conflicts with recorded " + sc_.describe(current) +
                                         " --" + label + "--> " + sc_.describe(expected));
          }
          current = got;
        }
      }
    } catch (...) {
      if (sc_.finalize) sc_.finalize();
      throw;
    }
    if (sc_.finalize) sc_.finalize();
    return std::move(result_);
  }

 private:
  template <typename E>
  [[noreturn]] void fail(const std::string& what) {
    throw E(what, result_.log, export_dot<State>(result_.automaton, sc_.describe));
  }

  State visit(State s) {
    auto [it, inserted] = result_.automaton.states.try_emplace(s);
    if (!inserted) return s;
    if (result_.automaton.states.size() > options_.budget.max_states) {
      fail<BudgetExceeded>("more than " + std::to_string(options_.budget.max_states) + " abstract states");
    }
    for (const auto& label : order_) {
      const auto& [f, iteration] = actions_.at(label);
      const auto& fn = sc_.functions[f];
      if (!fn.filter || fn.filter(iteration, s)) it->second.pending.push_back(label);
    }
    if (options_.seed) std::shuffle(it->second.pending.begin(), it->second.pending.end(), rng_);
    return s;
  }

  State apply(const State& from, const std::string& label) {
    if (++result_.actions_applied > options_.budget.max_actions) {
      fail<BudgetExceeded>("more than " + std::to_string(options_.budget.max_actions) + " test actions");
    }
    const auto& [f, iteration] = actions_.at(label);
    std::string from_text = sc_.describe(from);
    for (auto& rec : sc_.functions[f].body(iteration)) {
      result_.log.entries.push_back({from_text, label, std::move(rec)});
    }
    return sc_.state();
  }

  // BFS over explored transitions; among the nearest states with pending
  // actions the smallest wins, and paths prefer smaller labels.
  std::optional<std::vector<std::string>> path_to_pending(const State& start) const {
    const auto& states = result_.automaton.states;
    std::map<State, std::pair<State, std::string>> parent;
    std::set<State> seen{start};
    std::vector<State> frontier{start};
    while (!frontier.empty()) {
      std::vector<State> next;
      std::optional<State> target;
      for (const State& s : frontier) {
        for (const auto& [label, end] : states.at(s).transitions) {
          if (!seen.insert(end).second) continue;
          parent.emplace(end, std::make_pair(s, label));
          next.push_back(end);
          if (!states.at(end).pending.empty() && (!target || end < *target)) target = end;
        }
      }
      if (target) {
        std::vector<std::string> path;
        for (State s = *target; !(s == start);) {
          const auto& [p, label] = parent.at(s);
          path.push_back(label);
          s = p;
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      std::sort(next.begin(), next.end());
      frontier = std::move(next);
    }
    return std::nullopt;
  }

  Scenario<State> sc_;
  TraversalOptions options_;
  std::mt19937_64 rng_;
  std::map<std::string, std::pair<std::size_t, Valuation>> actions_;
  std::vector<std::string> order_;
  TraversalResult<State> result_;
};

template <typename State>
TraversalResult<State> traverse(Scenario<State> scenario, TraversalOptions options = {}) {
  return Traversal<State>(std::move(scenario), options).run();
}

}  // namespace cyclotest
