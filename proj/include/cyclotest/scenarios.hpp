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
#include <optional>
#include <string>
#include <vector>

#include "cyclotest/contracts.hpp"
#include "cyclotest/traversal.hpp"

namespace cyclotest {

// Iteration variables over the model inputs; a pinned input iterates over its
// pinned value only.
inline std::vector<IterationVar> input_iteration_vars(const dsl::ModelAst& ast, const Valuation& pinned = {}) {
  std::vector<IterationVar> vars;
  for (const auto& d : ast.inputs) {
    auto it = pinned.find(d.name);
    vars.push_back({d.name, it == pinned.end() ? d.type.domain() : std::vector<Value>{it->second}});
  }
  return vars;
}

// Specification state up to timing detail that cannot affect any future flag.
struct ConcreteState {
  Valuation state_vars;
  std::vector<std::optional<TimeMs>> elapsed;  // per predicate, capped

  friend auto operator<=>(const ConcreteState&, const ConcreteState&) = default;
};

inline ConcreteState concrete_state(const SpecificationState& s, const dsl::ExtractedModel& model, TimeMs period) {
  ConcreteState c{s.state_vars, {}};
  for (const auto& p : model.predicates) {
    const auto& ps = s.predicate_states.at(p.id);
    if (!ps.since_ms) {
      c.elapsed.emplace_back();
    } else {
      c.elapsed.push_back(std::min(s.sys_time_ms - *ps.since_ms, p.duration_ms + period));
    }
  }
  return c;
}

inline std::string describe(const ConcreteState& c) {
  std::string s = "[";
  for (std::size_t i = 0; i < c.elapsed.size(); ++i) {
    if (i) s += ",";
    s += c.elapsed[i] ? std::to_string(*c.elapsed[i]) : "-";
  }
  s += "]";
  if (!c.state_vars.empty()) s += format_valuation(c.state_vars);
  return s;
}

// One action per input valuation, in every state. Only practical when the
// durations are a few cycles long. The state before the first cycle is
// unreachable later on, so init spends one cycle on the first valuation.
inline Scenario<ConcreteState> concrete_scenario(Specification& spec, TimeMs period, const Valuation& pinned = {}) {
  Scenario<ConcreteState> sc;
  sc.init = [&spec, pinned] {
    return std::vector<StimulusRecord>{spec.step(iteration_space(input_iteration_vars(spec.model().rewritten, pinned)).front())};
  };
  sc.state = [&spec, period] { return concrete_state(spec.state(), spec.model(), period); };
  sc.describe = [](const ConcreteState& c) { return describe(c); };
  sc.functions.push_back({"step", input_iteration_vars(spec.model().rewritten, pinned), {},
                          [&spec](const Valuation& in) { return std::vector<StimulusRecord>{spec.step(in)}; }});
  return sc;
}

}  // namespace cyclotest
