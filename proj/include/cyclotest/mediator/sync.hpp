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

#include <cstdint>
#include <string>

#include "cyclotest/dsl/predicates.hpp"
#include "cyclotest/interpreter.hpp"
#include "cyclotest/mediator/protocol.hpp"
#include "cyclotest/temporal.hpp"

namespace cyclotest {

// Model-side view of the CSUT between cycles.
struct SpecificationState {
  Valuation state_vars;
  PredicateStates predicate_states;
  TimeFlags time_flags;
  Valuation last_outputs;
  TimeMs sys_time_ms = 0;
  std::uint64_t cycles = 0;

  friend bool operator==(const SpecificationState&, const SpecificationState&) = default;
};

inline SpecificationState initial_specification_state(const dsl::ExtractedModel& model) {
  SpecificationState s;
  s.state_vars = dsl::initial_state(model.rewritten);
  s.predicate_states = make_predicate_states(model);
  s.time_flags = compute_time_flags(s.predicate_states, 0);
  for (auto& [id, v] : s.time_flags) v = false;
  return s;
}

class UnknownStateVar : public mediator::MediatorError {
 public:
  explicit UnknownStateVar(const std::string& name)
      : MediatorError("observation reports unknown state variable '" + name + "'") {}
};

struct SyncResult {
  SpecificationState state;
  EvalResult reference;
};

namespace mediator {

// Brings the specification state past one observed cycle. Predicates are
// stepped with the literal values of this cycle's inputs and pre-state at the
// SUT's own system time; the model then runs on pre-state values and the
// resulting time flags. Readable state comes from the observation, hidden
// state from the model, assuming the CSUT is correct.
inline SyncResult sync_state(const SpecificationState& pre, const CycleObservation& obs,
                             const Valuation& inputs, const dsl::ExtractedModel& model,
                             HeldThreshold threshold = HeldThreshold::Inclusive) {
  const auto& ast = model.rewritten;
  for (const auto& [name, v] : obs.state) {
    const auto* d = dsl::find_decl(ast.state_vars, name);
    if (!d || d->visibility != dsl::Visibility::Readable) throw UnknownStateVar(name);
  }

  SyncResult r{pre, {}};
  Valuation env = inputs;
  env.insert(pre.state_vars.begin(), pre.state_vars.end());
  step_all(r.state.predicate_states, env, obs.sys_time_ms);
  r.state.time_flags = compute_time_flags(r.state.predicate_states, obs.sys_time_ms, threshold);
  r.reference = eval_model(ast, inputs, pre.state_vars, r.state.time_flags);

  for (const auto& d : ast.state_vars) {
    if (d.visibility == dsl::Visibility::Readable) {
      auto it = obs.state.find(d.name);
      if (it == obs.state.end()) throw MissingBinding(d.name);
      r.state.state_vars[d.name] = it->second;
    } else {
      r.state.state_vars[d.name] = r.reference.state_post.at(d.name);
    }
  }
  r.state.last_outputs = obs.outputs;
  r.state.sys_time_ms = obs.sys_time_ms;
  r.state.cycles = pre.cycles + 1;
  return r;
}

}  // namespace mediator
}  // namespace cyclotest
