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
#include <string>
#include <vector>

#include "cyclotest/contracts.hpp"
#include "cyclotest/reduction.hpp"
#include "cyclotest/scenarios.hpp"
#include "cyclotest/traversal.hpp"

namespace cyclotest::iron {

// Cycles a settle action holds still: enough for the longest predicate to fire.
inline std::size_t settle_cycles(const dsl::ExtractedModel& model, TimeMs period,
                                 HeldThreshold threshold = HeldThreshold::Inclusive) {
  TimeMs longest = 0;
  for (const auto& p : model.predicates) longest = std::max(longest, p.duration_ms);
  auto n = static_cast<std::size_t>((longest + period - 1) / period) + 1;
  return threshold == HeldThreshold::Strict ? n + 1 : n;
}

// States are projection membership vectors. Two action families:
//   step(move, position)  one cycle with the given inputs
//   settle(position)      hold still in `position` for `settle` cycles
// With neither shut-off projection holding (bits 0 and 2 clear), the state
// after a still cycle depends on timer values the vector hides, so still
// steps are filtered out there; settle covers that ground instead.
inline Scenario<MembershipVector> shipped_scenario(Specification& spec, std::vector<Projection> projections,
                                                   std::size_t settle, const Valuation& pinned = {}) {
  const auto& ast = spec.model().rewritten;
  if (projections.size() != 4 || !dsl::find_decl(ast.inputs, "move") || !dsl::find_decl(ast.inputs, "position")) {
    throw Error("the iron scenario needs the iron model (inputs move, position; 4 test cases)");
  }
  Scenario<MembershipVector> sc;
  sc.state = [&spec, projections, &ast] { return generalized_state(spec.state(), projections, ast); };
  sc.describe = [](const MembershipVector& v) { return v.str(); };

  auto vars = input_iteration_vars(ast, pinned);
  std::sort(vars.begin(), vars.end(), [](const IterationVar& a, const IterationVar& b) {
    return (a.name == "move") > (b.name == "move");
  });
  sc.functions.push_back({"step", vars,
                          [](const Valuation& it, const MembershipVector& s) {
                            return it.at("move") != 0 || s.bits[0] || s.bits[2];
                          },
                          [&spec](const Valuation& in) { return std::vector<StimulusRecord>{spec.step(in)}; }});

  std::vector<IterationVar> settle_vars;
  for (const auto& v : vars) {
    if (v.name == "position") settle_vars.push_back(v);
  }
  sc.functions.push_back({"settle", settle_vars, {}, [&spec, settle](const Valuation& it) {
                            std::vector<StimulusRecord> out;
                            for (std::size_t i = 0; i < settle; ++i) {
                              out.push_back(spec.step({{"move", 0}, {"position", it.at("position")}}));
                            }
                            return out;
                          }});
  return sc;
}

// "Standing upright and untouched for the long hold means no heating", checked
// against the model's own flags.
inline void register_shutoff_invariant(Specification& spec) {
  spec.register_invariant("upright-shutoff", {"move_eq_f_t2", "position_eq_t_t2", "heating"},
                          [](const SpecificationState& s) {
                            bool idle = s.time_flags.at("move_eq_f_t2") && s.time_flags.at("position_eq_t_t2");
                            return !idle || s.last_outputs.at("heating") == 0;
                          });
}

}  // namespace cyclotest::iron
