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

#include <map>
#include <optional>
#include <string>

#include "cyclotest/common.hpp"
#include "cyclotest/dsl/predicates.hpp"

namespace cyclotest {

using dsl::Literal;
using dsl::TemporalPredicateDecl;

class TimeRegression : public Error {
 public:
  TimeRegression(TimeMs previous, TimeMs now)
      : Error("system time went backwards: " + std::to_string(now) + " < " +
              std::to_string(previous)) {}
};

// Inclusive fires on the cycle where elapsed == duration; Strict one cycle later.
enum class HeldThreshold { Inclusive, Strict };

// Tracking record of one temporal predicate. `since_ms` is the system time of
// the first cycle of the current holding run, or empty when the literal did
// not hold at the last update.
struct PredicateState {
  const TemporalPredicateDecl* predicate = nullptr;
  std::optional<TimeMs> since_ms;
  std::optional<TimeMs> last_update_ms;

  friend bool operator==(const PredicateState&, const PredicateState&) = default;
};

inline PredicateState make_predicate_state(const TemporalPredicateDecl& decl) {
  return PredicateState{&decl, std::nullopt, std::nullopt};
}

inline PredicateState step_predicate(PredicateState ps, bool holds, TimeMs sys_time_ms) {
  if (ps.last_update_ms && sys_time_ms < *ps.last_update_ms) {
    throw TimeRegression(*ps.last_update_ms, sys_time_ms);
  }
  ps.last_update_ms = sys_time_ms;
  if (!holds) {
    ps.since_ms.reset();
  } else if (!ps.since_ms) {
    ps.since_ms = sys_time_ms;
  }
  return ps;
}

inline bool is_satisfied(const PredicateState& ps, TimeMs sys_time_ms,
                         HeldThreshold threshold = HeldThreshold::Inclusive) {
  if (!ps.since_ms) return false;
  TimeMs elapsed = sys_time_ms - *ps.since_ms;
  return threshold == HeldThreshold::Inclusive ? elapsed >= ps.predicate->duration_ms
                                               : elapsed > ps.predicate->duration_ms;
}

inline bool literal_holds(const Literal& lit, const Valuation& env) {
  auto it = env.find(lit.variable);
  if (it == env.end()) throw MissingBinding(lit.variable);
  return it->second == lit.expected;
}

using TimeFlags = std::map<std::string, bool>;
using PredicateStates = std::map<std::string, PredicateState>;

inline PredicateStates make_predicate_states(const dsl::ExtractedModel& model) {
  PredicateStates states;
  for (const auto& p : model.predicates) states.emplace(p.id, make_predicate_state(p));
  return states;
}

// Steps every predicate with its literal evaluated over `env`.
inline void step_all(PredicateStates& states, const Valuation& env, TimeMs sys_time_ms) {
  for (auto& [id, ps] : states) {
    ps = step_predicate(ps, literal_holds(ps.predicate->literal, env), sys_time_ms);
  }
}

inline TimeFlags compute_time_flags(const PredicateStates& states, TimeMs sys_time_ms,
                                    HeldThreshold threshold = HeldThreshold::Inclusive) {
  TimeFlags flags;
  for (const auto& [id, ps] : states) flags[id] = is_satisfied(ps, sys_time_ms, threshold);
  return flags;
}

}  // namespace cyclotest
