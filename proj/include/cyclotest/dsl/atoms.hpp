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

#include <span>
#include <vector>

#include "cyclotest/dsl/ast.hpp"

namespace cyclotest::dsl {

// Atomic conditions of a decision: maximal subexpressions that are not
// built with !, && or ||, in left-to-right order. Repeated occurrences are
// separate conditions.
inline void collect_atoms(const Expr& e, std::vector<const Expr*>& out) {
  if (e.is_connective()) {
    for (const auto& a : e.args) collect_atoms(a, out);
  } else {
    out.push_back(&e);
  }
}

inline std::vector<const Expr*> decision_atoms(const Expr& condition) {
  std::vector<const Expr*> out;
  collect_atoms(condition, out);
  return out;
}

namespace detail {

inline bool outcome_from(const Expr& e, std::span<const bool> values, std::size_t& next) {
  switch (e.kind) {
    case ExprKind::Not:
      return !outcome_from(e.args[0], values, next);
    case ExprKind::And: {
      bool r = true;
      for (const auto& a : e.args) r = outcome_from(a, values, next) && r;
      return r;
    }
    case ExprKind::Or: {
      bool r = false;
      for (const auto& a : e.args) r = outcome_from(a, values, next) || r;
      return r;
    }
    default:
      return values[next++];
  }
}

}  // namespace detail

// Decision outcome for a full vector of atom values (one per decision_atoms entry).
inline bool decision_outcome(const Expr& condition, std::span<const bool> atom_values) {
  std::size_t next = 0;
  bool r = detail::outcome_from(condition, atom_values, next);
  if (next != atom_values.size()) throw Error("condition vector length mismatch");
  return r;
}

}  // namespace cyclotest::dsl
