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

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cyclotest/dsl/ast.hpp"
#include "cyclotest/dsl/atoms.hpp"
#include "cyclotest/dsl/printer.hpp"
#include "cyclotest/temporal.hpp"

namespace cyclotest {

using dsl::Expr;
using dsl::ExprKind;
using dsl::ModelAst;
using dsl::Node;
using dsl::NodeId;

class EvaluationError : public Error {
 public:
  using Error::Error;
};

struct ConditionRecord {
  std::string atom;
  bool value = false;

  friend bool operator==(const ConditionRecord&, const ConditionRecord&) = default;
};

struct DecisionRecord {
  NodeId node;
  bool outcome = false;
  std::vector<ConditionRecord> conditions;

  friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

struct DecisionTrace {
  std::vector<DecisionRecord> decisions;
  NodeId leaf;

  friend bool operator==(const DecisionTrace&, const DecisionTrace&) = default;
};

struct EvalResult {
  Valuation outputs;
  Valuation state_post;
  DecisionTrace trace;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

// Evaluates a held() node of an unrewritten model.
using HeldEvaluator = std::function<bool(const Expr& held)>;

namespace detail {

struct Env {
  const Valuation& inputs;
  const Valuation& state;
  const TimeFlags& flags;
  const HeldEvaluator& held;
};

inline Value eval_expr(const Expr& e, const Env& env) {
  auto bin = [&](std::size_t i) { return eval_expr(e.args[i], env); };
  switch (e.kind) {
    case ExprKind::BoolLit:
    case ExprKind::IntLit:
      return e.value;
    case ExprKind::Var: {
      if (auto it = env.inputs.find(e.name); it != env.inputs.end()) return it->second;
      if (auto it = env.state.find(e.name); it != env.state.end()) return it->second;
      throw MissingBinding(e.name);
    }
    case ExprKind::Pred: {
      auto it = env.flags.find(e.name);
      if (it == env.flags.end()) throw MissingBinding(e.name);
      return it->second ? 1 : 0;
    }
    case ExprKind::Held:
      if (!env.held) throw EvaluationError("held() reached without a held evaluator; rewrite the model first");
      return env.held(e) ? 1 : 0;
    case ExprKind::Not:
      return bin(0) ? 0 : 1;
    case ExprKind::Neg:
      return -bin(0);
    case ExprKind::And: {
      for (const auto& a : e.args) {
        if (!eval_expr(a, env)) return 0;
      }
      return 1;
    }
    case ExprKind::Or: {
      for (const auto& a : e.args) {
        if (eval_expr(a, env)) return 1;
      }
      return 0;
    }
    case ExprKind::Eq: return bin(0) == bin(1);
    case ExprKind::Ne: return bin(0) != bin(1);
    case ExprKind::Lt: return bin(0) < bin(1);
    case ExprKind::Le: return bin(0) <= bin(1);
    case ExprKind::Gt: return bin(0) > bin(1);
    case ExprKind::Ge: return bin(0) >= bin(1);
    case ExprKind::Add: return bin(0) + bin(1);
    case ExprKind::Sub: return bin(0) - bin(1);
  }
  throw EvaluationError("unknown expression kind");
}

inline void require_all(const std::vector<dsl::VarDecl>& decls, const Valuation& values) {
  for (const auto& d : decls) {
    if (!values.count(d.name)) throw MissingBinding(d.name);
  }
}

}  // namespace detail

inline Value eval_expression(const Expr& e, const Valuation& inputs, const Valuation& state = {},
                             const TimeFlags& flags = {}, const HeldEvaluator& held = {}) {
  return detail::eval_expr(e, detail::Env{inputs, state, flags, held});
}

// Runs the model once. Every atom of every evaluated decision is recorded,
// even where && / || would have short-circuited; atoms are side-effect free.
inline EvalResult eval_model(const ModelAst& ast, const Valuation& inputs,
                             const Valuation& state_pre, const TimeFlags& time_flags,
                             const HeldEvaluator& held = {}) {
  detail::require_all(ast.inputs, inputs);
  detail::require_all(ast.state_vars, state_pre);
  detail::Env env{inputs, state_pre, time_flags, held};

  EvalResult result;
  const Node* node = &ast.body;
  while (node->is_decision()) {
    DecisionRecord record;
    record.node = node->id;
    for (const Expr* atom : dsl::decision_atoms(*node->condition)) {
      record.conditions.push_back({dsl::print_expr(*atom), detail::eval_expr(*atom, env) != 0});
    }
    record.outcome = detail::eval_expr(*node->condition, env) != 0;
    node = record.outcome ? &node->then_branch() : &node->else_branch();
    result.trace.decisions.push_back(std::move(record));
  }
  result.trace.leaf = node->id;

  // Assignments in a leaf all read the pre-state.
  result.state_post = state_pre;
  for (const auto& a : node->assignments) {
    Value v = detail::eval_expr(a.value, env);
    auto target = dsl::lookup(ast, a.target);
    if (!target) throw EvaluationError("unknown assignment target '" + a.target + "'");
    if (!target->second->type.contains(v)) {
      throw EvaluationError("value " + std::to_string(v) + " outside the range of '" + a.target + "'");
    }
    if (target->first == dsl::VarRole::Output) {
      result.outputs[a.target] = v;
    } else {
      result.state_post[a.target] = v;
    }
  }
  for (const auto& o : ast.outputs) {
    if (!result.outputs.count(o.name)) {
      throw EvaluationError("output '" + o.name + "' not assigned on path " + node->id.str());
    }
  }
  return result;
}

// 1-based id of the root-to-leaf path (test case) the trace took.
inline std::size_t covered_test_case(const DecisionTrace& trace, const ModelAst& ast) {
  auto all = dsl::leaves(ast);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i]->id == trace.leaf) return i + 1;
  }
  throw EvaluationError("trace leaf " + trace.leaf.str() + " is not a leaf of model " + ast.name);
}

}  // namespace cyclotest
