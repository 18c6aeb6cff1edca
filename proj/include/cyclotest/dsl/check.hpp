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
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "cyclotest/dsl/ast.hpp"
#include "cyclotest/dsl/atoms.hpp"
#include "cyclotest/dsl/printer.hpp"

namespace cyclotest::dsl {

enum class Severity { Error, Warning };

enum class DiagnosticKind { IncompleteOutput, TypeError, UnreachableLeaf };

struct Diagnostic {
  Severity severity = Severity::Error;
  DiagnosticKind kind = DiagnosticKind::TypeError;
  std::string message;
  SourceLoc loc;
  NodeId node;
  std::string subject;  // offending variable, if any

  // file:line:col: severity: message
  std::string format(const std::string& file) const {
    return file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " +
           (severity == Severity::Error ? "error" : "warning") + ": " + message;
  }
};

namespace detail {

// Types as seen by the checker; an int literal 0 or 1 is accepted where a
// bool is expected.
struct Inferred {
  TypeKind kind;
  bool literal01 = false;
};

class TypeChecker {
 public:
  TypeChecker(const ModelAst& ast, std::vector<Diagnostic>& out) : ast_(ast), out_(out) {}

  Inferred infer(const Expr& e, const NodeId& node) {
    switch (e.kind) {
      case ExprKind::BoolLit:
      case ExprKind::Pred:
      case ExprKind::Held:
        if (e.kind == ExprKind::Held) require_bool(e.args[0], node);
        return {TypeKind::Bool};
      case ExprKind::IntLit:
        return {TypeKind::Int, e.value == 0 || e.value == 1};
      case ExprKind::Var: {
        auto d = lookup(ast_, e.name);
        return {d ? d->second->type.kind : TypeKind::Int};
      }
      case ExprKind::Not:
        require_bool(e.args[0], node);
        return {TypeKind::Bool};
      case ExprKind::And:
      case ExprKind::Or:
        for (const auto& a : e.args) require_bool(a, node);
        return {TypeKind::Bool};
      case ExprKind::Neg:
        require_int(e.args[0], node);
        return {TypeKind::Int};
      case ExprKind::Add:
      case ExprKind::Sub:
        require_int(e.args[0], node);
        require_int(e.args[1], node);
        return {TypeKind::Int};
      case ExprKind::Eq:
      case ExprKind::Ne: {
        Inferred a = infer(e.args[0], node);
        Inferred b = infer(e.args[1], node);
        bool ok = a.kind == b.kind || (a.kind == TypeKind::Bool && b.literal01) ||
                  (b.kind == TypeKind::Bool && a.literal01);
        if (!ok) report(e, node, "operands of '" + print_expr(e) + "' have different types");
        return {TypeKind::Bool};
      }
      default:  // ordering comparisons
        require_int(e.args[0], node);
        require_int(e.args[1], node);
        return {TypeKind::Bool};
    }
  }

  void require_bool(const Expr& e, const NodeId& node) {
    Inferred t = infer(e, node);
    if (t.kind != TypeKind::Bool && !t.literal01) {
      report(e, node, "expected a boolean expression: '" + print_expr(e) + "'");
    }
  }

  void require_int(const Expr& e, const NodeId& node) {
    if (infer(e, node).kind != TypeKind::Int) {
      report(e, node, "expected an integer expression: '" + print_expr(e) + "'");
    }
  }

  void check_assignment(const Assignment& a, const NodeId& node) {
    auto target = lookup(ast_, a.target);
    if (!target) return;
    const Type& type = target->second->type;
    Inferred t = infer(a.value, node);
    if (type.kind == TypeKind::Bool) {
      if (t.kind != TypeKind::Bool && !t.literal01) {
        report(a.value, node, "cannot assign integer expression to bool '" + a.target + "'", a.target);
      }
    } else if (t.kind != TypeKind::Int) {
      report(a.value, node, "cannot assign boolean expression to int '" + a.target + "'", a.target);
    } else if (a.value.kind == ExprKind::IntLit && !type.contains(a.value.value)) {
      report(a.value, node,
             "value " + std::to_string(a.value.value) + " outside " + type.to_string() +
                 " of '" + a.target + "'",
             a.target);
    }
  }

 private:
  void report(const Expr& e, const NodeId& node, std::string message, std::string subject = {}) {
    out_.push_back({Severity::Error, DiagnosticKind::TypeError, std::move(message), e.loc, node,
                    std::move(subject)});
  }

  const ModelAst& ast_;
  std::vector<Diagnostic>& out_;
};

struct PathStep {
  const Expr* condition;
  bool outcome;
};

// Satisfiability of a path constraint with atoms (keyed by their printed
// form) treated as independent booleans.
inline bool path_satisfiable(const std::vector<PathStep>& path) {
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> slots(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    for (const Expr* atom : decision_atoms(*path[i].condition)) {
      auto [it, inserted] = index.emplace(print_expr(*atom), index.size());
      slots[i].push_back(it->second);
    }
  }
  if (index.size() > 20) return true;  // too large to enumerate; assume reachable
  std::vector<bool> values(index.size());
  for (std::uint64_t bits = 0; bits < (1ULL << index.size()); ++bits) {
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = (bits >> k) & 1;
    bool all = true;
    for (std::size_t i = 0; i < path.size() && all; ++i) {
      std::unique_ptr<bool[]> vec(new bool[slots[i].size() + 1]);
      for (std::size_t k = 0; k < slots[i].size(); ++k) vec[k] = values[slots[i][k]];
      all = decision_outcome(*path[i].condition, {vec.get(), slots[i].size()}) == path[i].outcome;
    }
    if (all) return true;
  }
  return false;
}

inline void check_node(const ModelAst& ast, const Node& node, std::vector<PathStep>& path,
                       TypeChecker& types, std::vector<Diagnostic>& out) {
  if (node.is_decision()) {
    types.require_bool(*node.condition, node.id);
    for (int branch = 0; branch < 2; ++branch) {
      path.push_back({&*node.condition, branch == 0});
      check_node(ast, node.children[branch], path, types, out);
      path.pop_back();
    }
    return;
  }
  std::set<std::string> assigned;
  for (const auto& a : node.assignments) {
    types.check_assignment(a, node.id);
    assigned.insert(a.target);
  }
  for (const auto& o : ast.outputs) {
    if (!assigned.count(o.name)) {
      out.push_back({Severity::Error, DiagnosticKind::IncompleteOutput,
                     "output '" + o.name + "' not assigned on path " + node.id.str(), node.loc,
                     node.id, o.name});
    }
  }
  if (!path_satisfiable(path)) {
    out.push_back({Severity::Warning, DiagnosticKind::UnreachableLeaf,
                   "leaf " + node.id.str() + " is unreachable: its path condition is contradictory",
                   node.loc, node.id, {}});
  }
}

}  // namespace detail

// Completeness, type and reachability diagnostics; an empty result means clean.
inline std::vector<Diagnostic> check_model(const ModelAst& ast) {
  std::vector<Diagnostic> out;
  detail::TypeChecker types(ast, out);
  std::vector<detail::PathStep> path;
  detail::check_node(ast, ast.body, path, types, out);
  return out;
}

}  // namespace cyclotest::dsl
