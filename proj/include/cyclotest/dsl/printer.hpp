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

#include <string>

#include "cyclotest/dsl/ast.hpp"

namespace cyclotest::dsl {

namespace detail {

inline int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Or:
      return 1;
    case ExprKind::And:
      return 2;
    case ExprKind::Eq:
    case ExprKind::Ne:
    case ExprKind::Lt:
    case ExprKind::Le:
    case ExprKind::Gt:
    case ExprKind::Ge:
      return 3;
    case ExprKind::Add:
    case ExprKind::Sub:
      return 4;
    case ExprKind::Not:
    case ExprKind::Neg:
      return 5;
    default:
      return 6;
  }
}

inline const char* op_text(ExprKind k) {
  switch (k) {
    case ExprKind::Or: return " || ";
    case ExprKind::And: return " && ";
    case ExprKind::Eq: return " == ";
    case ExprKind::Ne: return " != ";
    case ExprKind::Lt: return " < ";
    case ExprKind::Le: return " <= ";
    case ExprKind::Gt: return " > ";
    case ExprKind::Ge: return " >= ";
    case ExprKind::Add: return " + ";
    case ExprKind::Sub: return " - ";
    default: return "";
  }
}

inline std::string print_expr_at(const Expr& e, int min_prec);

inline std::string wrap(const Expr& e, int min_prec) {
  std::string s = print_expr_at(e, 0);
  return precedence(e.kind) < min_prec ? "(" + s + ")" : s;
}

inline std::string print_expr_at(const Expr& e, int min_prec) {
  switch (e.kind) {
    case ExprKind::BoolLit:
      return e.value ? "true" : "false";
    case ExprKind::IntLit:
      return std::to_string(e.value);
    case ExprKind::Var:
    case ExprKind::Pred:
      return e.name;
    case ExprKind::Held:
      return "held(" + print_expr_at(e.args[0], 0) + ", " + std::to_string(e.duration_ms / 1000) + "s)";
    case ExprKind::Not:
      return "!" + wrap(e.args[0], 5);
    case ExprKind::Neg: {
      // "--x" would not lex back as two minus signs.
      std::string inner = wrap(e.args[0], 5);
      return inner.front() == '-' ? "-(" + inner + ")" : "-" + inner;
    }
    case ExprKind::And:
    case ExprKind::Or: {
      int p = precedence(e.kind);
      std::string out;
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += op_text(e.kind);
        // Same-kind operands are flattened, so only lower precedence needs parens;
        // a nested same-kind operand is parenthesised to keep its grouping.
        out += e.args[i].kind == e.kind ? "(" + print_expr_at(e.args[i], 0) + ")" : wrap(e.args[i], p + 1);
      }
      (void)min_prec;
      return out;
    }
    case ExprKind::Add:
    case ExprKind::Sub:
      return wrap(e.args[0], 4) + op_text(e.kind) + wrap(e.args[1], 5);
    default:  // comparisons are non-associative
      return wrap(e.args[0], 4) + op_text(e.kind) + wrap(e.args[1], 4);
  }
}

inline void print_node(const Node& node, int indent, std::string& out) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (node.is_decision()) {
    out += pad + "if (" + print_expr_at(*node.condition, 0) + ") {\n";
    print_node(node.then_branch(), indent + 1, out);
    out += pad + "} else {\n";
    print_node(node.else_branch(), indent + 1, out);
    out += pad + "}\n";
    return;
  }
  for (const auto& a : node.assignments) {
    out += pad + a.target + " = " + print_expr_at(a.value, 0) + ";\n";
  }
}

}  // namespace detail

inline std::string print_expr(const Expr& e) { return detail::print_expr_at(e, 0); }

inline std::string print_model(const ModelAst& ast) {
  std::string out = "model " + ast.name + " {\n";
  for (const auto& d : ast.inputs) out += "  input " + d.name + " : " + d.type.to_string() + ";\n";
  for (const auto& d : ast.outputs) out += "  output " + d.name + " : " + d.type.to_string() + ";\n";
  for (const auto& d : ast.state_vars) {
    out += "  state " + d.name + " : " + d.type.to_string() + " = " + std::to_string(d.initial) +
           (d.visibility == Visibility::Hidden ? " hidden" : " readable") + ";\n";
  }
  out += "\n  logic {\n";
  detail::print_node(ast.body, 2, out);
  out += "  }\n}\n";
  return out;
}

}  // namespace cyclotest::dsl
