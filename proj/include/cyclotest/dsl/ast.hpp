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
#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cyclotest/common.hpp"

namespace cyclotest::dsl {

// Source positions are carried for diagnostics only and never take part in
// structural equality, so a re-parsed pretty-print compares equal.
struct SourceLoc {
  int line = 0;
  int column = 0;

  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

enum class TypeKind { Bool, Int };

struct Type {
  TypeKind kind = TypeKind::Bool;
  Value lo = 0;
  Value hi = 1;

  static Type boolean() { return {TypeKind::Bool, 0, 1}; }
  static Type int_range(Value lo, Value hi) { return {TypeKind::Int, lo, hi}; }

  bool contains(Value v) const { return v >= lo && v <= hi; }
  std::vector<Value> domain() const {
    std::vector<Value> values;
    for (Value v = lo; v <= hi; ++v) values.push_back(v);
    return values;
  }
  std::string to_string() const {
    if (kind == TypeKind::Bool) return "bool";
    return "int " + std::to_string(lo) + ".." + std::to_string(hi);
  }

  friend bool operator==(const Type&, const Type&) = default;
};

enum class Visibility { Readable, Hidden };

struct VarDecl {
  std::string name;
  Type type;
  Visibility visibility = Visibility::Readable;  // state variables only
  Value initial = 0;                             // state variables only
  SourceLoc loc;

  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

enum class ExprKind {
  BoolLit,
  IntLit,
  Var,
  Pred,  // reference to an extracted temporal predicate id
  Not,
  Neg,
  And,
  Or,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Add,
  Sub,
  Held,  // held(args[0], duration_ms)
};

struct Expr {
  ExprKind kind = ExprKind::BoolLit;
  Value value = 0;
  std::string name;
  std::vector<Expr> args;
  TimeMs duration_ms = 0;
  SourceLoc loc;

  static Expr boolean(bool v) { return Expr{ExprKind::BoolLit, v ? 1 : 0, {}, {}, 0, {}}; }
  static Expr integer(Value v) { return Expr{ExprKind::IntLit, v, {}, {}, 0, {}}; }
  static Expr var(std::string n) { return Expr{ExprKind::Var, 0, std::move(n), {}, 0, {}}; }
  static Expr pred(std::string n) { return Expr{ExprKind::Pred, 0, std::move(n), {}, 0, {}}; }
  static Expr unary(ExprKind k, Expr a) {
    Expr e{k, 0, {}, {}, 0, {}};
    e.args.push_back(std::move(a));
    return e;
  }
  static Expr binary(ExprKind k, Expr a, Expr b) {
    Expr e{k, 0, {}, {}, 0, {}};
    e.args.push_back(std::move(a));
    e.args.push_back(std::move(b));
    return e;
  }
  static Expr held(Expr formula, TimeMs duration_ms) {
    Expr e = unary(ExprKind::Held, std::move(formula));
    e.duration_ms = duration_ms;
    return e;
  }
  // n-ary conjunction/disjunction, flattening nested operands of the same kind.
  static Expr nary(ExprKind k, std::vector<Expr> operands) {
    Expr e{k, 0, {}, {}, 0, {}};
    for (auto& op : operands) {
      if (op.kind == k) {
        for (auto& inner : op.args) e.args.push_back(std::move(inner));
      } else {
        e.args.push_back(std::move(op));
      }
    }
    if (e.args.size() == 1) return std::move(e.args.front());
    return e;
  }

  bool is_connective() const {
    return kind == ExprKind::Not || kind == ExprKind::And || kind == ExprKind::Or;
  }

  friend bool operator==(const Expr&, const Expr&) = default;
};

// Path of then/else choices from the root: "" is the root, "TE" is the else
// child of the root's then child.
class NodeId {
 public:
  NodeId() = default;
  explicit NodeId(std::string path) : path_(std::move(path)) {}

  static NodeId parse(const std::string& text) {
    if (text == "root" || text.empty()) return NodeId();
    for (char c : text) {
      if (c != 'T' && c != 'E') throw Error("invalid node id '" + text + "'");
    }
    return NodeId(text);
  }

  NodeId then_child() const { return NodeId(path_ + 'T'); }
  NodeId else_child() const { return NodeId(path_ + 'E'); }
  bool is_prefix_of(const NodeId& other) const {
    return other.path_.compare(0, path_.size(), path_) == 0;
  }
  std::size_t depth() const { return path_.size(); }
  const std::string& path() const { return path_; }
  std::string str() const { return path_.empty() ? "root" : path_; }

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
  friend bool operator==(const NodeId&, const NodeId&) = default;

 private:
  std::string path_;
};

struct Assignment {
  std::string target;
  Expr value;
  SourceLoc loc;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// A decision (condition + then/else children) or a leaf (assignments).
struct Node {
  NodeId id;
  std::optional<Expr> condition;
  std::vector<Node> children;
  std::vector<Assignment> assignments;
  SourceLoc loc;

  bool is_decision() const { return condition.has_value(); }
  const Node& then_branch() const { return children.at(0); }
  const Node& else_branch() const { return children.at(1); }

  friend bool operator==(const Node&, const Node&) = default;
};

struct ModelAst {
  std::string name;
  std::vector<VarDecl> inputs;
  std::vector<VarDecl> outputs;
  std::vector<VarDecl> state_vars;
  Node body;

  friend bool operator==(const ModelAst&, const ModelAst&) = default;
};

enum class VarRole { Input, Output, State };

inline const VarDecl* find_decl(const std::vector<VarDecl>& decls, const std::string& name) {
  auto it = std::find_if(decls.begin(), decls.end(),
                         [&](const VarDecl& d) { return d.name == name; });
  return it == decls.end() ? nullptr : &*it;
}

inline std::optional<std::pair<VarRole, const VarDecl*>> lookup(const ModelAst& ast,
                                                                const std::string& name) {
  if (auto* d = find_decl(ast.inputs, name)) return std::pair{VarRole::Input, d};
  if (auto* d = find_decl(ast.outputs, name)) return std::pair{VarRole::Output, d};
  if (auto* d = find_decl(ast.state_vars, name)) return std::pair{VarRole::State, d};
  return std::nullopt;
}

inline Valuation initial_state(const ModelAst& ast) {
  Valuation state;
  for (const auto& d : ast.state_vars) state[d.name] = d.initial;
  return state;
}

template <class Fn>
void for_each_node(const Node& node, Fn&& fn) {
  fn(node);
  for (const auto& child : node.children) for_each_node(child, fn);
}

// Leaves in then-first depth-first order; the 1-based position of a leaf in
// this list is the identifier of the test case that reaches it.
inline std::vector<const Node*> leaves(const ModelAst& ast) {
  std::vector<const Node*> out;
  for_each_node(ast.body, [&](const Node& n) {
    if (!n.is_decision()) out.push_back(&n);
  });
  return out;
}

inline std::vector<const Node*> decisions(const ModelAst& ast) {
  std::vector<const Node*> out;
  for_each_node(ast.body, [&](const Node& n) {
    if (n.is_decision()) out.push_back(&n);
  });
  return out;
}

inline const Node* find_node(const ModelAst& ast, const NodeId& id) {
  const Node* node = &ast.body;
  for (char c : id.path()) {
    if (!node->is_decision()) return nullptr;
    node = c == 'T' ? &node->then_branch() : &node->else_branch();
  }
  return node;
}

template <class Fn>
void for_each_subexpr(const Expr& e, Fn&& fn) {
  fn(e);
  for (const auto& a : e.args) for_each_subexpr(a, fn);
}

inline bool contains_held(const Expr& e) {
  bool found = false;
  for_each_subexpr(e, [&](const Expr& s) { found = found || s.kind == ExprKind::Held; });
  return found;
}

}  // namespace cyclotest::dsl
