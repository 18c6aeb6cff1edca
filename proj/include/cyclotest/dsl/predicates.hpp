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
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cyclotest/dsl/ast.hpp"
#include "cyclotest/dsl/printer.hpp"

namespace cyclotest::dsl {

// `variable == expected`; for booleans expected is 0 (`!v`) or 1 (`v`).
struct Literal {
  std::string variable;
  Value expected = 1;

  std::string to_string(const ModelAst& ast) const {
    auto decl = lookup(ast, variable);
    if (decl && decl->second->type.kind == TypeKind::Bool) {
      return expected ? variable : "!" + variable;
    }
    return variable + " == " + std::to_string(expected);
  }

  friend auto operator<=>(const Literal&, const Literal&) = default;
  friend bool operator==(const Literal&, const Literal&) = default;
};

struct TemporalPredicateDecl {
  std::string id;
  Literal literal;
  TimeMs duration_ms = 0;
  // Duration as written in the source; differs from duration_ms only in
  // rescaled desk-scale runs.
  TimeMs declared_ms = 0;

  friend bool operator==(const TemporalPredicateDecl&, const TemporalPredicateDecl&) = default;
};

class UnsupportedTemporalFormula : public Error {
 public:
  UnsupportedTemporalFormula(SourceLoc loc, const std::string& formula)
      : Error(std::to_string(loc.line) + ":" + std::to_string(loc.column) +
              ": held() argument must be a conjunction of input/state literals: " + formula) {}
};

// The source model together with its predicate-rewritten form.
struct ExtractedModel {
  ModelAst original;
  ModelAst rewritten;
  std::vector<TemporalPredicateDecl> predicates;

  const TemporalPredicateDecl* predicate(const std::string& id) const {
    auto it = std::find_if(predicates.begin(), predicates.end(),
                           [&](const TemporalPredicateDecl& p) { return p.id == id; });
    return it == predicates.end() ? nullptr : &*it;
  }
  // Ids of held(formula, duration) in conjunct order.
  std::vector<std::string> ids_for(const Expr& held) const;
};

namespace detail {

inline std::optional<Literal> as_literal(const ModelAst& ast, const Expr& e) {
  auto var_of = [&](const Expr& v) -> const VarDecl* {
    if (v.kind != ExprKind::Var) return nullptr;
    auto d = lookup(ast, v.name);
    if (!d || d->first == VarRole::Output) return nullptr;
    return d->second;
  };
  if (const VarDecl* d = var_of(e); d && d->type.kind == TypeKind::Bool) {
    return Literal{e.name, 1};
  }
  if (e.kind == ExprKind::Not) {
    if (const VarDecl* d = var_of(e.args[0]); d && d->type.kind == TypeKind::Bool) {
      return Literal{d->name, 0};
    }
  }
  if (e.kind == ExprKind::Eq) {
    const Expr& a = e.args[0];
    const Expr& b = e.args[1];
    if (const VarDecl* d = var_of(a); d && b.kind == ExprKind::IntLit) return Literal{d->name, b.value};
    if (const VarDecl* d = var_of(b); d && a.kind == ExprKind::IntLit) return Literal{d->name, a.value};
  }
  return std::nullopt;
}

}  // namespace detail

// Splits held(l1 && ... && lk, T) into its literals.
inline std::vector<Literal> held_literals(const ModelAst& ast, const Expr& held) {
  const Expr& formula = held.args.at(0);
  std::vector<const Expr*> conjuncts;
  if (formula.kind == ExprKind::And) {
    for (const auto& a : formula.args) conjuncts.push_back(&a);
  } else {
    conjuncts.push_back(&formula);
  }
  std::vector<Literal> out;
  for (const Expr* c : conjuncts) {
    auto lit = detail::as_literal(ast, *c);
    if (!lit) throw UnsupportedTemporalFormula(held.loc, print_expr(formula));
    out.push_back(*lit);
  }
  return out;
}

inline std::vector<std::string> ExtractedModel::ids_for(const Expr& held) const {
  std::vector<std::string> ids;
  for (const auto& lit : held_literals(original, held)) {
    for (const auto& p : predicates) {
      if (p.literal == lit && p.declared_ms == held.duration_ms) ids.push_back(p.id);
    }
  }
  return ids;
}

// Replaces every held() in `e` by the conjunction of its predicate ids.
inline Expr rewrite_held(const Expr& e, const ExtractedModel& model) {
  if (e.kind == ExprKind::Held) {
    std::vector<Expr> refs;
    for (const auto& id : model.ids_for(e)) {
      Expr ref = Expr::pred(id);
      ref.loc = e.loc;
      refs.push_back(std::move(ref));
    }
    Expr out = Expr::nary(ExprKind::And, std::move(refs));
    out.loc = e.loc;
    return out;
  }
  Expr out = e;
  out.args.clear();
  for (const auto& a : e.args) out.args.push_back(rewrite_held(a, model));
  if (out.kind == ExprKind::And || out.kind == ExprKind::Or) {
    Expr flat = Expr::nary(out.kind, std::move(out.args));
    flat.loc = e.loc;
    return flat;
  }
  return out;
}

inline ExtractedModel extract_predicates(const ModelAst& ast) {
  // (literal, duration) pairs in order of first appearance.
  std::vector<std::pair<Literal, TimeMs>> seen;
  std::set<TimeMs> durations;
  for_each_node(ast.body, [&](const Node& n) {
    if (!n.is_decision()) return;
    for_each_subexpr(*n.condition, [&](const Expr& e) {
      if (e.kind != ExprKind::Held) return;
      durations.insert(e.duration_ms);
      for (auto& lit : held_literals(ast, e)) {
        std::pair<Literal, TimeMs> key{lit, e.duration_ms};
        if (std::find(seen.begin(), seen.end(), key) == seen.end()) seen.push_back(key);
      }
    });
  });

  std::map<TimeMs, int> rank;
  for (TimeMs d : durations) rank.emplace(d, static_cast<int>(rank.size()) + 1);
  std::stable_sort(seen.begin(), seen.end(), [&](const auto& a, const auto& b) {
    return rank[a.second] < rank[b.second];
  });

  ExtractedModel out;
  out.original = ast;
  for (const auto& [lit, duration] : seen) {
    auto decl = lookup(ast, lit.variable);
    std::string value;
    if (decl->second->type.kind == TypeKind::Bool) {
      value = lit.expected ? "t" : "f";
    } else {
      value = lit.expected < 0 ? "m" + std::to_string(-lit.expected) : std::to_string(lit.expected);
    }
    std::string id = lit.variable + "_eq_" + value + "_t" + std::to_string(rank[duration]);
    if (lookup(ast, id)) throw Error("predicate id '" + id + "' clashes with a declared variable");
    out.predicates.push_back({id, lit, duration, duration});
  }

  out.rewritten = ast;
  std::function<void(Node&)> rewrite = [&](Node& n) {
    if (n.is_decision()) n.condition = rewrite_held(*n.condition, out);
    for (auto& c : n.children) rewrite(c);
  };
  rewrite(out.rewritten.body);
  return out;
}

// Returns a copy whose predicate durations are mapped through `scale`.
inline ExtractedModel with_durations(ExtractedModel model,
                                     const std::function<TimeMs(TimeMs)>& scale) {
  for (auto& p : model.predicates) p.duration_ms = scale(p.duration_ms);
  return model;
}

}  // namespace cyclotest::dsl
