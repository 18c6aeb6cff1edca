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
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cyclotest/dsl/ast.hpp"
#include "cyclotest/dsl/predicates.hpp"
#include "cyclotest/dsl/printer.hpp"
#include "cyclotest/interpreter.hpp"
#include "cyclotest/mediator/sync.hpp"
#include "cyclotest/temporal.hpp"

namespace cyclotest {

using dsl::ExtractedModel;

// One decision outcome on a root-to-leaf path.
struct PathLiteral {
  Expr condition;
  bool positive = true;

  Expr as_expr() const { return positive ? condition : Expr::unary(ExprKind::Not, condition); }
  friend bool operator==(const PathLiteral&, const PathLiteral&) = default;
};

inline std::string conjunction_text(const std::vector<PathLiteral>& literals) {
  if (literals.empty()) return "true";
  std::vector<Expr> parts;
  for (const auto& l : literals) parts.push_back(l.as_expr());
  return dsl::print_expr(Expr::nary(ExprKind::And, std::move(parts)));
}

// A test case: the conjunction of decision outcomes leading to one leaf.
struct PathCondition {
  std::size_t id = 0;  // 1-based, leaves in then-first order
  NodeId leaf;
  std::vector<PathLiteral> literals;

  std::string str() const { return conjunction_text(literals); }
  friend bool operator==(const PathCondition&, const PathCondition&) = default;
};

inline std::vector<PathCondition> enumerate_test_cases(const ModelAst& ast) {
  std::vector<PathCondition> out;
  std::vector<PathLiteral> path;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    if (!n.is_decision()) {
      out.push_back({out.size() + 1, n.id, path});
      return;
    }
    for (bool branch : {true, false}) {
      path.push_back({*n.condition, branch});
      walk(branch ? n.then_branch() : n.else_branch());
      path.pop_back();
    }
  };
  walk(ast.body);
  return out;
}

inline PathCondition rewrite_to_predicates(const PathCondition& pc, const ExtractedModel& model) {
  PathCondition out = pc;
  for (auto& l : out.literals) l.condition = dsl::rewrite_held(l.condition, model);
  return out;
}

namespace detail {

struct Refs {
  std::set<std::string> inputs;
  bool other = false;  // state variables or predicates
};

inline Refs references(const ModelAst& ast, const Expr& e) {
  Refs r;
  dsl::for_each_subexpr(e, [&](const Expr& x) {
    if (x.kind == ExprKind::Pred || x.kind == ExprKind::Held) r.other = true;
    if (x.kind != ExprKind::Var) return;
    auto d = dsl::lookup(ast, x.name);
    if (d && d->first == dsl::VarRole::Input) {
      r.inputs.insert(x.name);
    } else {
      r.other = true;
    }
  });
  return r;
}

inline std::vector<Valuation> input_space(const ModelAst& ast, const std::set<std::string>& names) {
  std::vector<Valuation> out{Valuation{}};
  for (const auto& d : ast.inputs) {
    if (!names.count(d.name)) continue;
    std::vector<Valuation> next;
    for (const auto& partial : out) {
      for (Value v : d.type.domain()) {
        Valuation e = partial;
        e[d.name] = v;
        next.push_back(std::move(e));
      }
    }
    out = std::move(next);
    if (out.size() > (1u << 20)) throw Error("input space too large to enumerate");
  }
  return out;
}

}  // namespace detail

// A test case projected onto the state space: the states in which some input
// valuation drives execution into the case.
struct Projection {
  std::size_t id = 0;
  std::vector<PathLiteral> literals;  // full rewritten condition
  std::vector<PathLiteral> kept;      // literals that read state or predicates
  std::set<std::string> mixed_inputs;  // inputs that kept literals also read

  std::string str() const { return conjunction_text(kept); }
};

// Pure-input literals are eliminated by enumerating input valuations; when
// that part is unsatisfiable the projection is empty.
inline Projection project_to_state(const PathCondition& pc, const ModelAst& ast) {
  Projection p{pc.id, pc.literals, {}, {}};
  std::vector<PathLiteral> pure;
  std::set<std::string> pure_inputs;
  for (const auto& l : pc.literals) {
    auto refs = detail::references(ast, l.condition);
    if (refs.other) {
      p.kept.push_back(l);
      p.mixed_inputs.insert(refs.inputs.begin(), refs.inputs.end());
    } else {
      pure.push_back(l);
      pure_inputs.insert(refs.inputs.begin(), refs.inputs.end());
    }
  }
  bool satisfiable = false;
  for (const auto& in : detail::input_space(ast, pure_inputs)) {
    satisfiable = std::all_of(pure.begin(), pure.end(), [&](const PathLiteral& l) {
      return (eval_expression(l.condition, in) != 0) == l.positive;
    });
    if (satisfiable) break;
  }
  if (!satisfiable) p.kept = {PathLiteral{Expr::boolean(false), true}};
  return p;
}

// Whether the state (flags and state variables) lies in the projection.
inline bool projection_holds(const Projection& p, const ModelAst& ast, const TimeFlags& flags,
                             const Valuation& state_vars) {
  std::set<std::string> all_inputs;
  for (const auto& l : p.literals) {
    auto refs = detail::references(ast, l.condition);
    all_inputs.insert(refs.inputs.begin(), refs.inputs.end());
  }
  for (const auto& in : detail::input_space(ast, all_inputs)) {
    bool all = std::all_of(p.literals.begin(), p.literals.end(), [&](const PathLiteral& l) {
      return (eval_expression(l.condition, in, state_vars, flags) != 0) == l.positive;
    });
    if (all) return true;
  }
  return false;
}

struct MembershipVector {
  std::vector<std::uint8_t> bits;

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < bits.size(); ++i) s += (i ? "," : "") + std::to_string(bits[i]);
    return s + ")";
  }
  friend auto operator<=>(const MembershipVector&, const MembershipVector&) = default;
};

inline MembershipVector generalized_state(const TimeFlags& flags, const Valuation& state_vars,
                                          const std::vector<Projection>& projections, const ModelAst& ast) {
  MembershipVector v;
  for (const auto& p : projections) v.bits.push_back(projection_holds(p, ast, flags, state_vars) ? 1 : 0);
  return v;
}

inline MembershipVector generalized_state(const SpecificationState& s, const std::vector<Projection>& projections,
                                          const ModelAst& ast) {
  return generalized_state(s.time_flags, s.state_vars, projections, ast);
}

// The reduction pipeline for one model.
struct Reduction {
  std::vector<PathCondition> cases;      // over the original model
  std::vector<PathCondition> rewritten;  // held() replaced by predicate ids
  std::vector<Projection> projections;
};

inline Reduction reduce(const ExtractedModel& model) {
  Reduction r;
  r.cases = enumerate_test_cases(model.original);
  for (const auto& c : r.cases) {
    r.rewritten.push_back(rewrite_to_predicates(c, model));
    r.projections.push_back(project_to_state(r.rewritten.back(), model.rewritten));
  }
  return r;
}

// A concrete specification state up to the timing detail that cannot change
// any future flag: elapsed times are capped just past their durations.
struct FlagState {
  TimeFlags flags;
  Valuation state_vars;

  friend auto operator<=>(const FlagState&, const FlagState&) = default;
};

inline std::string flag_vector_text(const TimeFlags& flags, const std::vector<dsl::TemporalPredicateDecl>& order) {
  std::string s = "(";
  for (std::size_t i = 0; i < order.size(); ++i) s += (i ? "," : "") + std::string(flags.at(order[i].id) ? "1" : "0");
  return s + ")";
}

struct ReachableFlagStates {
  std::size_t upper_bound = 1;  // 2^k over k predicates
  // Each reachable flag state with a shortest input sequence reaching it.
  std::map<FlagState, std::vector<Valuation>> witnesses;

  std::set<TimeFlags> flag_vectors() const {
    std::set<TimeFlags> out;
    for (const auto& [s, w] : witnesses) out.insert(s.flags);
    return out;
  }
};

// Breadth-first search over all input sequences at `cycle_period_ms`
// granularity. Only states observed after at least one cycle count.
inline ReachableFlagStates enumerate_reachable_flag_states(const ExtractedModel& model, TimeMs cycle_period_ms,
                                                           HeldThreshold threshold = HeldThreshold::Inclusive) {
  const auto& ast = model.rewritten;
  const std::size_t k = model.predicates.size();
  if (k >= 63) throw Error("too many temporal predicates to bound");

  // Per predicate: capped elapsed time, or empty when the literal is broken.
  using Timers = std::vector<std::optional<TimeMs>>;
  struct Node {
    Timers timers;
    Valuation state_vars;
    auto operator<=>(const Node&) const = default;
  };

  ReachableFlagStates out;
  out.upper_bound = std::size_t{1} << k;
  const auto inputs = detail::input_space(ast, [&] {
    std::set<std::string> names;
    for (const auto& d : ast.inputs) names.insert(d.name);
    return names;
  }());

  constexpr TimeMs kNow = TimeMs{1} << 50;
  std::map<Node, std::vector<Valuation>> seen;
  std::deque<Node> queue;
  Node start{Timers(k), dsl::initial_state(ast)};
  seen.emplace(start, std::vector<Valuation>{});
  queue.push_back(start);
  while (!queue.empty()) {
    Node n = queue.front();
    queue.pop_front();
    for (const auto& in : inputs) {
      Node next{Timers(k), {}};
      TimeFlags flags;
      Valuation env = in;
      env.insert(n.state_vars.begin(), n.state_vars.end());
      for (std::size_t i = 0; i < k; ++i) {
        const auto& decl = model.predicates[i];
        PredicateState ps = make_predicate_state(decl);
        if (n.timers[i]) {
          ps.since_ms = kNow - cycle_period_ms - *n.timers[i];
          ps.last_update_ms = kNow - cycle_period_ms;
        }
        ps = step_predicate(ps, literal_holds(decl.literal, env), kNow);
        flags[decl.id] = is_satisfied(ps, kNow, threshold);
        if (ps.since_ms) next.timers[i] = std::min(kNow - *ps.since_ms, decl.duration_ms + cycle_period_ms);
      }
      next.state_vars = eval_model(ast, in, n.state_vars, flags).state_post;
      auto path = seen.at(n);
      path.push_back(in);
      out.witnesses.try_emplace(FlagState{flags, next.state_vars}, path);
      if (!seen.emplace(next, std::move(path)).second) continue;
      queue.push_back(std::move(next));
    }
  }
  return out;
}

// Test cases some input valuation covers from the given state.
inline std::set<std::size_t> coverable_cases(const ModelAst& ast, const FlagState& s) {
  std::set<std::string> names;
  for (const auto& d : ast.inputs) names.insert(d.name);
  std::set<std::size_t> out;
  for (const auto& in : detail::input_space(ast, names)) {
    out.insert(covered_test_case(eval_model(ast, in, s.state_vars, s.flags).trace, ast));
  }
  return out;
}

struct PartitionCell {
  std::string label;
  std::vector<FlagState> members;
  // Common coverable set, or empty if the members disagree.
  std::optional<std::set<std::size_t>> coverable;
};

// Groups concrete flag states by their membership vector.
inline std::vector<PartitionCell> membership_partition(const ExtractedModel& model,
                                                       const std::vector<Projection>& projections,
                                                       const std::vector<FlagState>& states) {
  std::map<MembershipVector, PartitionCell> cells;
  for (const auto& s : states) {
    auto key = generalized_state(s.flags, s.state_vars, projections, model.rewritten);
    auto cov = coverable_cases(model.rewritten, s);
    auto [it, inserted] = cells.try_emplace(key, PartitionCell{key.str(), {}, cov});
    if (!inserted && it->second.coverable != cov) it->second.coverable.reset();
    it->second.members.push_back(s);
  }
  std::vector<PartitionCell> out;
  for (auto& [k, c] : cells) out.push_back(std::move(c));
  return out;
}

inline std::vector<PartitionCell> singleton_partition(const ExtractedModel& model, const std::vector<FlagState>& states) {
  std::vector<PartitionCell> out;
  for (const auto& s : states) {
    out.push_back({flag_vector_text(s.flags, model.predicates) + format_valuation(s.state_vars), {s},
                   coverable_cases(model.rewritten, s)});
  }
  return out;
}

inline bool partition_sound(const std::vector<PartitionCell>& cells) {
  return std::all_of(cells.begin(), cells.end(), [](const PartitionCell& c) { return c.coverable.has_value(); });
}

// Merges cells that cover identical sets of test cases. Cells whose members
// disagree are left alone.
inline std::vector<PartitionCell> enlarge_states(const std::vector<PartitionCell>& cells) {
  std::vector<PartitionCell> out;
  std::map<std::set<std::size_t>, std::size_t> by_cover;
  for (const auto& c : cells) {
    if (!c.coverable) {
      out.push_back(c);
      continue;
    }
    auto [it, inserted] = by_cover.try_emplace(*c.coverable, out.size());
    if (inserted) {
      out.push_back(c);
      continue;
    }
    auto& merged = out[it->second];
    merged.label += "|" + c.label;
    merged.members.insert(merged.members.end(), c.members.begin(), c.members.end());
  }
  return out;
}

// A piece of the model tested on its own: the subtree under `root`, reached
// by pinning the inputs its path forces.
struct PiecemealPart {
  NodeId root;
  Valuation pinned;
  std::vector<std::size_t> cases;
};

class OverlappingParts : public Error {
 public:
  OverlappingParts(const NodeId& a, const NodeId& b)
      : Error("parts " + a.str() + " and " + b.str() + " overlap") {}
};

struct PiecemealPlan {
  std::vector<PiecemealPart> parts;
  std::vector<std::string> warnings;
};

inline PiecemealPlan make_piecemeal(const ModelAst& ast, const std::vector<NodeId>& roots,
                                    const std::string& criterion = "branch") {
  PiecemealPlan plan;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (!dsl::find_node(ast, roots[i])) throw Error("no node " + roots[i].str() + " in model " + ast.name);
    for (std::size_t j = 0; j < i; ++j) {
      if (roots[i].is_prefix_of(roots[j]) || roots[j].is_prefix_of(roots[i])) {
        throw OverlappingParts(roots[j], roots[i]);
      }
    }
  }
  if (criterion == "mcc") {
    plan.warnings.push_back(
        "multiple condition coverage does not decompose over parts; combined results may fall short");
  }
  auto cases = enumerate_test_cases(ast);
  for (const auto& root : roots) {
    PiecemealPart part{root, {}, {}};
    for (const auto& c : cases) {
      if (root.is_prefix_of(c.leaf)) part.cases.push_back(c.id);
    }
    // The decision outcomes above the root.
    std::vector<PathLiteral> above;
    const Node* n = &ast.body;
    for (char step : root.path()) {
      above.push_back({*n->condition, step == 'T'});
      n = step == 'T' ? &n->then_branch() : &n->else_branch();
    }
    std::set<std::string> names;
    std::vector<PathLiteral> pure;
    for (const auto& l : above) {
      auto refs = detail::references(ast, l.condition);
      if (refs.other) continue;
      pure.push_back(l);
      names.insert(refs.inputs.begin(), refs.inputs.end());
    }
    std::map<std::string, std::set<Value>> values;
    for (const auto& in : detail::input_space(ast, names)) {
      bool ok = std::all_of(pure.begin(), pure.end(), [&](const PathLiteral& l) {
        return (eval_expression(l.condition, in) != 0) == l.positive;
      });
      if (!ok) continue;
      for (const auto& [name, v] : in) values[name].insert(v);
    }
    for (const auto& [name, vs] : values) {
      if (vs.size() == 1) part.pinned[name] = *vs.begin();
    }
    plan.parts.push_back(std::move(part));
  }
  return plan;
}

}  // namespace cyclotest
