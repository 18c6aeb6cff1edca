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
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclotest/dsl/atoms.hpp"
#include "cyclotest/dsl/printer.hpp"
#include "cyclotest/interpreter.hpp"

namespace cyclotest {

enum class Criterion { Branch, Decision, Condition, Mcdc };

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::Branch: return "branch";
    case Criterion::Decision: return "decision";
    case Criterion::Condition: return "condition";
    case Criterion::Mcdc: return "mcdc";
  }
  return "?";
}

inline Criterion parse_criterion(const std::string& s) {
  for (Criterion c : {Criterion::Branch, Criterion::Decision, Criterion::Condition, Criterion::Mcdc}) {
    if (s == to_string(c)) return c;
  }
  throw Error("unknown coverage criterion '" + s + "' (expected branch, decision, condition or mcdc)");
}

class ModelMismatch : public Error {
 public:
  using Error::Error;
};

using ConditionVector = std::vector<bool>;
using Observation = std::pair<ConditionVector, bool>;  // condition values, decision outcome
using McdcPair = std::pair<ConditionVector, ConditionVector>;

// Unique-cause MC/DC over one decision: for each condition, a pair of observed
// vectors that differ in that condition alone and flip the outcome.
inline std::vector<std::optional<McdcPair>> mcdc_pairs(const std::set<Observation>& observed,
                                                       std::size_t conditions) {
  std::vector<std::optional<McdcPair>> out(conditions);
  for (std::size_t i = 0; i < conditions; ++i) {
    // Vectors keyed by everything except condition i.
    std::map<ConditionVector, std::pair<std::optional<Observation>, std::optional<Observation>>> buckets;
    for (const auto& obs : observed) {
      ConditionVector key = obs.first;
      key[i] = false;
      auto& slot = obs.first[i] ? buckets[key].second : buckets[key].first;
      if (!slot) slot = obs;
    }
    for (const auto& [key, pair] : buckets) {
      const auto& [lo, hi] = pair;
      if (lo && hi && lo->second != hi->second) {
        out[i] = McdcPair{lo->first, hi->first};
        break;
      }
    }
  }
  return out;
}

struct CoverageItem {
  std::string id;
  bool covered = false;
};

struct CoverageReport {
  Criterion criterion = Criterion::Branch;
  std::vector<CoverageItem> items;

  std::size_t total() const { return items.size(); }
  std::size_t covered() const {
    std::size_t n = 0;
    for (const auto& i : items) n += i.covered;
    return n;
  }
  // 1 when there is nothing to cover.
  double ratio() const { return items.empty() ? 1.0 : static_cast<double>(covered()) / total(); }
  std::vector<std::string> uncovered() const {
    std::vector<std::string> out;
    for (const auto& i : items) {
      if (!i.covered) out.push_back(i.id);
    }
    return out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["criterion"] = to_string(criterion);
    j["covered"] = covered();
    j["total"] = total();
    j["ratio"] = ratio();
    j["uncovered"] = uncovered();
    return j;
  }
};

inline std::string format_ratio(double r) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << r;
  return s.str();
}

inline std::string coverage_table(const std::vector<CoverageReport>& reports) {
  std::ostringstream out;
  out << std::left << std::setw(11) << "criterion" << std::right << std::setw(9) << "covered" << std::setw(7)
      << "total" << std::setw(8) << "ratio" << "\n";
  for (const auto& r : reports) {
    out << std::left << std::setw(11) << to_string(r.criterion) << std::right << std::setw(9) << r.covered()
        << std::setw(7) << r.total() << std::setw(8) << format_ratio(r.ratio()) << "\n";
    for (const auto& u : r.uncovered()) out << "  missing " << u << "\n";
  }
  return out.str();
}

// Structural coverage of one model accumulated from decision traces. Totals
// come from the model; traces only mark items covered.
class CoverageData {
 public:
  explicit CoverageData(const ModelAst& ast) : fingerprint_(dsl::print_model(ast)) {
    for (const Node* d : dsl::decisions(ast)) {
      Decision info;
      info.node = d->id;
      info.then_id = d->then_branch().id;
      info.else_id = d->else_branch().id;
      for (const Expr* a : dsl::decision_atoms(*d->condition)) info.atoms.push_back(dsl::print_expr(*a));
      decisions_.emplace(d->id, std::move(info));
    }
  }

  void accumulate(const DecisionTrace& trace) {
    NodeId expect = NodeId::parse("root");
    for (const auto& rec : trace.decisions) {
      auto it = decisions_.find(rec.node);
      if (it == decisions_.end() || !(rec.node == expect)) {
        throw ModelMismatch("trace visits " + rec.node.str() + " where the model has no such decision");
      }
      const Decision& d = it->second;
      if (rec.conditions.size() != d.atoms.size()) {
        throw ModelMismatch("decision " + rec.node.str() + " recorded " + std::to_string(rec.conditions.size()) +
                            " conditions, model has " + std::to_string(d.atoms.size()));
      }
      for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        if (rec.conditions[i].atom != d.atoms[i]) {
          throw ModelMismatch("decision " + rec.node.str() + " condition " + std::to_string(i) + " is '" +
                              rec.conditions[i].atom + "', model has '" + d.atoms[i] + "'");
        }
      }
      expect = rec.outcome ? d.then_id : d.else_id;
    }
    if (!(trace.leaf == expect) || decisions_.count(trace.leaf)) {
      throw ModelMismatch("trace ends at " + trace.leaf.str() + ", which is not where its decisions lead");
    }
    for (const auto& rec : trace.decisions) {
      ConditionVector v;
      for (const auto& c : rec.conditions) v.push_back(c.value);
      observed_[rec.node].insert({v, rec.outcome});
    }
  }

  // Union of two accumulations over the same model.
  void merge(const CoverageData& other) {
    if (other.fingerprint_ != fingerprint_) throw ModelMismatch("cannot merge coverage of different models");
    for (const auto& [node, obs] : other.observed_) observed_[node].insert(obs.begin(), obs.end());
  }

  CoverageReport report(Criterion c) const {
    CoverageReport r{c, {}};
    for (const auto& [node, d] : decisions_) {
      const auto& obs = observations(node);
      bool seen_true = false, seen_false = false;
      for (const auto& o : obs) (o.second ? seen_true : seen_false) = true;
      switch (c) {
        case Criterion::Branch:
          r.items.push_back({d.then_id.str(), seen_true});
          r.items.push_back({d.else_id.str(), seen_false});
          break;
        case Criterion::Decision:
          r.items.push_back({node.str(), seen_true && seen_false});
          break;
        case Criterion::Condition:
          for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            for (bool value : {true, false}) {
              bool hit = false;
              for (const auto& o : obs) hit = hit || o.first[i] == value;
              r.items.push_back({node.str() + ":" + d.atoms[i] + "=" + (value ? "1" : "0"), hit});
            }
          }
          break;
        case Criterion::Mcdc: {
          auto pairs = mcdc_pairs(obs, d.atoms.size());
          for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            r.items.push_back({node.str() + ":" + d.atoms[i], pairs[i].has_value()});
          }
          break;
        }
      }
    }
    return r;
  }

  struct ConditionPairs {
    NodeId decision;
    std::string atom;
    std::optional<McdcPair> pair;
  };

  std::vector<ConditionPairs> mcdc() const {
    std::vector<ConditionPairs> out;
    for (const auto& [node, d] : decisions_) {
      auto pairs = mcdc_pairs(observations(node), d.atoms.size());
      for (std::size_t i = 0; i < d.atoms.size(); ++i) out.push_back({node, d.atoms[i], pairs[i]});
    }
    return out;
  }

  const std::set<Observation>& observations(const NodeId& decision) const {
    static const std::set<Observation> none;
    auto it = observed_.find(decision);
    return it == observed_.end() ? none : it->second;
  }

 private:
  struct Decision {
    NodeId node, then_id, else_id;
    std::vector<std::string> atoms;
  };

  std::string fingerprint_;
  std::map<NodeId, Decision> decisions_;
  std::map<NodeId, std::set<Observation>> observed_;
};

}  // namespace cyclotest
