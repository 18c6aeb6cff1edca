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
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclotest/dsl/predicates.hpp"
#include "cyclotest/interpreter.hpp"
#include "cyclotest/mediator/link.hpp"
#include "cyclotest/mediator/sync.hpp"

namespace cyclotest {

enum class VerdictKind {
  Pass,
  PreconditionViolation,
  InvariantViolation,
  PostconditionFailure,
  MediatorFailure,
};

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Pass: return "pass";
    case VerdictKind::PreconditionViolation: return "precondition_violation";
    case VerdictKind::InvariantViolation: return "invariant_violation";
    case VerdictKind::PostconditionFailure: return "postcondition_failure";
    case VerdictKind::MediatorFailure: return "mediator_failure";
  }
  return "?";
}

struct Mismatch {
  std::string name;
  Value expected = 0;
  Value actual = 0;

  friend bool operator==(const Mismatch&, const Mismatch&) = default;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Pass;
  std::string detail;
  std::uint64_t cycle_index = 0;
  std::vector<Mismatch> mismatches;

  bool pass() const { return kind == VerdictKind::Pass; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

inline nlohmann::ordered_json mismatches_json(const std::vector<Mismatch>& ms) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& m : ms) j.push_back({{"name", m.name}, {"expected", m.expected}, {"actual", m.actual}});
  return j;
}

// One applied stimulus: the inputs, what the model expected, what happened.
struct StimulusRecord {
  Valuation inputs;
  Verdict verdict;
  std::optional<DecisionTrace> trace;  // empty unless the model ran
  std::optional<mediator::CycleObservation> observation;
};

class DuplicateName : public Error {
 public:
  explicit DuplicateName(const std::string& name) : Error("'" + name + "' is already registered") {}
};

class UnknownReference : public Error {
 public:
  UnknownReference(const std::string& check, const std::string& name)
      : Error("'" + check + "' refers to unknown name '" + name + "'") {}
};

using InvariantFn = std::function<bool(const SpecificationState&)>;
using PreconditionFn = std::function<bool(const SpecificationState&, const Valuation& inputs)>;

struct SpecificationOptions {
  HeldThreshold threshold = HeldThreshold::Inclusive;
};

// Contract oracle for one CSUT. Each stimulus is checked against the
// reference model through the link to the SUT.
class Specification {
 public:
  Specification(const dsl::ExtractedModel& model, mediator::Link& link, SpecificationOptions options = {})
      : model_(model), link_(link), options_(options), state_(initial_specification_state(model)) {}

  // Handshake with the SUT under the model's signature.
  void connect(TimeMs cycle_period_ms) {
    link_.handshake(mediator::signature_of(model_.rewritten, cycle_period_ms));
  }

  const dsl::ExtractedModel& model() const { return model_; }
  const SpecificationState& state() const { return state_; }
  std::uint64_t next_cycle() const { return next_cycle_; }

  // `refs` names the variables, outputs or predicate ids the check reads.
  void register_invariant(const std::string& name, const std::vector<std::string>& refs, InvariantFn fn) {
    check_refs(name, refs);
    for (const auto& inv : invariants_) {
      if (inv.first == name) throw DuplicateName(name);
    }
    invariants_.emplace_back(name, std::move(fn));
  }

  void add_precondition(const std::string& name, PreconditionFn fn) {
    for (const auto& p : preconditions_) {
      if (p.first == name) throw DuplicateName(name);
    }
    preconditions_.emplace_back(name, std::move(fn));
  }

  Verdict apply_stimulus(const Valuation& inputs) { return step(inputs).verdict; }

  StimulusRecord step(const Valuation& inputs) {
    StimulusRecord rec{inputs, {}, std::nullopt, std::nullopt};
    rec.verdict.cycle_index = next_cycle_;
    auto fail = [&](VerdictKind kind, std::string detail) {
      rec.verdict.kind = kind;
      rec.verdict.detail = std::move(detail);
      return rec;
    };

    if (auto why = violated_precondition(inputs)) return fail(VerdictKind::PreconditionViolation, *why);

    const SpecificationState pre = state_;
    mediator::CycleObservation obs;
    try {
      obs = link_.exchange(inputs);
      ++next_cycle_;
      mediator::require_keys(obs.outputs, mediator::signature_of(model_.rewritten, 0).outputs,
                             "observation outputs");
    } catch (const Error& e) {
      return fail(VerdictKind::MediatorFailure, e.what());
    }
    rec.observation = obs;
    rec.verdict.cycle_index = obs.cycle;

    SyncResult synced;
    try {
      synced = mediator::sync_state(pre, obs, inputs, model_, options_.threshold);
    } catch (const mediator::MediatorError& e) {
      return fail(VerdictKind::MediatorFailure, e.what());
    } catch (const TimeRegression& e) {
      return fail(VerdictKind::MediatorFailure, e.what());
    } catch (const MissingBinding& e) {
      return fail(VerdictKind::MediatorFailure, std::string("observation incomplete: ") + e.what());
    }
    state_ = std::move(synced.state);
    rec.trace = synced.reference.trace;

    for (const auto& [name, fn] : invariants_) {
      if (!fn(state_)) return fail(VerdictKind::InvariantViolation, "invariant '" + name + "' violated");
    }

    const auto& expected = synced.reference;
    for (const auto& [name, value] : expected.outputs) {
      Value actual = obs.outputs.at(name);
      if (actual != value) rec.verdict.mismatches.push_back({name, value, actual});
    }
    for (const auto& d : model_.rewritten.state_vars) {
      if (d.visibility != dsl::Visibility::Readable) continue;
      Value want = expected.state_post.at(d.name);
      Value got = obs.state.at(d.name);
      if (want != got) rec.verdict.mismatches.push_back({d.name, want, got});
    }
    if (!rec.verdict.mismatches.empty()) {
      return fail(VerdictKind::PostconditionFailure,
                  "reaction differs from the model on path " + expected.trace.leaf.str());
    }
    return rec;
  }

 private:
  std::optional<std::string> violated_precondition(const Valuation& inputs) const {
    for (const auto& d : model_.rewritten.inputs) {
      auto it = inputs.find(d.name);
      if (it == inputs.end()) return "input '" + d.name + "' missing";
      if (!d.type.contains(it->second)) {
        return "input " + d.name + "=" + std::to_string(it->second) + " outside " + d.type.to_string();
      }
    }
    for (const auto& [name, v] : inputs) {
      if (!dsl::find_decl(model_.rewritten.inputs, name)) return "unknown input '" + name + "'";
    }
    for (const auto& [name, fn] : preconditions_) {
      if (!fn(state_, inputs)) return "precondition '" + name + "' rejects " + format_valuation(inputs);
    }
    return std::nullopt;
  }

  void check_refs(const std::string& check, const std::vector<std::string>& refs) const {
    for (const auto& r : refs) {
      bool known = dsl::lookup(model_.rewritten, r).has_value();
      for (const auto& p : model_.predicates) known = known || p.id == r;
      if (!known) throw UnknownReference(check, r);
    }
  }

  const dsl::ExtractedModel& model_;
  mediator::Link& link_;
  SpecificationOptions options_;
  SpecificationState state_;
  std::uint64_t next_cycle_ = 0;
  std::vector<std::pair<std::string, InvariantFn>> invariants_;
  std::vector<std::pair<std::string, PreconditionFn>> preconditions_;
};

}  // namespace cyclotest
