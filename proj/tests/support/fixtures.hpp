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
#include <memory>
#include <string>

#include "cyclotest/dsl/parser.hpp"
#include "cyclotest/dsl/predicates.hpp"
#include "cyclotest/iron/model.hpp"
#include "cyclotest/iron/sut.hpp"
#include "cyclotest/mediator/sut_host.hpp"

namespace cyclotest::testing {

// Iron at desk scale: 60 s -> `short_cycles`, 900 s -> `long_cycles` cycles.
struct DeskIron {
  TimeMs period = 1000;
  TimeMs short_cycles = 3;
  TimeMs long_cycles = 5;

  dsl::ExtractedModel model() const {
    return dsl::with_durations(dsl::extract_predicates(dsl::parse_model(iron::kModelSource)),
                               [this](TimeMs d) {
                                 return (d == iron::kShortHoldMs ? short_cycles : long_cycles) * period;
                               });
  }
  iron::IronTiming timing() const { return {short_cycles * period, long_cycles * period, period}; }
};

// A SUT given by a step function over its own state map.
class LambdaSut : public mediator::Sut {
 public:
  using StepFn = std::function<void(const Valuation& in, TimeMs t, Valuation& state, Valuation& out)>;

  LambdaSut(mediator::Signature sig, Valuation state, StepFn fn)
      : sig_(std::move(sig)), state_(std::move(state)), fn_(std::move(fn)) {}

  mediator::Signature signature() const override { return sig_; }
  void set_inputs(const Valuation& in) override { in_ = in; }
  void step(TimeMs t) override { fn_(in_, t, state_, out_); }
  Valuation outputs() const override { return out_; }
  Valuation visible_state() const override {
    Valuation v;
    for (const auto& n : sig_.state) v[n] = state_.at(n);
    return v;
  }

 private:
  mediator::Signature sig_;
  Valuation state_;
  StepFn fn_;
  Valuation in_, out_;
};

}  // namespace cyclotest::testing
