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

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "cyclotest/kernel.hpp"
#include "cyclotest/mediator/channel.hpp"
#include "cyclotest/mediator/protocol.hpp"

namespace cyclotest::mediator {

// The control subsystem under test as the kernel sees it.
class Sut {
 public:
  virtual ~Sut() = default;
  virtual Signature signature() const = 0;
  virtual void set_inputs(const Valuation& inputs) = 0;
  virtual void step(TimeMs sys_time_ms) = 0;
  virtual Valuation outputs() const = 0;
  virtual Valuation visible_state() const = 0;
};

inline void require_keys(const Valuation& values, const std::vector<std::string>& names,
                         const std::string& what) {
  std::set<std::string> want(names.begin(), names.end());
  std::set<std::string> got;
  for (const auto& [k, v] : values) got.insert(k);
  if (want == got) return;
  for (const auto& n : want) {
    if (!got.count(n)) throw ProtocolError(what + " lacks '" + n + "'");
  }
  for (const auto& n : got) {
    if (!want.count(n)) throw ProtocolError(what + " has unknown '" + n + "'");
  }
}

// Simulated RTES around one CSUT: set-mediator, csut and get-mediator run as
// kernel subsystems in that order.
class SutHost {
 public:
  // The cycle period comes from the SUT's signature; `base` supplies the
  // remaining kernel settings.
  explicit SutHost(std::unique_ptr<Sut> sut, KernelConfig base = {})
      : sut_(std::move(sut)), signature_(sut_->signature()), kernel_(with_period(base, signature_.cycle_period_ms)) {
    kernel_.register_subsystem("set-mediator", [this](const CycleContext& c) {
      sut_->set_inputs(next_inputs_(c));
    });
    kernel_.register_subsystem("csut", [this](const CycleContext& c) { sut_->step(c.sys_time_ms()); });
    kernel_.register_subsystem("get-mediator", [this](const CycleContext& c) {
      last_ = CycleObservation{c.cycle_index(), c.sys_time_ms(), sut_->outputs(), sut_->visible_state()};
      if (sink_) sink_(*last_);
    });
  }

  const Signature& signature() const { return signature_; }
  Kernel& kernel() { return kernel_; }
  Sut& sut() { return *sut_; }

  // Drives one cycle with the given inputs.
  CycleObservation run_cycle(const Valuation& inputs) {
    next_inputs_ = [&inputs](const CycleContext&) { return inputs; };
    sink_ = nullptr;
    kernel_.run_cycle();
    return *last_;
  }

  // Serves one remote test system until it shuts down or disconnects.
  // Returns false if the session ended abnormally.
  bool serve(LineChannel& channel) {
    using std::chrono::milliseconds;
    try {
      Message hello = Message::parse(channel.read_line(milliseconds(-1)));
      Signature theirs = hello.signature();
      if (theirs != signature_) {
        channel.write_line(encode_error("signature mismatch: " + describe_mismatch(signature_, theirs)));
        return false;
      }
      channel.write_line(encode_hello(signature_));

      next_inputs_ = [&channel, this](const CycleContext& c) {
        Message m = Message::parse(channel.read_line(milliseconds(-1)));
        if (m.type() == "shutdown") throw StopRequested{};
        m.expect("set_inputs");
        auto cycle = m.get<std::uint64_t>("cycle");
        if (cycle != c.cycle_index()) {
          throw ProtocolError("set_inputs for cycle " + std::to_string(cycle) + " during cycle " +
                              std::to_string(c.cycle_index()));
        }
        Valuation values = m.valuation("values");
        require_keys(values, signature_.inputs, "set_inputs");
        return values;
      };
      sink_ = [&channel](const CycleObservation& o) { channel.write_line(encode_observation(o)); };
      for (;;) kernel_.run_cycle();
    } catch (const StopRequested&) {
      return true;
    } catch (const SubsystemPanic& e) {
      try_send(channel, e.what());
      return false;
    } catch (const DisconnectError&) {
      return false;
    } catch (const Error& e) {
      try_send(channel, e.what());
      return false;
    }
  }

 private:
  static KernelConfig with_period(KernelConfig c, TimeMs period) {
    c.cycle_period_ms = period;
    c.testing_mode = true;
    return c;
  }

  static void try_send(LineChannel& channel, const std::string& message) {
    try {
      channel.write_line(encode_error(message));
    } catch (const Error&) {
    }
  }

  std::unique_ptr<Sut> sut_;
  Signature signature_;
  Kernel kernel_;
  std::function<Valuation(const CycleContext&)> next_inputs_;
  std::function<void(const CycleObservation&)> sink_;
  std::optional<CycleObservation> last_;
};

}  // namespace cyclotest::mediator
