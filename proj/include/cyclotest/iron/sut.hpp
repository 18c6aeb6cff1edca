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

#include <memory>
#include <string>
#include <vector>

#include "cyclotest/iron/model.hpp"
#include "cyclotest/mediator/sut_host.hpp"

namespace cyclotest::iron {

struct IronTiming {
  TimeMs short_hold_ms = kShortHoldMs;  // lying flat
  TimeMs long_hold_ms = kLongHoldMs;    // standing upright
  TimeMs cycle_period_ms = 1000;
};

enum class Mutant {
  None,
  M1,   // heating inverted
  M2,   // upright timer fires one cycle early
  M3,   // flat timer one cycle too long (60 s becomes 61 s at a 1 s period)
  M4,   // move does not reset the still timer
  M5,   // position test inverted
  Mnd,  // kernel clock stalls now and then
};

class UnknownMutant : public Error {
 public:
  explicit UnknownMutant(const std::string& id)
      : Error("unknown mutant '" + id + "' (expected one of none, M1..M5, Mnd)") {}
};

inline Mutant parse_mutant(const std::string& id) {
  if (id.empty() || id == "none") return Mutant::None;
  static const std::vector<std::pair<std::string, Mutant>> names = {
      {"M1", Mutant::M1}, {"M2", Mutant::M2}, {"M3", Mutant::M3},
      {"M4", Mutant::M4}, {"M5", Mutant::M5}, {"Mnd", Mutant::Mnd}};
  for (const auto& [name, m] : names) {
    if (name == id) return m;
  }
  throw UnknownMutant(id);
}

inline std::string mutant_name(Mutant m) {
  switch (m) {
    case Mutant::None: return "none";
    case Mutant::M1: return "M1";
    case Mutant::M2: return "M2";
    case Mutant::M3: return "M3";
    case Mutant::M4: return "M4";
    case Mutant::M5: return "M5";
    case Mutant::Mnd: return "Mnd";
  }
  return "?";
}

// Hand-written shut-off controller. Each timer accumulates the time its
// condition has held, counted from the first cycle it held.
class IronSut : public mediator::Sut {
 public:
  explicit IronSut(IronTiming timing = {}, Mutant mutant = Mutant::None)
      : timing_(timing), mutant_(mutant) {}

  mediator::Signature signature() const override {
    return {"iron", {"move", "position"}, {"heating"}, {}, timing_.cycle_period_ms};
  }

  void set_inputs(const Valuation& in) override {
    move_ = in.at("move") != 0;
    upright_ = in.at("position") != 0;
  }

  void step(TimeMs now) override {
    TimeMs dt = started_ ? now - last_ : 0;
    started_ = true;
    last_ = now;

    if (move_) {
      if (mutant_ != Mutant::M4) still_.reset();
    } else {
      still_.tick(dt);
    }
    upright_timer_.track(upright_, dt);
    flat_timer_.track(!upright_, dt);

    bool vertical = mutant_ == Mutant::M5 ? !upright_ : upright_;
    bool off;
    if (vertical) {
      TimeMs need = timing_.long_hold_ms;
      if (mutant_ == Mutant::M2) need -= timing_.cycle_period_ms;
      off = still_.at_least(need) && upright_timer_.at_least(need);
    } else {
      TimeMs need = timing_.short_hold_ms;
      if (mutant_ == Mutant::M3) need += timing_.cycle_period_ms;
      off = still_.at_least(need) && flat_timer_.at_least(need);
    }
    heating_ = off ? 0 : 1;
    if (mutant_ == Mutant::M1) heating_ = 1 - heating_;
  }

  Valuation outputs() const override { return {{"heating", heating_}}; }
  Valuation visible_state() const override { return {}; }

 private:
  struct Timer {
    bool running = false;
    TimeMs elapsed = 0;
    void reset() {
      running = false;
      elapsed = 0;
    }
    void tick(TimeMs dt) {
      elapsed = running ? elapsed + dt : 0;
      running = true;
    }
    void track(bool holds, TimeMs dt) {
      if (holds) {
        tick(dt);
      } else {
        reset();
      }
    }
    bool at_least(TimeMs t) const { return running && elapsed >= t; }
  };

  IronTiming timing_;
  Mutant mutant_;
  bool move_ = false;
  bool upright_ = false;
  bool started_ = false;
  TimeMs last_ = 0;
  Timer still_, upright_timer_, flat_timer_;
  Value heating_ = 1;
};

// Every `period`-th cycle repeats the previous system time.
inline ClockFn stalling_clock(std::uint64_t period = 7) {
  return [period](std::uint64_t index, TimeMs previous, TimeMs step) {
    if (index == 0) return TimeMs{0};
    return index % period == period - 1 ? previous : previous + step;
  };
}

inline std::unique_ptr<mediator::SutHost> make_host(Mutant mutant, IronTiming timing = {},
                                                   KernelConfig kernel = {}) {
  auto host = std::make_unique<mediator::SutHost>(std::make_unique<IronSut>(timing, mutant), kernel);
  if (mutant == Mutant::Mnd) host->kernel().set_clock(stalling_clock());
  return host;
}

}  // namespace cyclotest::iron
