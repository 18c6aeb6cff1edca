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
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclotest/common.hpp"

namespace cyclotest {

struct KernelConfig {
  TimeMs cycle_period_ms = 1000;
  // Start the next cycle as soon as the subsystems finish.
  bool streaming = true;
  // System time is written at the start of each cycle as previous + period
  // instead of being read from the wall clock.
  bool writable_sys_time = true;
  // Require set-mediator first and get-mediator last.
  bool testing_mode = false;
  bool fail_on_overrun = false;
};

struct CycleRecord {
  std::uint64_t cycle_index = 0;
  TimeMs sys_time_ms = 0;
  std::int64_t exec_time_us = 0;
  bool overrun = false;

  friend bool operator==(const CycleRecord&, const CycleRecord&) = default;
};

// One JSON line of the cycle log. Wall-clock execution time is left out in
// deterministic mode.
inline std::string cycle_record_json(const CycleRecord& r, bool deterministic) {
  nlohmann::ordered_json j;
  j["cycle"] = r.cycle_index;
  j["sys_time_ms"] = r.sys_time_ms;
  if (!deterministic) j["exec_time_us"] = r.exec_time_us;
  j["overrun"] = r.overrun;
  return j.dump();
}

class CycleContext {
 public:
  CycleContext(std::uint64_t index, TimeMs sys_time) : index_(index), sys_time_(sys_time) {}
  std::uint64_t cycle_index() const { return index_; }
  // Fixed at cycle start; every subsystem sees the same value.
  TimeMs sys_time_ms() const { return sys_time_; }

 private:
  std::uint64_t index_;
  TimeMs sys_time_;
};

using SubsystemFn = std::function<void(const CycleContext&)>;

// Writes the system time of cycle `index` given the previous cycle's time.
using ClockFn = std::function<TimeMs(std::uint64_t index, TimeMs previous, TimeMs period)>;

inline TimeMs simulated_clock(std::uint64_t index, TimeMs previous, TimeMs period) {
  return index == 0 ? 0 : previous + period;
}

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id) : Error("subsystem '" + id + "' already registered") {}
};

class RegistrationClosed : public Error {
 public:
  RegistrationClosed() : Error("subsystems cannot be registered after the first cycle") {}
};

class SubsystemPanic : public Error {
 public:
  SubsystemPanic(std::string id, const std::string& what)
      : Error("subsystem '" + id + "' failed: " + what), id_(std::move(id)) {}
  const std::string& subsystem() const { return id_; }

 private:
  std::string id_;
};

class OverrunError : public Error {
 public:
  explicit OverrunError(const CycleRecord& r)
      : Error("cycle " + std::to_string(r.cycle_index) + " took " + std::to_string(r.exec_time_us) +
              " us, over the cycle period") {}
};

// Thrown by a subsystem to end the run; passes through the kernel unwrapped.
struct StopRequested {};

// Global control loop of the simulated RTES. Single-threaded; independent
// kernels share nothing.
class Kernel {
 public:
  explicit Kernel(KernelConfig config) : config_(config) {
    if (config_.cycle_period_ms <= 0) throw Error("cycle period must be positive");
  }

  void register_subsystem(std::string id, SubsystemFn step) {
    if (started_) throw RegistrationClosed();
    for (const auto& s : subsystems_) {
      if (s.first == id) throw DuplicateId(id);
    }
    subsystems_.emplace_back(std::move(id), std::move(step));
  }

  void set_streaming(bool on) { config_.streaming = on; }
  void set_clock(ClockFn clock) { clock_ = std::move(clock); }
  void set_cycle_observer(std::function<void(const CycleRecord&)> fn) { observer_ = std::move(fn); }

  const KernelConfig& config() const { return config_; }
  std::vector<std::string> subsystem_order() const {
    std::vector<std::string> ids;
    for (const auto& s : subsystems_) ids.push_back(s.first);
    return ids;
  }
  std::uint64_t next_cycle() const { return next_index_; }
  TimeMs last_sys_time() const { return last_time_; }
  // Summary flag reported at the end of a run.
  bool any_overrun() const { return any_overrun_; }

  CycleRecord run_cycle() {
    if (!started_) start();
    using Clock = std::chrono::steady_clock;
    auto cycle_start = Clock::now();

    TimeMs now;
    if (config_.writable_sys_time) {
      now = clock_(next_index_, last_time_, config_.cycle_period_ms);
    } else {
      now = std::chrono::duration_cast<std::chrono::milliseconds>(cycle_start - epoch_).count();
    }
    CycleContext ctx(next_index_, now);
    for (auto& [id, step] : subsystems_) {
      try {
        step(ctx);
      } catch (const StopRequested&) {
        throw;
      } catch (const std::exception& e) {
        throw SubsystemPanic(id, e.what());
      }
    }
    auto exec = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - cycle_start);

    CycleRecord record{next_index_, now, exec.count(), false};
    if (!config_.streaming) {
      record.overrun = record.exec_time_us > config_.cycle_period_ms * 1000;
      if (!record.overrun) {
        std::this_thread::sleep_until(cycle_start + std::chrono::milliseconds(config_.cycle_period_ms));
      }
    }
    any_overrun_ = any_overrun_ || record.overrun;
    last_time_ = now;
    ++next_index_;
    if (observer_) observer_(record);
    if (record.overrun && config_.fail_on_overrun) throw OverrunError(record);
    return record;
  }

 private:
  void start() {
    if (config_.testing_mode) {
      auto ids = subsystem_order();
      if (ids.size() < 2 || ids.front() != "set-mediator" || ids.back() != "get-mediator") {
        throw Error("testing mode requires set-mediator first and get-mediator last");
      }
    }
    started_ = true;
    epoch_ = std::chrono::steady_clock::now();
  }

  KernelConfig config_;
  std::vector<std::pair<std::string, SubsystemFn>> subsystems_;
  ClockFn clock_ = simulated_clock;
  std::function<void(const CycleRecord&)> observer_;
  bool started_ = false;
  bool any_overrun_ = false;
  std::uint64_t next_index_ = 0;
  TimeMs last_time_ = 0;
  std::chrono::steady_clock::time_point epoch_;
};

}  // namespace cyclotest
