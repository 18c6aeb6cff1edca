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

// Standalone iron shut-off SUT speaking the NDJSON mediator protocol, over
// stdin/stdout by default or on a TCP port.

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "cyclotest/campaign.hpp"
#include "cyclotest/iron/sut.hpp"
#include "cyclotest/mediator/channel.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("iron-sut");
  logger->set_pattern("iron-sut: %l: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CYCLOTEST_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cyclotest;
  setup_logging();

  CLI::App app{"Iron shut-off SUT"};
  std::string mutant = "none", listen, scale = "1", durations;
  TimeMs period = 1000;
  bool once = false;
  app.add_option("--mutant", mutant, "none, M1..M5 or Mnd");
  app.add_option("--listen", listen, "serve TCP on HOST:PORT (port 0 picks one) instead of stdio");
  app.add_option("--cycle-period-ms", period, "cycle period in ms")->check(CLI::PositiveNumber);
  app.add_option("--time-scale", scale, "uniform scale for period and holds, e.g. 1/20");
  app.add_option("--durations", durations, "hold overrides SECONDS=CYCLES, e.g. 60=3,900=5");
  app.add_flag("--once", once, "with --listen, exit after the first session");
  CLI11_PARSE(app, argc, argv);

  iron::Mutant m;
  iron::IronTiming timing;
  try {
    m = iron::parse_mutant(mutant);
    campaign::TimingConfig t;
    t.cycle_period_ms = period;
    t.time_scale = campaign::Rational::parse(scale);
    if (!durations.empty()) t.duration_cycles = campaign::parse_duration_overrides(durations);
    timing = {t.duration(iron::kShortHoldMs), t.duration(iron::kLongHoldMs), t.period()};
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return campaign::kUsage;
  }
  spdlog::info("mutant {}, holds {} ms / {} ms, period {} ms", iron::mutant_name(m), timing.short_hold_ms,
               timing.long_hold_ms, timing.cycle_period_ms);

  if (listen.empty()) {
    mediator::FdChannel channel(0, 1, false);
    return iron::make_host(m, timing)->serve(channel) ? 0 : campaign::kProtocol;
  }

  try {
    mediator::TcpListener listener(mediator::HostPort::parse(listen));
    std::cout << "listening " << listener.address().host << ":" << listener.address().port << std::endl;
    for (;;) {
      auto channel = listener.accept();
      spdlog::info("session started");
      bool ok = iron::make_host(m, timing)->serve(*channel);
      spdlog::info("session ended {}", ok ? "cleanly" : "abnormally");
      if (once) return ok ? 0 : campaign::kProtocol;
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return campaign::kProtocol;
  }
}
