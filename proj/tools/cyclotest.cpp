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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "cyclotest/campaign.hpp"

namespace {

using namespace cyclotest;
using namespace cyclotest::campaign;

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("cyclotest");
  logger->set_pattern("cyclotest: %l: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CYCLOTEST_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

// Timing flags shared by every subcommand.
struct TimingFlags {
  TimeMs period = 1000;
  std::string scale;
  std::string durations;
  CLI::Option* period_opt = nullptr;

  void add(CLI::App* app) {
    period_opt = app->add_option("--cycle-period-ms", period, "cycle period in ms (default 1000)")
                     ->check(CLI::PositiveNumber);
    app->add_option("--time-scale", scale, "uniform rational scale for period and holds, e.g. 1/20");
    app->add_option("--durations", durations, "hold overrides SECONDS=CYCLES, e.g. 60=3,900=5");
  }
  bool given() const { return period_opt->count() > 0 || !scale.empty() || !durations.empty(); }
  TimingConfig build() const {
    TimingConfig t;
    t.cycle_period_ms = period;
    if (!scale.empty()) t.time_scale = Rational::parse(scale);
    if (!durations.empty()) t.duration_cycles = parse_duration_overrides(durations);
    return t;
  }
};

bool write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    spdlog::error("cannot write {}", path);
    return false;
  }
  spdlog::info("wrote {}", path);
  return true;
}

void print_messages(const std::vector<std::string>& messages, int code) {
  for (const auto& m : messages) {
    if (code == kOk) {
      spdlog::warn("{}", m);
    } else {
      spdlog::error("{}", m);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Model-based testing of cyclic control logic"};
  app.require_subcommand(1);

  // run / dot
  RunConfig run;
  TimingFlags run_timing;
  std::vector<std::string> requires_;
  std::optional<std::uint64_t> seed;
  std::string log_path, dot_path, trace_path, report_path, dot_out;
  bool no_streaming = false;
  std::int64_t timeout_ms = 5000;
  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--model", run.model_path, "model file (default: built-in iron model)");
    cmd->add_option("--sut", run.sut, "inproc:iron[:MUTANT], tcp:HOST:PORT or stdio:COMMAND");
    cmd->add_option("--scenario", run.scenario, "auto, iron or concrete");
    run_timing.add(cmd);
    cmd->add_flag("--no-streaming", no_streaming, "wall-clock cycles with overrun monitoring (in-process only)");
    cmd->add_flag("--strict-held", run.strict_held, "held() fires once elapsed time exceeds the duration");
    cmd->add_option("--budget", run.budget, "maximum test actions per part")->check(CLI::PositiveNumber);
    cmd->add_option("--max-states", run.max_states, "maximum abstract states per part")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "shuffle the order actions are tried in");
    cmd->add_option("--require", requires_, "coverage requirement CRITERION=RATIO (branch, decision, condition, mcdc)");
    cmd->add_option("--part", run.parts, "test the subtree at this node id on its own (repeatable)");
    cmd->add_option("--jobs", run.jobs, "parts run in parallel")->check(CLI::PositiveNumber);
    cmd->add_flag("--deterministic", run.deterministic, "leave wall-clock measurements out of every output");
    cmd->add_flag("--hlr-invariant", run.hlr_invariant, "check the upright shut-off requirement as an invariant");
    cmd->add_option("--timeout-ms", timeout_ms, "per-exchange timeout for remote SUTs")->check(CLI::PositiveNumber);
  };

  auto* run_cmd = app.add_subcommand("run", "test a SUT against the model");
  add_run_options(run_cmd);
  run_cmd->add_option("--format", run.report_format, "report format: text or json");
  run_cmd->add_option("--report", report_path, "write the report here instead of stdout");
  run_cmd->add_option("--log", log_path, "write the test log as JSON lines");
  run_cmd->add_option("--dot", dot_path, "write the explored automaton as DOT");
  run_cmd->add_option("--trace-cycles", trace_path, "write kernel cycle records as JSON lines (in-process SUT)");

  auto* dot_cmd = app.add_subcommand("dot", "explore and print the abstract automaton as DOT");
  add_run_options(dot_cmd);
  dot_cmd->add_option("-o,--output", dot_out, "output file (default stdout)");

  // enumerate-states / reduce
  AnalysisConfig analysis;
  TimingFlags analysis_timing;
  auto add_analysis_options = [&](CLI::App* cmd) {
    cmd->add_option("--model", analysis.model_path, "model file (default: built-in iron model)");
    analysis_timing.add(cmd);
    cmd->add_flag("--strict-held", analysis.strict_held, "held() fires once elapsed time exceeds the duration");
    cmd->add_option("--format", analysis.report_format, "report format: text or json");
  };
  auto* enum_cmd = app.add_subcommand("enumerate-states", "count reachable temporal flag vectors");
  add_analysis_options(enum_cmd);
  auto* reduce_cmd = app.add_subcommand("reduce", "derive test cases, projections and the state partition");
  add_analysis_options(reduce_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*enum_cmd || *reduce_cmd) {
      if (analysis_timing.given()) analysis.timing = analysis_timing.build();
      auto out = *enum_cmd ? cmd_enumerate_states(analysis) : cmd_reduce(analysis);
      print_messages(out.messages, out.exit_code);
      std::cout << out.report;
      return out.exit_code;
    }

    run.timing = run_timing.build();
    run.streaming = !no_streaming;
    run.seed = seed;
    run.timeout = std::chrono::milliseconds(timeout_ms);
    run.trace_cycles = !trace_path.empty();
    for (const auto& r : requires_) run.required.push_back(Requirement::parse(r));
    if (run.trace_cycles && run.sut.rfind("inproc:", 0) != 0) {
      spdlog::warn("--trace-cycles only sees the kernel of an in-process SUT; the trace will be empty");
    }

    auto out = cmd_run(run);
    print_messages(out.messages, out.exit_code);
    bool written = true;
    if (*dot_cmd) {
      written = write_file(dot_out, out.dot);
    } else {
      written = write_file(report_path, out.report);
      if (!log_path.empty()) written = write_file(log_path, out.log.to_jsonl()) && written;
      if (!dot_path.empty()) written = write_file(dot_path, out.dot) && written;
      if (!trace_path.empty()) {
        std::string text;
        for (const auto& line : out.trace) text += line + "\n";
        written = write_file(trace_path, text) && written;
      }
    }
    if (!written && out.exit_code == kOk) return kUsage;
    return out.exit_code;
  } catch (const CampaignError& e) {
    spdlog::error("{}", e.what());
    return e.code();
  }
}
