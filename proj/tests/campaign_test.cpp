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

#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cyclotest/campaign.hpp"

namespace cyclotest::campaign {
namespace {

namespace fs = std::filesystem;

RunConfig desk(const std::string& sut = "inproc:iron") {
  RunConfig c;
  c.sut = sut;
  c.timing.duration_cycles = parse_duration_overrides("60=3,900=5");
  c.deterministic = true;
  return c;
}

fs::path write_model(const std::string& name, const std::string& text) {
  auto p = fs::temp_directory_path() / ("cyclotest_" + std::to_string(::getpid()) + "_" + name + ".ctl");
  std::ofstream(p) << text;
  return p;
}

const char* kOneHold = R"(model lamp {
  input b : bool;
  output o : bool;
  logic {
    if (held(b, 2s)) { o = 1; } else { o = 0; }
  }
})";

const char* kNoHold = R"(model wire {
  input b : bool;
  output o : bool;
  logic {
    if (b) { o = 1; } else { o = 0; }
  }
})";

int exit_of(const std::string& cmd) {
  int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// A loopback port nobody listens on.
int closed_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&a), sizeof a);
  socklen_t len = sizeof a;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&a), &len);
  ::close(fd);
  return ntohs(a.sin_port);
}

TEST(Rational, Parse) {
  EXPECT_EQ(Rational::parse("3").num, 3);
  auto r = Rational::parse("1/20");
  EXPECT_EQ(r.num, 1);
  EXPECT_EQ(r.den, 20);
  EXPECT_EQ(r.apply(60000), 3000);
  for (const char* bad : {"", "0", "-1", "1/0", "a/2", "1/2x"}) {
    EXPECT_THROW(Rational::parse(bad), CampaignError) << bad;
  }
  try {
    Rational::parse("1/7").apply(1000);
    FAIL();
  } catch (const CampaignError& e) {
    EXPECT_EQ(e.code(), kUsage);
  }
}

TEST(Timing, OverridesAndScale) {
  auto d = parse_duration_overrides("60=3,900s=5");
  EXPECT_EQ(d.at(60000), 3);
  EXPECT_EQ(d.at(900000), 5);
  EXPECT_THROW(parse_duration_overrides("60"), CampaignError);
  EXPECT_THROW(parse_duration_overrides("60=x"), CampaignError);

  TimingConfig t;
  t.cycle_period_ms = 200;
  t.duration_cycles = d;
  EXPECT_EQ(t.duration(60000), 600);
  EXPECT_EQ(t.duration(5000), 5000);
  t.time_scale = Rational::parse("1/10");
  EXPECT_EQ(t.period(), 20);
  EXPECT_EQ(t.duration(5000), 500);
  EXPECT_EQ(t.duration(900000), 100);
}

TEST(Timing, RankCompression) {
  auto model = load_model("").model;
  auto t = rank_compressed(model, 500);
  EXPECT_EQ(t.duration_cycles.at(60000), 3);
  EXPECT_EQ(t.duration_cycles.at(900000), 5);
  auto scaled = apply_timing(model, t);
  for (const auto& p : scaled.predicates) EXPECT_EQ(p.duration_ms, p.declared_ms == 60000 ? 1500 : 2500);
}

TEST(SutTarget, Parse) {
  auto a = SutTarget::parse("inproc:iron:M3");
  EXPECT_EQ(a.kind, SutTarget::Kind::InProcess);
  EXPECT_EQ(a.mutant, iron::Mutant::M3);
  auto b = SutTarget::parse("tcp:127.0.0.1:9000");
  EXPECT_EQ(b.kind, SutTarget::Kind::Tcp);
  EXPECT_EQ(b.address.port, 9000);
  auto c = SutTarget::parse("stdio:./iron-sut --mutant M1");
  EXPECT_EQ(c.command, "./iron-sut --mutant M1");
  for (const char* bad : {"inproc:toaster", "inproc:iron:M9", "tcp:host", "stdio:", "serial:x"}) {
    try {
      SutTarget::parse(bad);
      ADD_FAILURE() << bad;
    } catch (const CampaignError& e) {
      EXPECT_EQ(e.code(), kUsage) << bad;
    }
  }
}

TEST(Requirement, Parse) {
  auto r = Requirement::parse("mcdc=0.75");
  EXPECT_EQ(r.criterion, Criterion::Mcdc);
  EXPECT_DOUBLE_EQ(r.ratio, 0.75);
  for (const char* bad : {"branch", "branch=", "branch=1.5", "paths=1", "branch=0.5x"}) {
    EXPECT_THROW(Requirement::parse(bad), CampaignError) << bad;
  }
}

TEST(LoadModel, Errors) {
  try {
    load_model("/nonexistent/iron.ctl");
    FAIL();
  } catch (const CampaignError& e) {
    EXPECT_EQ(e.code(), kParse);
  }
  auto broken = write_model("broken", "model x { input a : bool; logic { if (a) { } ");
  EXPECT_THROW(load_model(broken.string()), CampaignError);
  auto undeclared = write_model("undeclared", "model x { input a : bool; output o : bool; logic { o = q; } }");
  try {
    load_model(undeclared.string());
    FAIL();
  } catch (const CampaignError& e) {
    EXPECT_EQ(e.code(), kParse);
  }
  fs::remove(broken);
  fs::remove(undeclared);
}

TEST(Run, CorrectSutPasses) {
  auto out = cmd_run(desk());
  EXPECT_EQ(out.exit_code, kOk) << out.report;
  EXPECT_EQ(out.log.failures(), 0u);
  EXPECT_NE(out.report.find("PASS (exit 0)"), std::string::npos);
}

TEST(Run, ExitCodes) {
  EXPECT_EQ(cmd_run(desk("inproc:iron:M1")).exit_code, kVerdict);
  EXPECT_EQ(cmd_run(desk("inproc:iron:Mnd")).exit_code, kTraversal);

  auto budget = desk();
  budget.budget = 3;
  EXPECT_EQ(cmd_run(budget).exit_code, kTraversal);

  auto scenario = desk();
  scenario.scenario = "random";
  EXPECT_EQ(cmd_run(scenario).exit_code, kUsage);

  auto model = desk();
  model.model_path = "/nonexistent.ctl";
  EXPECT_EQ(cmd_run(model).exit_code, kParse);

  auto dead = desk("stdio:exit 0");
  dead.timeout = std::chrono::milliseconds(500);
  EXPECT_EQ(cmd_run(dead).exit_code, kProtocol);

  auto refused = desk("tcp:127.0.0.1:" + std::to_string(closed_port()));
  EXPECT_EQ(cmd_run(refused).exit_code, kProtocol);

  auto part = desk();
  part.parts = {"T"};
  part.required = {Requirement::parse("branch=1")};
  EXPECT_EQ(cmd_run(part).exit_code, kCoverage);
}

TEST(Run, ProtocolOutranksVerdicts) {
  auto both = desk("stdio:exit 0");
  both.parts = {"T", "E"};
  both.timeout = std::chrono::milliseconds(500);
  EXPECT_EQ(cmd_run(both).exit_code, kProtocol);
}

TEST(Run, InvariantCatchesMutant) {
  auto c = desk("inproc:iron:M1");
  c.hlr_invariant = true;
  auto out = cmd_run(c);
  EXPECT_EQ(out.exit_code, kVerdict);
  bool seen = false;
  for (const auto& e : out.log.entries) seen = seen || e.record.verdict.kind == VerdictKind::InvariantViolation;
  EXPECT_TRUE(seen);
}

TEST(Run, DeterministicJsonIsStable) {
  auto c = desk();
  c.report_format = "json";
  auto a = cmd_run(c), b = cmd_run(c);
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(a.log.to_jsonl(), b.log.to_jsonl());
  auto j = nlohmann::json::parse(a.report);
  EXPECT_FALSE(j.contains("elapsed_ms"));
  EXPECT_EQ(j["exit_code"], 0);
  EXPECT_EQ(j["durations_ms"].size(), 4u);
}

TEST(Run, JobsDoNotChangeTheReport) {
  auto c = desk();
  c.report_format = "json";
  c.parts = {"T", "E"};
  c.jobs = 1;
  auto one = cmd_run(c);
  c.jobs = 2;
  auto two = cmd_run(c);
  EXPECT_EQ(one.report, two.report);
  EXPECT_EQ(one.exit_code, kOk);
  auto j = nlohmann::json::parse(one.report);
  EXPECT_EQ(j["parts"].size(), 2u);
  EXPECT_EQ(j["coverage"][0]["ratio"], 1.0);
}

TEST(Run, TraceLines) {
  auto c = desk();
  c.trace_cycles = true;
  auto out = cmd_run(c);
  ASSERT_FALSE(out.trace.empty());
  for (std::size_t i = 0; i < out.trace.size(); ++i) {
    auto j = nlohmann::json::parse(out.trace[i]);
    EXPECT_EQ(j["cycle"], i);
    EXPECT_EQ(j["sys_time_ms"], static_cast<TimeMs>(i) * 1000);
    EXPECT_FALSE(j.contains("exec_time_us"));
  }
}

TEST(Run, ConcreteScenarioForOtherModels) {
  auto path = write_model("lamp_run", kOneHold);
  RunConfig c;
  c.model_path = path.string();
  c.sut = "inproc:iron";
  auto out = cmd_run(c);
  EXPECT_EQ(out.exit_code, kProtocol);  // signatures differ
  fs::remove(path);
}

TEST(Analysis, EnumerateSmallModels) {
  auto one = write_model("lamp", kOneHold);
  auto none = write_model("wire", kNoHold);
  AnalysisConfig c;
  c.report_format = "json";
  c.model_path = one.string();
  auto a = cmd_enumerate_states(c);
  ASSERT_EQ(a.exit_code, kOk);
  auto j = nlohmann::json::parse(a.report);
  EXPECT_EQ(j["upper_bound"], 2);
  EXPECT_EQ(j["reachable"], 2);

  c.model_path = none.string();
  j = nlohmann::json::parse(cmd_enumerate_states(c).report);
  EXPECT_EQ(j["upper_bound"], 1);
  EXPECT_EQ(j["reachable"], 1);

  auto r = cmd_reduce(c);
  ASSERT_EQ(r.exit_code, kOk);
  j = nlohmann::json::parse(r.report);
  EXPECT_EQ(j["test_cases"].size(), 2u);
  EXPECT_EQ(j["partition"].size(), 1u);
  EXPECT_TRUE(j["partition_sound"].get<bool>());
  fs::remove(one);
  fs::remove(none);
}

TEST(Analysis, IronText) {
  AnalysisConfig c;
  auto out = cmd_enumerate_states(c);
  EXPECT_NE(out.report.find("upper bound: 16"), std::string::npos);
  EXPECT_NE(out.report.find("reachable: 9"), std::string::npos);
  c.report_format = "yaml";
  EXPECT_EQ(cmd_enumerate_states(c).exit_code, kUsage);
}

TEST(Cli, ExitCodes) {
  const std::string cli = CYCLOTEST_CLI;
  const std::string sut = IRON_SUT;
  const std::string d = " --durations 60=3,900=5";
  EXPECT_EQ(exit_of(cli + " run" + d), kOk);
  EXPECT_EQ(exit_of(cli + " run --sut inproc:iron:M2" + d), kVerdict);
  EXPECT_EQ(exit_of(cli + " run --model /nope" + d), kParse);
  EXPECT_EQ(exit_of(cli + " run --bogus"), kUsage);
  EXPECT_EQ(exit_of(cli + " run --sut 'stdio:" + sut + " --mutant M4" + d + "'" + d), kVerdict);
  EXPECT_EQ(exit_of(cli + " enumerate-states"), kOk);
  EXPECT_EQ(exit_of(cli + " reduce --format json"), kOk);
  EXPECT_EQ(exit_of(sut + " --mutant M42"), kUsage);
}

}  // namespace
}  // namespace cyclotest::campaign
