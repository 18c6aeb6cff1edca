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
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclotest/contracts.hpp"
#include "cyclotest/coverage.hpp"
#include "cyclotest/dsl/check.hpp"
#include "cyclotest/dsl/parser.hpp"
#include "cyclotest/dsl/predicates.hpp"
#include "cyclotest/iron/model.hpp"
#include "cyclotest/iron/scenario.hpp"
#include "cyclotest/iron/sut.hpp"
#include "cyclotest/mediator/channel.hpp"
#include "cyclotest/mediator/link.hpp"
#include "cyclotest/reduction.hpp"
#include "cyclotest/scenarios.hpp"
#include "cyclotest/traversal.hpp"

namespace cyclotest::campaign {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kProtocol = 3,
  kVerdict = 4,
  kCoverage = 5,
  kTraversal = 6,
};

class CampaignError : public Error {
 public:
  CampaignError(int code, const std::string& what) : Error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

namespace detail {

inline std::int64_t parse_int(std::string_view text, const std::string& what) {
  std::int64_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw CampaignError(kUsage, "invalid " + what + " '" + std::string(text) + "'");
  }
  return v;
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, sep);) out.push_back(item);
  return out;
}

}  // namespace detail

// A positive ratio such as 1/20.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  static Rational parse(const std::string& text) {
    auto slash = text.find('/');
    Rational r;
    r.num = detail::parse_int(text.substr(0, slash), "time scale");
    r.den = slash == std::string::npos ? 1 : detail::parse_int(text.substr(slash + 1), "time scale");
    if (r.num <= 0 || r.den <= 0) throw CampaignError(kUsage, "time scale must be positive: " + text);
    return r;
  }

  TimeMs apply(TimeMs ms) const {
    if (ms * num % den != 0) {
      throw CampaignError(kUsage, "time scale " + str() + " maps " + std::to_string(ms) +
                                      " ms to a fraction of a millisecond");
    }
    return ms * num / den;
  }

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

// Cycle period and hold durations of a run. A duration override pins a
// declared duration to a number of cycles; other durations and the period
// follow the uniform scale.
struct TimingConfig {
  TimeMs cycle_period_ms = 1000;
  Rational time_scale;
  std::map<TimeMs, std::int64_t> duration_cycles;

  TimeMs period() const {
    TimeMs p = time_scale.apply(cycle_period_ms);
    if (p <= 0) throw CampaignError(kUsage, "cycle period must be positive");
    return p;
  }

  TimeMs duration(TimeMs declared) const {
    if (auto it = duration_cycles.find(declared); it != duration_cycles.end()) return it->second * period();
    return time_scale.apply(declared);
  }
};

// "60=3,900=5": seconds as declared (an "s" suffix is allowed) to cycles.
inline std::map<TimeMs, std::int64_t> parse_duration_overrides(const std::string& text) {
  std::map<TimeMs, std::int64_t> out;
  for (const auto& item : detail::split(text, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw CampaignError(kUsage, "expected SECONDS=CYCLES, got '" + item + "'");
    std::string secs = item.substr(0, eq);
    if (!secs.empty() && secs.back() == 's') secs.pop_back();
    auto cycles = detail::parse_int(item.substr(eq + 1), "cycle count");
    if (cycles < 0) throw CampaignError(kUsage, "negative cycle count in '" + item + "'");
    out[detail::parse_int(secs, "duration") * 1000] = cycles;
  }
  return out;
}

// The i-th smallest distinct duration becomes 3 + 2i cycles. Keeps the
// ordering of the durations while making every hold a few cycles long.
inline TimingConfig rank_compressed(const dsl::ExtractedModel& model, TimeMs period = 1000) {
  TimingConfig t;
  t.cycle_period_ms = period;
  std::set<TimeMs> distinct;
  for (const auto& p : model.predicates) distinct.insert(p.declared_ms);
  std::int64_t cycles = 3;
  for (TimeMs d : distinct) {
    t.duration_cycles[d] = cycles;
    cycles += 2;
  }
  return t;
}

inline dsl::ExtractedModel apply_timing(dsl::ExtractedModel model, const TimingConfig& timing) {
  for (auto& p : model.predicates) p.duration_ms = timing.duration(p.declared_ms);
  return model;
}

struct LoadedModel {
  std::string file;
  dsl::ExtractedModel model;
  std::vector<std::string> warnings;
};

// An empty path loads the built-in iron model.
inline LoadedModel load_model(const std::string& path) {
  LoadedModel out;
  std::string source;
  if (path.empty()) {
    out.file = "<iron>";
    source = iron::kModelSource;
  } else {
    out.file = path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CampaignError(kParse, "cannot read model file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    source = text.str();
  }
  dsl::ModelAst ast;
  try {
    ast = dsl::parse_model(source);
  } catch (const dsl::ParseError& e) {
    throw CampaignError(kParse, out.file + ":" + e.what());
  }
  std::string errors;
  for (const auto& d : dsl::check_model(ast)) {
    if (d.severity == dsl::Severity::Error) {
      errors += (errors.empty() ? "" : "\n") + d.format(out.file);
    } else {
      out.warnings.push_back(d.format(out.file));
    }
  }
  if (!errors.empty()) throw CampaignError(kParse, errors);
  try {
    out.model = dsl::extract_predicates(ast);
  } catch (const dsl::UnsupportedTemporalFormula& e) {
    throw CampaignError(kParse, out.file + ":" + e.what());
  }
  return out;
}

// inproc:<name>[:<mutant>], tcp:<host>:<port> or stdio:<command>.
struct SutTarget {
  enum class Kind { InProcess, Tcp, Stdio };
  Kind kind = Kind::InProcess;
  std::string name = "iron";
  iron::Mutant mutant = iron::Mutant::None;
  mediator::HostPort address;
  std::string command;
  std::string text = "inproc:iron";

  static SutTarget parse(const std::string& text) {
    SutTarget t;
    t.text = text;
    auto colon = text.find(':');
    std::string scheme = text.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
      if (scheme == "inproc") {
        auto c = rest.find(':');
        t.name = rest.substr(0, c);
        if (c != std::string::npos) t.mutant = iron::parse_mutant(rest.substr(c + 1));
        if (t.name != "iron") throw CampaignError(kUsage, "unknown in-process SUT '" + t.name + "' (available: iron)");
      } else if (scheme == "tcp") {
        t.kind = Kind::Tcp;
        t.address = mediator::HostPort::parse(rest);
      } else if (scheme == "stdio" && !rest.empty()) {
        t.kind = Kind::Stdio;
        t.command = rest;
      } else {
        throw CampaignError(kUsage, "invalid SUT '" + text + "' (expected inproc:iron[:MUTANT], tcp:HOST:PORT or stdio:CMD)");
      }
    } catch (const CampaignError&) {
      throw;
    } catch (const Error& e) {
      throw CampaignError(kUsage, e.what());
    }
    return t;
  }
};

// Once an exchange has failed every later one fails the same way, so a dead
// SUT costs one timeout rather than one per stimulus.
class FailFastLink : public mediator::Link {
 public:
  explicit FailFastLink(std::unique_ptr<mediator::Link> inner) : inner_(std::move(inner)) {}

  void handshake(const mediator::Signature& expected) override { inner_->handshake(expected); }
  mediator::CycleObservation exchange(const Valuation& inputs) override {
    if (failure_) throw mediator::MediatorError(*failure_);
    try {
      return inner_->exchange(inputs);
    } catch (const Error& e) {
      failure_ = e.what();
      throw;
    }
  }
  void shutdown() override { inner_->shutdown(); }

 private:
  std::unique_ptr<mediator::Link> inner_;
  std::optional<std::string> failure_;
};

struct LinkHandle {
  std::unique_ptr<mediator::Link> link;
  mediator::SutHost* host = nullptr;  // in-process targets only
};

inline LinkHandle make_link(const SutTarget& target, const TimingConfig& timing, bool streaming,
                            std::chrono::milliseconds timeout) {
  LinkHandle h;
  switch (target.kind) {
    case SutTarget::Kind::InProcess: {
      iron::IronTiming it{timing.duration(iron::kShortHoldMs), timing.duration(iron::kLongHoldMs), timing.period()};
      KernelConfig kc;
      kc.streaming = streaming;
      kc.writable_sys_time = streaming;
      auto host = iron::make_host(target.mutant, it, kc);
      h.host = host.get();
      h.link = std::make_unique<mediator::InProcessLink>(std::move(host));
      break;
    }
    case SutTarget::Kind::Tcp:
      h.link = std::make_unique<mediator::StreamLink>(mediator::tcp_connect(target.address, timeout), timeout);
      break;
    case SutTarget::Kind::Stdio:
      h.link = std::make_unique<mediator::StreamLink>(std::make_unique<mediator::ChildProcess>(target.command),
                                                      timeout);
      break;
  }
  h.link = std::make_unique<FailFastLink>(std::move(h.link));
  return h;
}

struct Requirement {
  Criterion criterion = Criterion::Branch;
  double ratio = 1.0;

  // "branch=1.0" or "mcdc=0.8".
  static Requirement parse(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos) throw CampaignError(kUsage, "expected CRITERION=RATIO, got '" + text + "'");
    Requirement r;
    try {
      r.criterion = parse_criterion(text.substr(0, eq));
      std::size_t used = 0;
      r.ratio = std::stod(text.substr(eq + 1), &used);
      if (used != text.size() - eq - 1) throw std::invalid_argument(text);
    } catch (const Error& e) {
      throw CampaignError(kUsage, e.what());
    } catch (const std::exception&) {
      throw CampaignError(kUsage, "invalid coverage ratio in '" + text + "'");
    }
    if (r.ratio < 0 || r.ratio > 1) throw CampaignError(kUsage, "coverage ratio must lie in [0,1]: " + text);
    return r;
  }
};

struct RunConfig {
  std::string model_path;  // empty: built-in iron
  std::string sut = "inproc:iron";
  std::string scenario = "auto";  // auto, iron or concrete
  TimingConfig timing;
  bool streaming = true;
  bool strict_held = false;
  std::size_t budget = 100000;  // test actions per part
  std::size_t max_states = 10000;
  std::optional<std::uint64_t> seed;
  std::string report_format = "text";
  std::vector<Requirement> required;
  std::vector<std::string> parts;  // node ids for piecemeal runs
  std::size_t jobs = 1;
  bool deterministic = false;
  bool hlr_invariant = false;
  bool trace_cycles = false;
  std::chrono::milliseconds timeout{5000};
};

struct PartOutcome {
  std::string name = "all";
  Valuation pinned;
  TestLog log;
  std::string dot;
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t actions = 0;
  std::vector<std::string> trace;
  bool overrun = false;
  int error_code = kOk;
  std::string error;
};

struct RunOutcome {
  int exit_code = kOk;
  std::string report;
  TestLog log;
  std::string dot;
  std::vector<std::string> trace;
  std::vector<std::string> messages;  // diagnostics for stderr
};

namespace detail {

inline bool iron_compatible(const dsl::ExtractedModel& m, const Reduction& r) {
  return r.projections.size() == 4 && dsl::find_decl(m.rewritten.inputs, "move") &&
         dsl::find_decl(m.rewritten.inputs, "position") && m.rewritten.inputs.size() == 2;
}

struct Prepared {
  RunConfig config;
  SutTarget target;
  std::string file;
  std::shared_ptr<const dsl::ExtractedModel> model;
  Reduction reduction;
  TimeMs period = 0;
  std::string scenario;
  std::size_t settle = 0;
  HeldThreshold threshold = HeldThreshold::Inclusive;
};

template <typename State>
void record(PartOutcome& out, const TraversalResult<State>& r, const std::function<std::string(const State&)>& describe) {
  out.log = r.log;
  out.dot = export_dot<State>(r.automaton, describe);
  out.states = r.automaton.states.size();
  out.transitions = r.automaton.transition_count();
  out.actions = r.actions_applied;
}

inline PartOutcome run_part(const Prepared& p, std::string name, Valuation pinned) {
  PartOutcome out;
  out.name = std::move(name);
  out.pinned = std::move(pinned);
  const RunConfig& cfg = p.config;
  LinkHandle h;
  try {
    h = make_link(p.target, cfg.timing, cfg.streaming, cfg.timeout);
  } catch (const Error& e) {
    out.error_code = kProtocol;
    out.error = std::string("cannot reach SUT ") + p.target.text + ": " + e.what();
    return out;
  }
  if (h.host && cfg.trace_cycles) {
    h.host->kernel().set_cycle_observer(
        [&out, det = cfg.deterministic](const CycleRecord& r) { out.trace.push_back(cycle_record_json(r, det)); });
  }
  Specification spec(*p.model, *h.link, {p.threshold});
  if (cfg.hlr_invariant) {
    try {
      iron::register_shutoff_invariant(spec);
    } catch (const Error& e) {
      out.error_code = kUsage;
      out.error = std::string("--hlr-invariant needs the iron model: ") + e.what();
      return out;
    }
  }
  try {
    spec.connect(p.period);
  } catch (const Error& e) {
    out.error_code = kProtocol;
    out.error = std::string("handshake failed: ") + e.what();
    h.link->shutdown();
    return out;
  }

  TraversalOptions options{{cfg.budget, cfg.max_states}, cfg.seed};
  try {
    if (p.scenario == "iron") {
      auto sc = iron::shipped_scenario(spec, p.reduction.projections, p.settle, out.pinned);
      auto describe = sc.describe;
      record<MembershipVector>(out, traverse(std::move(sc), options), describe);
    } else {
      auto sc = concrete_scenario(spec, p.period, out.pinned);
      auto describe = sc.describe;
      record<ConcreteState>(out, traverse(std::move(sc), options), describe);
    }
  } catch (const TraversalError& e) {
    out.log = e.log();
    out.dot = e.dot();
    out.error_code = kTraversal;
    out.error = e.what();
  }
  try {
    h.link->shutdown();
  } catch (const Error&) {
  }
  if (h.host) out.overrun = h.host->kernel().any_overrun();
  return out;
}

inline Prepared prepare(const RunConfig& config, std::vector<std::string>& messages) {
  if (config.budget == 0) throw CampaignError(kUsage, "budget must be positive");
  if (config.report_format != "text" && config.report_format != "json") {
    throw CampaignError(kUsage, "report format must be text or json");
  }
  Prepared p;
  p.config = config;
  p.target = SutTarget::parse(config.sut);
  if (!config.streaming && p.target.kind != SutTarget::Kind::InProcess) {
    throw CampaignError(kUsage, "--no-streaming controls the in-process kernel only");
  }
  auto loaded = load_model(config.model_path);
  p.file = loaded.file;
  messages.insert(messages.end(), loaded.warnings.begin(), loaded.warnings.end());
  p.model = std::make_shared<const dsl::ExtractedModel>(apply_timing(std::move(loaded.model), config.timing));
  p.period = config.timing.period();
  p.reduction = reduce(*p.model);
  p.threshold = config.strict_held ? HeldThreshold::Strict : HeldThreshold::Inclusive;
  p.settle = iron::settle_cycles(*p.model, p.period, p.threshold);
  if (config.scenario == "auto") {
    p.scenario = iron_compatible(*p.model, p.reduction) ? "iron" : "concrete";
  } else if (config.scenario == "iron") {
    if (!iron_compatible(*p.model, p.reduction)) {
      throw CampaignError(kUsage, "scenario 'iron' needs a model with inputs move and position and 4 test cases");
    }
    p.scenario = "iron";
  } else if (config.scenario == "concrete") {
    p.scenario = "concrete";
  } else {
    throw CampaignError(kUsage, "unknown scenario '" + config.scenario + "' (expected auto, iron or concrete)");
  }
  return p;
}

inline nlohmann::ordered_json valuation_json(const Valuation& v) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, x] : v) j[k] = x;
  return j;
}

constexpr std::size_t kReportedFailures = 20;

}  // namespace detail

// Parse, reduce, traverse every part, then judge verdicts and coverage.
inline RunOutcome cmd_run(const RunConfig& config) {
  auto started = std::chrono::steady_clock::now();
  RunOutcome result;
  detail::Prepared p;
  try {
    p = detail::prepare(config, result.messages);
  } catch (const CampaignError& e) {
    result.exit_code = e.code();
    result.messages.push_back(e.what());
    return result;
  }

  std::vector<std::pair<std::string, Valuation>> parts;
  if (config.parts.empty()) {
    parts.emplace_back("all", Valuation{});
  } else {
    try {
      std::vector<NodeId> roots;
      for (const auto& s : config.parts) roots.push_back(NodeId::parse(s));
      auto plan = make_piecemeal(p.model->rewritten, roots);
      result.messages.insert(result.messages.end(), plan.warnings.begin(), plan.warnings.end());
      for (const auto& part : plan.parts) parts.emplace_back(part.root.str(), part.pinned);
    } catch (const Error& e) {
      result.exit_code = kUsage;
      result.messages.push_back(e.what());
      return result;
    }
  }

  std::vector<PartOutcome> outcomes(parts.size());
  std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, parts.size()));
  if (jobs > 1 && p.target.kind == SutTarget::Kind::Tcp) {
    result.messages.push_back("a TCP SUT serves one connection at a time; running parts sequentially");
    jobs = 1;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < parts.size();) {
      outcomes[i] = detail::run_part(p, parts[i].first, parts[i].second);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < jobs; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Merge in part order so the result does not depend on scheduling.
  CoverageData coverage(p.model->rewritten);
  std::map<VerdictKind, std::size_t> verdicts;
  int error_code = kOk;
  for (const auto& o : outcomes) {
    for (const auto& e : o.log.entries) {
      result.log.entries.push_back(e);
      ++verdicts[e.record.verdict.kind];
      if (e.record.trace) coverage.accumulate(*e.record.trace);
    }
    result.dot += o.dot;
    result.trace.insert(result.trace.end(), o.trace.begin(), o.trace.end());
    if (o.error_code != kOk) {
      result.messages.push_back((parts.size() > 1 ? "part " + o.name + ": " : "") + o.error);
      if (error_code == kOk || o.error_code == kProtocol) error_code = o.error_code;
    }
  }

  std::vector<CoverageReport> reports;
  for (Criterion c : {Criterion::Branch, Criterion::Decision, Criterion::Condition, Criterion::Mcdc}) {
    reports.push_back(coverage.report(c));
  }
  bool coverage_met = true;
  nlohmann::ordered_json requirements = nlohmann::ordered_json::array();
  for (const auto& r : config.required) {
    double got = coverage.report(r.criterion).ratio();
    bool met = got + 1e-12 >= r.ratio;
    coverage_met = coverage_met && met;
    requirements.push_back({{"criterion", to_string(r.criterion)}, {"required", r.ratio}, {"achieved", got}, {"met", met}});
  }

  // Mediator trouble first, then wrong reactions, then aborted traversals,
  // then coverage.
  if (error_code == kProtocol || verdicts[VerdictKind::MediatorFailure] > 0) {
    result.exit_code = kProtocol;
  } else if (error_code == kUsage) {
    result.exit_code = kUsage;
  } else if (result.log.failures() > 0) {
    result.exit_code = kVerdict;
  } else if (error_code == kTraversal) {
    result.exit_code = kTraversal;
  } else if (!coverage_met) {
    result.exit_code = kCoverage;
  }

  nlohmann::ordered_json j;
  j["model"] = p.model->rewritten.name;
  j["model_file"] = p.file;
  j["sut"] = p.target.text;
  j["scenario"] = p.scenario;
  j["cycle_period_ms"] = p.period;
  j["durations_ms"] = nlohmann::ordered_json::object();
  for (const auto& d : p.model->predicates) j["durations_ms"][d.id] = d.duration_ms;
  j["parts"] = nlohmann::ordered_json::array();
  for (const auto& o : outcomes) {
    nlohmann::ordered_json pj;
    pj["part"] = o.name;
    pj["pinned"] = detail::valuation_json(o.pinned);
    pj["states"] = o.states;
    pj["transitions"] = o.transitions;
    pj["test_actions"] = o.actions;
    pj["stimuli"] = o.log.entries.size();
    if (!config.streaming) pj["overrun"] = o.overrun;
    if (o.error_code != kOk) pj["error"] = o.error;
    j["parts"].push_back(pj);
  }
  j["stimuli"] = result.log.entries.size();
  j["verdicts"] = nlohmann::ordered_json::object();
  for (VerdictKind k : {VerdictKind::Pass, VerdictKind::PreconditionViolation, VerdictKind::InvariantViolation,
                        VerdictKind::PostconditionFailure, VerdictKind::MediatorFailure}) {
    j["verdicts"][to_string(k)] = verdicts[k];
  }
  j["coverage"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) j["coverage"].push_back(r.to_json());
  j["requirements"] = requirements;
  j["failures"] = nlohmann::ordered_json::array();
  for (const auto& e : result.log.entries) {
    if (e.record.verdict.pass()) continue;
    if (j["failures"].size() == detail::kReportedFailures) break;
    j["failures"].push_back(TestLog::entry_json(e));
  }
  j["exit_code"] = result.exit_code;
  if (!config.deterministic) {
    j["elapsed_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  }

  if (config.report_format == "json") {
    result.report = j.dump(2) + "\n";
    return result;
  }
  std::ostringstream out;
  out << "model " << p.model->rewritten.name << " (" << p.file << "), scenario " << p.scenario << ", SUT "
      << p.target.text << ", cycle period " << p.period << " ms\n";
  for (const auto& o : outcomes) {
    out << "part " << o.name;
    if (!o.pinned.empty()) out << " pinned " << format_valuation(o.pinned);
    out << ": " << o.states << " states, " << o.transitions << " transitions, " << o.actions << " test actions, "
        << o.log.entries.size() << " stimuli";
    if (!config.streaming) out << (o.overrun ? ", overrun" : ", no overrun");
    if (o.error_code != kOk) out << "\n  error: " << o.error;
    out << "\n";
  }
  out << "verdicts:";
  for (const auto& [k, v] : j["verdicts"].items()) out << " " << k << "=" << v.get<std::size_t>();
  out << "\n" << coverage_table(reports);
  for (const auto& r : j["requirements"]) {
    out << "require " << r["criterion"].get<std::string>() << " >= " << format_ratio(r["required"].get<double>())
        << ": " << (r["met"].get<bool>() ? "met" : "NOT met") << "\n";
  }
  for (const auto& f : j["failures"]) {
    out << "failure at cycle " << f["cycle"].get<std::uint64_t>() << " in " << f["state"].get<std::string>() << " on "
        << f["action"].get<std::string>() << ": " << f["verdict"].get<std::string>() << ", "
        << f["detail"].get<std::string>();
    if (f.contains("mismatches")) out << " " << f["mismatches"].dump();
    out << "\n";
  }
  if (!config.deterministic) out << "elapsed " << j["elapsed_ms"].get<std::int64_t>() << " ms\n";
  out << (result.exit_code == kOk ? "PASS" : "FAIL") << " (exit " << result.exit_code << ")\n";
  result.report = out.str();
  return result;
}

struct AnalysisConfig {
  std::string model_path;
  std::optional<TimingConfig> timing;  // empty: rank-compressed durations
  bool strict_held = false;
  std::string report_format = "text";
};

struct AnalysisOutcome {
  int exit_code = kOk;
  std::string report;
  std::vector<std::string> messages;
};

namespace detail {

struct Analysis {
  LoadedModel loaded;
  dsl::ExtractedModel model;
  TimeMs period = 0;
  HeldThreshold threshold = HeldThreshold::Inclusive;
};

inline Analysis analyse(const AnalysisConfig& config) {
  if (config.report_format != "text" && config.report_format != "json") {
    throw CampaignError(kUsage, "report format must be text or json");
  }
  Analysis a{load_model(config.model_path), {}, 0, config.strict_held ? HeldThreshold::Strict : HeldThreshold::Inclusive};
  TimingConfig timing = config.timing ? *config.timing : rank_compressed(a.loaded.model);
  a.model = apply_timing(a.loaded.model, timing);
  a.period = timing.period();
  return a;
}

inline std::string witness_text(const std::vector<Valuation>& w) {
  std::string s;
  for (const auto& v : w) s += (s.empty() ? "" : " ") + format_valuation(v);
  return s;
}

inline nlohmann::ordered_json flag_state_json(const FlagState& s, const dsl::ExtractedModel& m) {
  nlohmann::ordered_json j;
  j["vector"] = flag_vector_text(s.flags, m.predicates);
  j["flags"] = nlohmann::ordered_json::object();
  for (const auto& p : m.predicates) j["flags"][p.id] = s.flags.at(p.id);
  if (!s.state_vars.empty()) j["state"] = valuation_json(s.state_vars);
  return j;
}

template <typename Fn>
AnalysisOutcome guarded(const AnalysisConfig& config, Fn fn) {
  AnalysisOutcome out;
  try {
    auto a = analyse(config);
    out.messages = a.loaded.warnings;
    out.report = fn(a);
  } catch (const CampaignError& e) {
    out.exit_code = e.code();
    out.messages.push_back(e.what());
  }
  return out;
}

}  // namespace detail

// Upper bound 2^k on flag vectors and the reachable ones with witnesses.
inline AnalysisOutcome cmd_enumerate_states(const AnalysisConfig& config) {
  return detail::guarded(config, [&](const detail::Analysis& a) {
    auto reach = enumerate_reachable_flag_states(a.model, a.period, a.threshold);
    auto vectors = reach.flag_vectors();
    nlohmann::ordered_json j;
    j["model"] = a.model.rewritten.name;
    j["cycle_period_ms"] = a.period;
    j["predicates"] = nlohmann::ordered_json::array();
    for (const auto& p : a.model.predicates) {
      j["predicates"].push_back({{"id", p.id},
                                 {"literal", p.literal.to_string(a.model.original)},
                                 {"declared_ms", p.declared_ms},
                                 {"duration_ms", p.duration_ms}});
    }
    j["upper_bound"] = reach.upper_bound;
    j["reachable"] = vectors.size();
    j["states"] = nlohmann::ordered_json::array();
    // Shortest witness per flag vector.
    std::map<std::string, std::pair<const FlagState*, const std::vector<Valuation>*>> best;
    for (const auto& [s, w] : reach.witnesses) {
      auto key = flag_vector_text(s.flags, a.model.predicates);
      auto it = best.find(key);
      if (it == best.end() || w.size() < it->second.second->size()) best[key] = {&s, &w};
    }
    for (const auto& [key, sw] : best) {
      auto sj = detail::flag_state_json(*sw.first, a.model);
      sj.erase("state");
      sj["witness"] = nlohmann::ordered_json::array();
      for (const auto& v : *sw.second) sj["witness"].push_back(detail::valuation_json(v));
      j["states"].push_back(sj);
    }
    if (config.report_format == "json") return j.dump(2) + "\n";

    std::ostringstream out;
    out << "model " << a.model.rewritten.name << ": " << a.model.predicates.size()
        << " temporal predicates, cycle period " << a.period << " ms\n";
    for (const auto& p : a.model.predicates) {
      out << "  " << p.id << " = " << p.literal.to_string(a.model.original) << " held " << p.duration_ms
          << " ms\n";
    }
    out << "upper bound: " << reach.upper_bound << "\n";
    out << "reachable: " << vectors.size() << "\n";
    for (const auto& [key, sw] : best) out << "  " << key << " after " << detail::witness_text(*sw.second) << "\n";
    return out.str();
  });
}

// Test cases, rewritten conditions, projections and the state partition.
inline AnalysisOutcome cmd_reduce(const AnalysisConfig& config) {
  return detail::guarded(config, [&](const detail::Analysis& a) {
    Reduction r = reduce(a.model);
    auto reach = enumerate_reachable_flag_states(a.model, a.period, a.threshold);
    std::vector<FlagState> states;
    for (const auto& [s, w] : reach.witnesses) states.push_back(s);
    auto cells = membership_partition(a.model, r.projections, states);
    auto enlarged = enlarge_states(cells);

    auto cell_json = [&](const PartitionCell& c) {
      nlohmann::ordered_json cj;
      cj["label"] = c.label;
      cj["members"] = nlohmann::ordered_json::array();
      for (const auto& m : c.members) cj["members"].push_back(detail::flag_state_json(m, a.model));
      if (c.coverable) {
        cj["coverable_cases"] = *c.coverable;
      } else {
        cj["coverable_cases"] = nullptr;
      }
      return cj;
    };
    nlohmann::ordered_json j;
    j["model"] = a.model.rewritten.name;
    j["test_cases"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.cases.size(); ++i) {
      j["test_cases"].push_back({{"id", r.cases[i].id},
                                 {"leaf", r.cases[i].leaf.str()},
                                 {"condition", r.cases[i].str()},
                                 {"rewritten", r.rewritten[i].str()},
                                 {"projection", r.projections[i].str()}});
    }
    j["reachable_states"] = states.size();
    j["partition_sound"] = partition_sound(cells);
    j["partition"] = nlohmann::ordered_json::array();
    for (const auto& c : cells) j["partition"].push_back(cell_json(c));
    j["enlarged"] = nlohmann::ordered_json::array();
    for (const auto& c : enlarged) j["enlarged"].push_back(cell_json(c));
    if (config.report_format == "json") return j.dump(2) + "\n";

    auto cases_text = [](const std::optional<std::set<std::size_t>>& c) {
      if (!c) return std::string("(members disagree)");
      std::string s = "{";
      for (auto id : *c) s += (s.size() > 1 ? "," : "") + std::to_string(id);
      return s + "}";
    };
    std::ostringstream out;
    out << "model " << a.model.rewritten.name << ": " << r.cases.size() << " test cases\n";
    for (std::size_t i = 0; i < r.cases.size(); ++i) {
      out << "case " << r.cases[i].id << " (" << r.cases[i].leaf.str() << ")\n"
          << "  condition   " << r.cases[i].str() << "\n"
          << "  rewritten   " << r.rewritten[i].str() << "\n"
          << "  projection  " << r.projections[i].str() << "\n";
    }
    out << "partition of " << states.size() << " reachable states into " << cells.size() << " cells ("
        << (partition_sound(cells) ? "sound" : "UNSOUND") << ")\n";
    for (const auto& c : cells) {
      out << "  " << c.label << "  cases " << cases_text(c.coverable) << "  " << c.members.size() << " states\n";
    }
    out << "enlarged: " << enlarged.size() << " cells\n";
    for (const auto& c : enlarged) {
      out << "  " << c.label << "  cases " << cases_text(c.coverable) << "\n";
    }
    return out.str();
  });
}

}  // namespace cyclotest::campaign
