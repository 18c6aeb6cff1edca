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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclotest/common.hpp"
#include "cyclotest/dsl/ast.hpp"

namespace cyclotest::mediator {

using json = nlohmann::ordered_json;

class MediatorError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public MediatorError {
 public:
  using MediatorError::MediatorError;
};

class TimeoutError : public MediatorError {
 public:
  using MediatorError::MediatorError;
};

class DisconnectError : public MediatorError {
 public:
  using MediatorError::MediatorError;
};

// Declared interface of a CSUT as exchanged in the handshake. `state` lists
// the readable state variables only.
struct Signature {
  std::string model;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> state;
  TimeMs cycle_period_ms = 1000;

  friend bool operator==(const Signature&, const Signature&) = default;
};

inline Signature signature_of(const dsl::ModelAst& ast, TimeMs cycle_period_ms) {
  Signature s{ast.name, {}, {}, {}, cycle_period_ms};
  for (const auto& d : ast.inputs) s.inputs.push_back(d.name);
  for (const auto& d : ast.outputs) s.outputs.push_back(d.name);
  for (const auto& d : ast.state_vars) {
    if (d.visibility == dsl::Visibility::Readable) s.state.push_back(d.name);
  }
  return s;
}

struct CycleObservation {
  std::uint64_t cycle = 0;
  TimeMs sys_time_ms = 0;
  Valuation outputs;
  Valuation state;

  friend bool operator==(const CycleObservation&, const CycleObservation&) = default;
};

inline std::string encode_hello(const Signature& s) {
  json j;
  j["type"] = "hello";
  j["model"] = s.model;
  j["inputs"] = s.inputs;
  j["outputs"] = s.outputs;
  j["state"] = s.state;
  j["cycle_period_ms"] = s.cycle_period_ms;
  return j.dump();
}

inline std::string encode_set_inputs(std::uint64_t cycle, const Valuation& values) {
  json j;
  j["type"] = "set_inputs";
  j["cycle"] = cycle;
  j["values"] = json::object();
  for (const auto& [k, v] : values) j["values"][k] = v;
  return j.dump();
}

inline std::string encode_observation(const CycleObservation& o) {
  json j;
  j["type"] = "observation";
  j["cycle"] = o.cycle;
  j["sys_time_ms"] = o.sys_time_ms;
  j["outputs"] = json::object();
  for (const auto& [k, v] : o.outputs) j["outputs"][k] = v;
  j["state"] = json::object();
  for (const auto& [k, v] : o.state) j["state"][k] = v;
  return j.dump();
}

inline std::string encode_shutdown() { return R"({"type":"shutdown"})"; }

inline std::string encode_error(const std::string& message) {
  json j;
  j["type"] = "error";
  j["message"] = message;
  return j.dump();
}

// A decoded line. Field access throws ProtocolError on missing or mistyped
// fields.
class Message {
 public:
  static Message parse(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError("malformed message: " + line);
    if (!j.contains("type") || !j["type"].is_string()) throw ProtocolError("message without type: " + line);
    return Message(std::move(j));
  }

  const std::string& type() const { return j_["type"].get_ref<const std::string&>(); }
  const json& raw() const { return j_; }

  void expect(const std::string& type) const {
    if (this->type() == "error") throw ProtocolError("peer error: " + get<std::string>("message"));
    if (this->type() != type) {
      throw ProtocolError("expected " + type + " message, got " + this->type());
    }
  }

  template <typename T>
  T get(const char* field) const {
    if (!j_.contains(field)) throw ProtocolError(type() + " message lacks '" + field + "'");
    try {
      return j_[field].get<T>();
    } catch (const json::exception&) {
      throw ProtocolError(type() + " message has a mistyped '" + field + "'");
    }
  }

  Valuation valuation(const char* field) const {
    const json& obj = j_.contains(field) ? j_[field] : json();
    if (!obj.is_object()) throw ProtocolError(type() + " message lacks object '" + field + "'");
    Valuation out;
    for (const auto& [k, v] : obj.items()) {
      if (v.is_boolean()) {
        out[k] = v.get<bool>() ? 1 : 0;
      } else if (v.is_number_integer()) {
        out[k] = v.get<Value>();
      } else {
        throw ProtocolError("non-integer value for '" + k + "'");
      }
    }
    return out;
  }

  Signature signature() const {
    expect("hello");
    return Signature{get<std::string>("model"), get<std::vector<std::string>>("inputs"),
                     get<std::vector<std::string>>("outputs"),
                     get<std::vector<std::string>>("state"), get<TimeMs>("cycle_period_ms")};
  }

  CycleObservation observation() const {
    expect("observation");
    return CycleObservation{get<std::uint64_t>("cycle"), get<TimeMs>("sys_time_ms"),
                            valuation("outputs"), valuation("state")};
  }

 private:
  explicit Message(json j) : j_(std::move(j)) {}
  json j_;
};

inline std::string describe_mismatch(const Signature& ours, const Signature& theirs) {
  auto list = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return "[" + s + "]";
  };
  if (ours.model != theirs.model) return "model " + ours.model + " vs " + theirs.model;
  if (ours.inputs != theirs.inputs) return "inputs " + list(ours.inputs) + " vs " + list(theirs.inputs);
  if (ours.outputs != theirs.outputs) return "outputs " + list(ours.outputs) + " vs " + list(theirs.outputs);
  if (ours.state != theirs.state) return "state " + list(ours.state) + " vs " + list(theirs.state);
  return "cycle period " + std::to_string(ours.cycle_period_ms) + " vs " +
         std::to_string(theirs.cycle_period_ms);
}

}  // namespace cyclotest::mediator
