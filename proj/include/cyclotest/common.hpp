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
#include <map>
#include <stdexcept>
#include <string>

namespace cyclotest {

// Every model value is an integer; booleans are 0/1.
using Value = std::int64_t;
using TimeMs = std::int64_t;
using Valuation = std::map<std::string, Value>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An input, state variable or time flag needed for evaluation was not supplied.
class MissingBinding : public Error {
 public:
  explicit MissingBinding(const std::string& name)
      : Error("missing binding for '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

inline std::string format_valuation(const Valuation& values) {
  std::string out = "{";
  bool first = true;
  for (const auto& [name, value] : values) {
    if (!first) out += ",";
    first = false;
    out += name + "=" + std::to_string(value);
  }
  return out + "}";
}

}  // namespace cyclotest
