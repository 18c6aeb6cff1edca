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

#include <string_view>

#include "cyclotest/common.hpp"

namespace cyclotest::iron {

// Same text as models/iron.ctl.
inline constexpr std::string_view kModelSource = R"ctl(// Iron automatic shut-off control subsystem.
//
// heating = 0 stops the sole from being heated. The iron switches heating off
// when it has stood upright without moving for 15 minutes, or lain flat
// without moving for one minute.
model iron {
  input move : bool;      // 1 if the motion sensor fired this cycle
  input position : bool;  // 1 if the iron stands upright
  output heating : bool;

  logic {
    if (position) {
      if (held(!move && position, 900s)) {
        heating = 0;
      } else {
        heating = 1;
      }
    } else {
      if (held(!move && !position, 60s)) {
        heating = 0;
      } else {
        heating = 1;
      }
    }
  }
}
)ctl";

inline constexpr TimeMs kShortHoldMs = 60'000;
inline constexpr TimeMs kLongHoldMs = 900'000;

}  // namespace cyclotest::iron
