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
#include <numeric>
#include <random>
#include <vector>

namespace cyclotest::testing {

// Explicit deterministic automaton: next[state][action].
struct ExplicitAutomaton {
  std::vector<std::vector<int>> next;
  int states() const { return static_cast<int>(next.size()); }
  int actions() const { return static_cast<int>(next[0].size()); }
};

// Strongly connected by construction: a random Hamiltonian cycle is laid
// over random actions, every other transition is uniform.
inline ExplicitAutomaton random_strongly_connected(std::mt19937_64& rng, int min_states = 5,
                                                   int max_states = 50, int min_actions = 2,
                                                   int max_actions = 6) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int n = pick(min_states, max_states);
  int a = pick(min_actions, max_actions);
  ExplicitAutomaton m{std::vector<std::vector<int>>(n, std::vector<int>(a))};
  for (auto& row : m.next) {
    for (auto& t : row) t = pick(0, n - 1);
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (int i = 0; i < n; ++i) m.next[perm[i]][pick(0, a - 1)] = perm[(i + 1) % n];
  return m;
}

// Tarjan-free check: every state reaches every state.
inline bool strongly_connected(const ExplicitAutomaton& m) {
  for (int s = 0; s < m.states(); ++s) {
    std::vector<bool> seen(m.states());
    std::vector<int> stack{s};
    seen[s] = true;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : m.next[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++count;
          stack.push_back(v);
        }
      }
    }
    if (count != m.states()) return false;
  }
  return true;
}

}  // namespace cyclotest::testing
