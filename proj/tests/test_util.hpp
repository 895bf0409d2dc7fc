// Copyright 2026 The fockdiag Authors
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

#include <random>
#include <vector>

#include "fockdiag/fockdiag.hpp"

namespace fockdiag::fixtures {

/// Every state with N+M <= max_total.
inline std::vector<InputState> states_up_to(int max_total) {
  std::vector<InputState> states;
  for (int total = 1; total <= max_total; ++total) {
    for (int m = 0; 2 * m < total; ++m) states.push_back(InputState::double_fock(total - m, m));
    if (total % 2 == 0) states.push_back(InputState::twin_fock(total / 2));
  }
  return states;
}

/// Entries the state needs, each drawn uniformly from [0,1].
inline AsppTable random_table(const InputState& state, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AsppTable table;
  for (const auto& key : required_aspps(state)) {
    if (key.m == 0 && key.k == 0) continue;
    table.set(key.m, key.k, u(rng));
  }
  return table;
}

inline DecoherenceParams random_params(std::mt19937_64& rng, double lo = 0.0) {
  std::uniform_real_distribution<double> u(lo, 1.0);
  return {u(rng), u(rng), u(rng)};
}

/// Curve from the unchecked polynomial: arbitrary tables may leave [0,1].
inline SignalCurve polynomial_curve(const InputState& state, const std::vector<double>& etas,
                                    const AsppTable& table) {
  SignalCurve curve{state, {}};
  for (double eta : etas) {
    OutcomeDistribution row{eta, {}};
    for (int s1 = 0; s1 <= state.total(); ++s1) {
      row.probs.push_back(event_polynomial(state, s1, eta, table));
    }
    curve.rows.push_back(row);
  }
  return curve;
}

}  // namespace fockdiag::fixtures
