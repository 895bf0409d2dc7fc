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

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "fockdiag/error.hpp"
#include "fockdiag/input_state.hpp"

namespace fockdiag {

/// Key (m, k) of the ensemble-averaged scalar-product power
/// { |<phi|phi~>|^(2m) <phi|phi~>^k }. The N00N power {<phi|phi~>^N} is (0, N).
struct AsppKey {
  int m = 0;
  int k = 0;
  friend auto operator<=>(const AsppKey&, const AsppKey&) = default;
};

/// Table of ASPP values. Entry (0,0) is pinned to 1.
class AsppTable {
 public:
  AsppTable() { entries_[{0, 0}] = 1.0; }

  AsppTable& set(int m, int k, double value) {
    if (m < 0 || k < 0) {
      throw DomainError("ASPP indices must be non-negative, got (" + std::to_string(m) + "," +
                        std::to_string(k) + ")");
    }
    if (!std::isfinite(value) || value < -1.0 || value > 1.0) {
      throw DomainError("ASPP value for (" + std::to_string(m) + "," + std::to_string(k) +
                        ") must lie in [-1,1], got " + std::to_string(value));
    }
    if (m == 0 && k == 0 && value != 1.0) throw DomainError("ASPP (0,0) is always 1");
    entries_[{m, k}] = value;
    return *this;
  }

  double at(int m, int k) const {
    auto it = entries_.find({m, k});
    if (it == entries_.end()) throw MissingAsppError(m, k);
    return it->second;
  }

  bool contains(int m, int k) const { return entries_.count({m, k}) != 0; }
  const std::map<AsppKey, double>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<AsppKey, double> entries_;
};

/// Keys the event probabilities of `state` depend on: (J,0) for J = 0..M and,
/// for double-Fock superpositions, (M-J, N-M) for J = 0..M.
inline std::vector<AsppKey> required_aspps(const InputState& state) {
  std::vector<AsppKey> keys;
  for (int j = 0; j <= state.m(); ++j) keys.push_back({j, 0});
  if (!state.is_twin()) {
    for (int j = 0; j <= state.m(); ++j) keys.push_back({state.m() - j, state.harmonic()});
  }
  return keys;
}

/// Keys that are free unknowns for inference (everything required except (0,0)).
inline std::vector<AsppKey> unknown_aspps(const InputState& state) {
  std::vector<AsppKey> keys;
  for (const auto& key : required_aspps(state)) {
    if (key.m != 0 || key.k != 0) keys.push_back(key);
  }
  return keys;
}

}  // namespace fockdiag
