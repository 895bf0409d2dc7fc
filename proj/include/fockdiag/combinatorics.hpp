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

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fockdiag/error.hpp"
#include "fockdiag/input_state.hpp"

namespace fockdiag {

__extension__ using wide_int = __int128;

/// Largest N+M for which coefficients are evaluated in exact integer
/// arithmetic. Products of the overnormalization factors stay below 4^24.
inline constexpr int kMaxTotalParticles = 24;

/// Binomial coefficient with the guards the redistribution sums need:
/// zero for k < 0, k > n or n < 0.
constexpr std::int64_t binomial(int n, int k) noexcept {
  if (n < 0 || k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::int64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    // exact: result * (n - k + i) is divisible by i at every step
    result = result * (n - k + i) / i;
  }
  return result;
}

/// Overnormalization factor for redistributing n bosons in one output mode:
/// binom(n,p) * binom(p,(j+p-q)/2) * binom(n-p,(j-p+q)/2). Zero when any
/// lower index is negative, out of range, or half-integral.
constexpr std::int64_t coeff_m_factor(int n, int p, int q, int j) noexcept {
  const int up = j + p - q;
  const int down = j - p + q;
  if (up % 2 != 0 || down % 2 != 0) return 0;
  return binomial(n, p) * binomial(p, up / 2) * binomial(n - p, down / 2);
}

/// Signed integer coefficient C_J of the scalar-product polynomial for
/// outcome (s1, N+M-s1). r (r*) counts the first-mode particles found in the
/// first output port on the ket (bra) side; j counts exchanges landing in
/// output port 1, the remaining 2J-j land in port 2.
inline std::int64_t coeff_c(const InputState& state, int s1, int exchange) {
  const int n = state.n();
  const int m = state.m();
  const int total = state.total();
  if (total > kMaxTotalParticles) {
    throw DomainError("N+M=" + std::to_string(total) + " exceeds the exact-arithmetic bound " +
                      std::to_string(kMaxTotalParticles));
  }
  if (s1 < 0 || s1 > total) {
    throw DomainError("outcome s1=" + std::to_string(s1) + " outside 0.." + std::to_string(total));
  }
  if (exchange < 0 || exchange > m) {
    throw DomainError("exchange count J=" + std::to_string(exchange) + " outside 0.." +
                      std::to_string(m));
  }
  const int s2 = total - s1;
  const int r_lo = std::max(0, s1 - m);
  const int r_hi = r_lo + std::min(m, s2);
  const int j_lo = std::max(0, 2 * exchange - s2);
  const int j_hi = std::min(s1, 2 * exchange);

  wide_int sum = 0;
  for (int r = r_lo; r <= r_hi; ++r) {
    for (int rs = r_lo; rs <= r_hi; ++rs) {
      const int sign = ((r + rs) % 2 == 0) ? 1 : -1;
      for (int j = j_lo; j <= j_hi; ++j) {
        if (((j - (r - rs)) % 2 + 2) % 2 != 0) continue;
        const std::int64_t first = coeff_m_factor(s1, r, rs, j);
        if (first == 0) continue;
        const std::int64_t second = coeff_m_factor(s2, n - r, n - rs, 2 * exchange - j);
        sum += static_cast<wide_int>(sign) * first * second;
      }
    }
  }
  if (sum > std::numeric_limits<std::int64_t>::max() ||
      sum < std::numeric_limits<std::int64_t>::min()) {
    throw ContractError("coefficient C_J overflowed 64 bits");
  }
  return static_cast<std::int64_t>(sum);
}

/// C_0 .. C_M for one outcome.
struct CoefficientTable {
  InputState state;
  int s1;
  std::vector<std::int64_t> values;
};

inline CoefficientTable coefficient_table(const InputState& state, int s1) {
  CoefficientTable table{state, s1, {}};
  table.values.reserve(static_cast<std::size_t>(state.m()) + 1);
  for (int j = 0; j <= state.m(); ++j) table.values.push_back(coeff_c(state, s1, j));
  return table;
}

/// M! N! / (s1! s2! 2^(N+M)).
inline double outcome_prefactor(const InputState& state, int s1) {
  auto factorial = [](int k) {
    long double f = 1.0L;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  const int s2 = state.total() - s1;
  long double value = factorial(state.m()) * factorial(state.n()) /
                      (factorial(s1) * factorial(s2));
  for (int i = 0; i < state.total(); ++i) value /= 2.0L;
  return static_cast<double>(value);
}

}  // namespace fockdiag
