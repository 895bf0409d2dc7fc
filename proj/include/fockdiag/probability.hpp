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
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fockdiag/aspp_table.hpp"
#include "fockdiag/combinatorics.hpp"
#include "fockdiag/error.hpp"
#include "fockdiag/input_state.hpp"

namespace fockdiag {

inline constexpr double kClampTolerance = 1e-12;
inline constexpr double kNegativeProbabilityError = 1e-9;

struct OutcomeDistribution {
  double eta = 0.0;
  std::vector<double> probs;  // indexed by s1 = 0 .. N+M
};

/// Outcome distributions of one state over a grid of phases.
struct SignalCurve {
  InputState state;
  std::vector<OutcomeDistribution> rows;

  std::vector<double> etas() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row.eta);
    return out;
  }

  std::vector<double> channel(int s1) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row.probs.at(static_cast<std::size_t>(s1)));
    return out;
  }
};

/// `count` equally spaced phases in [start, start + span).
inline std::vector<double> phase_grid(int count, double start = 0.0,
                                      double span = 2.0 * std::numbers::pi) {
  if (count < 1) throw DomainError("phase grid needs at least one point");
  std::vector<double> etas(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) etas[static_cast<std::size_t>(i)] = start + span * i / count;
  return etas;
}

/// Re[(i e^{i eta})^d] = cos(d (eta + pi/2)), evaluated by quadrant so that
/// the usual test phases give exact zeros and ones.
inline double phase_factor(int harmonic, double eta) {
  const double arg = harmonic * eta;
  switch (harmonic % 4) {
    case 0: return std::cos(arg);
    case 1: return -std::sin(arg);
    case 2: return -std::cos(arg);
    default: return std::sin(arg);
  }
}

/// Unchecked value of the scalar-product polynomial for outcome s1. Equals the
/// event probability whenever the ASPPs come from a physical ensemble; for
/// arbitrary tables it may leave [0,1] but still sums to one over s1.
inline double event_polynomial(const InputState& state, int s1, double eta,
                               const AsppTable& aspps) {
  if (s1 < 0 || s1 > state.total()) {
    throw DomainError("outcome s1=" + std::to_string(s1) + " outside 0.." +
                      std::to_string(state.total()));
  }
  const int m = state.m();
  const int d = state.harmonic();
  const double phase = state.is_twin() ? 0.0 : ((s1 % 2 == 0) ? 1.0 : -1.0) * phase_factor(d, eta);
  double sum = 0.0;
  for (int j = 0; j <= m; ++j) {
    const auto c = static_cast<double>(coeff_c(state, s1, j));
    double term = aspps.at(j, 0);
    if (!state.is_twin()) term += phase * aspps.at(m - j, d);
    sum += c * term;
  }
  return outcome_prefactor(state, s1) * sum;
}

/// Probability of (s1, N+M-s1). Values within 1e-12 below zero are clamped;
/// anything below -1e-9 signals a non-physical table and throws.
inline double event_probability(const InputState& state, int s1, double eta,
                                const AsppTable& aspps) {
  const double p = event_polynomial(state, s1, eta, aspps);
  if (p < -kNegativeProbabilityError) {
    throw ContractError("negative probability " + std::to_string(p) + " for outcome s1=" +
                        std::to_string(s1) + " of |" + state.label() + ">");
  }
  return p < 0.0 && p >= -kClampTolerance ? 0.0 : p;
}

inline OutcomeDistribution outcome_distribution(const InputState& state, double eta,
                                                const AsppTable& aspps) {
  OutcomeDistribution dist{eta, {}};
  dist.probs.reserve(static_cast<std::size_t>(state.total()) + 1);
  for (int s1 = 0; s1 <= state.total(); ++s1) {
    dist.probs.push_back(event_probability(state, s1, eta, aspps));
  }
  return dist;
}

inline SignalCurve signal_curve(const InputState& state, std::span<const double> etas,
                                const AsppTable& aspps) {
  SignalCurve curve{state, {}};
  curve.rows.reserve(etas.size());
  for (double eta : etas) curve.rows.push_back(outcome_distribution(state, eta, aspps));
  return curve;
}

/// binom(total, s1) / 2^total: the distinguishable-particle distribution.
inline double classical_distribution(int total, int s1) {
  if (total < 0 || s1 < 0 || s1 > total) {
    throw DomainError("classical distribution needs 0 <= s1 <= total, got s1=" +
                      std::to_string(s1) + ", total=" + std::to_string(total));
  }
  return std::ldexp(static_cast<double>(binomial(total, s1)), -total);
}

}  // namespace fockdiag
