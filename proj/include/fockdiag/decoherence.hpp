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
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "fockdiag/aspp_table.hpp"
#include "fockdiag/error.hpp"
#include "fockdiag/input_state.hpp"

namespace fockdiag {

/// Survival probabilities of the three-mechanism decoherence model.
struct DecoherenceParams {
  double gamma_dist = 1.0;
  double gamma_phase = 1.0;
  double gamma_mix = 1.0;

  void validate() const {
    auto check = [](double g, const char* name) {
      if (!(g >= 0.0 && g <= 1.0)) {
        throw DomainError(std::string(name) + " must lie in [0,1], got " + std::to_string(g));
      }
    };
    check(gamma_dist, "gamma_dist");
    check(gamma_phase, "gamma_phase");
    check(gamma_mix, "gamma_mix");
  }

  friend bool operator==(const DecoherenceParams&, const DecoherenceParams&) = default;
};

/// ASPP (m, k) under the model, in the limit of an infinite-dimensional
/// internal space: gamma_phase^[k>0] * gamma_mix^2 * gamma_dist^(2m+k),
/// and exactly 1 for (0, 0).
inline double aspp_from_params(const DecoherenceParams& params, int m, int k) {
  if (m < 0 || k < 0) {
    throw DomainError("ASPP indices must be non-negative, got (" + std::to_string(m) + "," +
                      std::to_string(k) + ")");
  }
  params.validate();
  if (m == 0 && k == 0) return 1.0;
  double value = params.gamma_mix * params.gamma_mix * std::pow(params.gamma_dist, 2 * m + k);
  if (k >= 1) value *= params.gamma_phase;
  return value;
}

/// Table holding every ASPP `state` depends on.
inline AsppTable aspp_table_from_params(const DecoherenceParams& params, const InputState& state) {
  AsppTable table;
  for (const auto& key : required_aspps(state)) {
    table.set(key.m, key.k, aspp_from_params(params, key.m, key.k));
  }
  return table;
}

/// Table holding (m, k) for 0 <= m <= max_m, 0 <= k <= max_k.
inline AsppTable aspp_table_from_params(const DecoherenceParams& params, int max_m, int max_k) {
  AsppTable table;
  for (int m = 0; m <= max_m; ++m) {
    for (int k = 0; k <= max_k; ++k) table.set(m, k, aspp_from_params(params, m, k));
  }
  return table;
}

using StateVector = std::vector<std::complex<double>>;

/// Discrete mixture {(p_j, |psi_j>)} of internal states of one arm.
class InternalEnsemble {
 public:
  struct Branch {
    double weight;
    StateVector state;
  };

  InternalEnsemble(int dimension, std::vector<Branch> branches)
      : dimension_(dimension), branches_(std::move(branches)) {
    validate();
  }

  static InternalEnsemble pure(StateVector state) {
    const int dim = static_cast<int>(state.size());
    return InternalEnsemble(dim, {{1.0, std::move(state)}});
  }

  int dimension() const noexcept { return dimension_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }

  /// Same ensemble with every vector zero-padded to `dimension`.
  InternalEnsemble embedded(int dimension) const {
    if (dimension < dimension_) throw DomainError("cannot embed into a smaller space");
    auto branches = branches_;
    for (auto& b : branches) b.state.resize(static_cast<std::size_t>(dimension));
    return InternalEnsemble(dimension, std::move(branches));
  }

 private:
  void validate() const {
    if (dimension_ < 1) throw DomainError("internal dimension must be >= 1");
    if (branches_.empty()) throw DomainError("ensemble needs at least one branch");
    double total = 0.0;
    for (const auto& b : branches_) {
      if (!(b.weight >= 0.0)) throw DomainError("ensemble weights must be non-negative");
      if (static_cast<int>(b.state.size()) != dimension_) {
        throw DomainError("ensemble vector has dimension " + std::to_string(b.state.size()) +
                          ", expected " + std::to_string(dimension_));
      }
      double norm = 0.0;
      for (const auto& c : b.state) norm += std::norm(c);
      if (std::abs(norm - 1.0) > 1e-12) {
        throw DomainError("ensemble vector is not normalized (|psi|^2=" + std::to_string(norm) + ")");
      }
      total += b.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw DomainError("ensemble weights sum to " + std::to_string(total) + ", expected 1");
    }
  }

  int dimension_;
  std::vector<Branch> branches_;
};

/// <a|b>, antilinear in the first argument.
inline std::complex<double> inner(const StateVector& a, const StateVector& b) {
  std::complex<double> sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum;
}

inline std::complex<double> aspp_from_ensembles_complex(const InternalEnsemble& upper,
                                                        const InternalEnsemble& lower, int m,
                                                        int k) {
  if (m < 0 || k < 0) throw DomainError("ASPP indices must be non-negative");
  if (upper.dimension() != lower.dimension()) {
    throw DomainError("ensemble dimensions differ: " + std::to_string(upper.dimension()) + " vs " +
                      std::to_string(lower.dimension()));
  }
  std::complex<double> sum = 0.0;
  for (const auto& u : upper.branches()) {
    for (const auto& l : lower.branches()) {
      const auto overlap = inner(u.state, l.state);
      // |o|^0 o^0 = 1 even for orthogonal states
      std::complex<double> power = 1.0;
      for (int i = 0; i < m; ++i) power *= std::norm(overlap);
      for (int i = 0; i < k; ++i) power *= overlap;
      sum += u.weight * l.weight * power;
    }
  }
  return sum;
}

/// Ensemble-averaged scalar-product power; the result must be real.
inline double aspp_from_ensembles(const InternalEnsemble& upper, const InternalEnsemble& lower,
                                  int m, int k) {
  const auto value = aspp_from_ensembles_complex(upper, lower, m, k);
  if (std::abs(value.imag()) >= 1e-10) {
    throw ContractError("ASPP (" + std::to_string(m) + "," + std::to_string(k) +
                        ") has imaginary part " + std::to_string(value.imag()) +
                        "; only real overlaps are supported");
  }
  return value.real();
}

/// Violation of { |o|^e1 }^(e2/e1) <= { |o|^e2 } <= { |o|^e1 } for e2 > e1.
/// Exponents are the absolute powers, so table entry (m, 0) has exponent 2m.
struct JensenViolation {
  enum class Bound { Lower, Upper };
  int m;  // smaller exponent
  int k;  // larger exponent
  Bound bound;
  double margin;  // amount by which the bound is exceeded (> 0)
};

inline std::vector<JensenViolation> jensen_bounds_check(const AsppTable& table,
                                                        double tolerance = 1e-10) {
  std::vector<std::pair<int, double>> powers;  // (exponent, value)
  for (const auto& [key, value] : table.entries()) {
    if (key.k == 0 && key.m >= 1) powers.emplace_back(2 * key.m, value);
  }
  std::vector<JensenViolation> out;
  for (const auto& [e1, v1] : powers) {
    for (const auto& [e2, v2] : powers) {
      if (e2 <= e1) continue;
      const double lower = std::pow(std::max(v1, 0.0), static_cast<double>(e2) / e1);
      if (lower - v2 > tolerance) {
        out.push_back({e1, e2, JensenViolation::Bound::Lower, lower - v2});
      }
      if (v2 - v1 > tolerance) out.push_back({e1, e2, JensenViolation::Bound::Upper, v2 - v1});
    }
  }
  return out;
}

/// Classical distribution of the random phase acquired by lower-arm particles.
struct PhaseMixture {
  struct Point {
    double weight;
    double phase;
  };
  std::vector<Point> points{{1.0, 0.0}};
};

/// Arm ensembles plus phase mixture: the complete classical randomness.
struct DecoheredSystem {
  InternalEnsemble upper;
  InternalEnsemble lower;
  PhaseMixture phases;
};

/// Number of phase samples exact for signals of `total` particles: the signal
/// is a trigonometric polynomial of degree <= total in the random phase.
inline int dephasing_grid_size(int total) { return 2 * total + 1; }

/// White-noise mixing: per arm, weight gamma keeps the state, weight 1-gamma
/// replaces it by a fresh vector orthogonal to everything else.
inline DecoheredSystem apply_mixing(const DecoheredSystem& sys, double gamma_mix) {
  if (gamma_mix >= 1.0) return sys;
  const int dim = sys.upper.dimension();
  const int new_dim = dim + 2;
  auto mix = [&](const InternalEnsemble& ens, int fresh_index) {
    std::vector<InternalEnsemble::Branch> branches;
    if (gamma_mix > 0.0) {
      const auto grown = ens.embedded(new_dim);
      for (auto b : grown.branches()) {
        b.weight *= gamma_mix;
        branches.push_back(std::move(b));
      }
    }
    StateVector fresh(static_cast<std::size_t>(new_dim));
    fresh[static_cast<std::size_t>(fresh_index)] = 1.0;
    branches.push_back({1.0 - gamma_mix, std::move(fresh)});
    return InternalEnsemble(new_dim, std::move(branches));
  };
  return {mix(sys.upper, dim), mix(sys.lower, dim + 1), sys.phases};
}

/// Which-path meter: upper-arm states gain |0>, lower-arm states gain |beta>,
/// with <0|beta> = gamma_dist.
inline DecoheredSystem apply_distinguishability(const DecoheredSystem& sys, double gamma_dist) {
  if (gamma_dist >= 1.0) return sys;
  const int dim = sys.upper.dimension();
  const double leak = std::sqrt(1.0 - gamma_dist * gamma_dist);
  auto couple = [&](const InternalEnsemble& ens, double keep, double flip) {
    std::vector<InternalEnsemble::Branch> branches;
    for (const auto& b : ens.branches()) {
      StateVector v(static_cast<std::size_t>(2 * dim));
      for (int i = 0; i < dim; ++i) {
        v[static_cast<std::size_t>(i)] = keep * b.state[static_cast<std::size_t>(i)];
        v[static_cast<std::size_t>(dim + i)] = flip * b.state[static_cast<std::size_t>(i)];
      }
      branches.push_back({b.weight, std::move(v)});
    }
    return InternalEnsemble(2 * dim, std::move(branches));
  };
  return {couple(sys.upper, 1.0, 0.0), couple(sys.lower, gamma_dist, leak), sys.phases};
}

/// With probability 1-gamma_phase the lower arm picks up a uniformly random
/// phase, represented by a `grid`-point uniform average.
inline DecoheredSystem apply_dephasing(const DecoheredSystem& sys, double gamma_phase, int grid) {
  if (gamma_phase >= 1.0) return sys;
  if (grid < 1) throw DomainError("dephasing grid must have at least one point");
  PhaseMixture out{{}};
  for (const auto& p : sys.phases.points) {
    if (gamma_phase > 0.0) out.points.push_back({p.weight * gamma_phase, p.phase});
    for (int i = 0; i < grid; ++i) {
      out.points.push_back({p.weight * (1.0 - gamma_phase) / grid,
                            p.phase + 2.0 * std::numbers::pi * i / grid});
    }
  }
  return {sys.upper, sys.lower, std::move(out)};
}

/// Mixing and dephasing applied to pure arm states that already carry the
/// distinguishing overlap. Dimension grows by two (one fresh noise vector per
/// arm) when gamma_mix < 1.
inline DecoheredSystem decohere_ensembles(const InternalEnsemble& pure_upper,
                                          const InternalEnsemble& pure_lower,
                                          const DecoherenceParams& params, int total_particles) {
  params.validate();
  if (pure_upper.branches().size() != 1 || pure_lower.branches().size() != 1) {
    throw DomainError("decohere_ensembles expects pure (single-branch) inputs");
  }
  if (pure_upper.dimension() != pure_lower.dimension()) {
    throw DomainError("arm ensembles must share the internal dimension");
  }
  DecoheredSystem sys{pure_upper, pure_lower, {}};
  sys = apply_mixing(sys, params.gamma_mix);
  return apply_dephasing(sys, params.gamma_phase, dephasing_grid_size(total_particles));
}

/// ASPP seen by the interferometer: ensemble average including the random
/// lower-arm phase, <phi|phi~> -> e^{i theta} <phi|phi~>.
inline double effective_aspp(const DecoheredSystem& sys, int m, int k) {
  const auto base = aspp_from_ensembles_complex(sys.upper, sys.lower, m, k);
  std::complex<double> phase_avg = 0.0;
  for (const auto& p : sys.phases.points) {
    phase_avg += p.weight * std::polar(1.0, k * p.phase);
  }
  const auto value = base * phase_avg;
  if (std::abs(value.imag()) >= 1e-10) {
    throw ContractError("effective ASPP (" + std::to_string(m) + "," + std::to_string(k) +
                        ") is not real");
  }
  return value.real();
}

}  // namespace fockdiag
