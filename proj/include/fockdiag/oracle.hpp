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
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fockdiag/decoherence.hpp"
#include "fockdiag/error.hpp"
#include "fockdiag/input_state.hpp"
#include "fockdiag/probability.hpp"

namespace fockdiag {

inline constexpr int kOracleMaxTotal = 12;

/// Fock-space vector over labeled modes (output port, internal basis index).
/// A configuration lists occupation numbers of the 2*D modes, port-major:
/// index port * D + d.
class LabeledFockVector {
 public:
  using Config = std::vector<std::uint8_t>;

  explicit LabeledFockVector(int internal_dim) : dim_(internal_dim) {}

  int internal_dim() const noexcept { return dim_; }
  const std::map<Config, std::complex<double>>& amplitudes() const noexcept { return amps_; }
  std::map<Config, std::complex<double>>& amplitudes() noexcept { return amps_; }

  /// Particles found in output port 1.
  int port1_count(const Config& config) const {
    int s = 0;
    for (int d = 0; d < dim_; ++d) s += config[static_cast<std::size_t>(d)];
    return s;
  }

  double squared_norm() const {
    double sum = 0.0;
    for (const auto& [config, amp] : amps_) sum += std::norm(amp);
    return sum;
  }

 private:
  int dim_;
  std::map<Config, std::complex<double>> amps_;
};

/// Output state of |n_upper>_{1,phi} |n_lower>_{2,phi~} after the balanced
/// beam splitter a1^+ -> (i b1^+ + b2^+)/sqrt2, a2^+ -> (i b2^+ + b1^+)/sqrt2.
/// The product of creation operators is expanded as a polynomial in the
/// commuting output operators; a monomial with occupations n carries the
/// Fock amplitude coefficient * sqrt(prod n!).
inline LabeledFockVector propagate_fock(int n_upper, int n_lower, const StateVector& phi,
                                        const StateVector& phi_tilde) {
  const int dim = static_cast<int>(phi.size());
  if (static_cast<int>(phi_tilde.size()) != dim) throw DomainError("internal dimension mismatch");
  const double r = 1.0 / std::sqrt(2.0);
  const std::complex<double> i_unit(0.0, 1.0);

  using Form = std::vector<std::pair<int, std::complex<double>>>;
  auto make_form = [&](const StateVector& v, int input_port) {
    Form form;
    for (int d = 0; d < dim; ++d) {
      const auto c = v[static_cast<std::size_t>(d)];
      if (c == 0.0) continue;
      const int same = input_port * dim + d;
      const int other = (1 - input_port) * dim + d;
      form.emplace_back(same, i_unit * c * r);
      form.emplace_back(other, c * r);
    }
    return form;
  };
  const Form upper_form = make_form(phi, 0);
  const Form lower_form = make_form(phi_tilde, 1);

  std::map<LabeledFockVector::Config, std::complex<double>> poly;
  poly[LabeledFockVector::Config(static_cast<std::size_t>(2 * dim), 0)] = 1.0;
  auto multiply = [&](const Form& form) {
    std::map<LabeledFockVector::Config, std::complex<double>> next;
    for (const auto& [config, coeff] : poly) {
      for (const auto& [var, a] : form) {
        auto key = config;
        ++key[static_cast<std::size_t>(var)];
        next[key] += coeff * a;
      }
    }
    poly = std::move(next);
  };
  for (int i = 0; i < n_upper; ++i) multiply(upper_form);
  for (int i = 0; i < n_lower; ++i) multiply(lower_form);

  auto factorial = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  const double input_norm = 1.0 / std::sqrt(factorial(n_upper) * factorial(n_lower));
  LabeledFockVector out(dim);
  for (const auto& [config, coeff] : poly) {
    if (coeff == 0.0) continue;
    double occupation = 1.0;
    for (auto n : config) occupation *= factorial(n);
    out.amplitudes()[config] = coeff * std::sqrt(occupation) * input_norm;
  }
  return out;
}

/// Brute-force outcome statistics for one state and one decohered system.
/// The Fock expansion of every branch pair is computed once; distributions at
/// any phase are then cheap.
class OracleEvaluator {
 public:
  OracleEvaluator(const InputState& state, const DecoheredSystem& sys) : state_(state) {
    if (state.total() > kOracleMaxTotal) {
      throw DomainError("oracle enumeration is limited to N+M <= " +
                        std::to_string(kOracleMaxTotal) + ", got " +
                        std::to_string(state.total()));
    }
    if (sys.upper.dimension() != sys.lower.dimension()) {
      throw DomainError("arm ensembles must share the internal dimension");
    }
    phases_ = sys.phases;
    for (const auto& u : sys.upper.branches()) {
      for (const auto& l : sys.lower.branches()) {
        const double w = u.weight * l.weight;
        if (w == 0.0) continue;
        pairs_.push_back(evaluate_pair(w, u.state, l.state));
      }
    }
  }

  OutcomeDistribution distribution(double eta) const {
    const int total = state_.total();
    OutcomeDistribution dist{eta, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0)};
    const int d = state_.harmonic();
    for (const auto& pair : pairs_) {
      for (const auto& ph : phases_.points) {
        const auto rel = std::polar(1.0, d * (eta + ph.phase));
        for (int s = 0; s <= total; ++s) {
          const auto idx = static_cast<std::size_t>(s);
          double p = pair.main[idx];
          if (!state_.is_twin()) p += (rel * pair.cross[idx]).real();
          dist.probs[idx] += pair.weight * ph.weight * p;
        }
      }
    }
    return dist;
  }

  SignalCurve curve(std::span<const double> etas) const {
    SignalCurve out{state_, {}};
    for (double eta : etas) out.rows.push_back(distribution(eta));
    return out;
  }

 private:
  struct PairData {
    double weight;
    std::vector<double> main;                 // phase-independent part per s1
    std::vector<std::complex<double>> cross;  // coefficient of e^{i(N-M)eta}
  };

  PairData evaluate_pair(double weight, const StateVector& phi, const StateVector& phi_tilde) const {
    const int total = state_.total();
    const auto size = static_cast<std::size_t>(total) + 1;
    PairData data{weight, std::vector<double>(size, 0.0),
                  std::vector<std::complex<double>>(size, 0.0)};
    const auto first = propagate_fock(state_.n(), state_.m(), phi, phi_tilde);
    if (state_.is_twin()) {
      for (const auto& [config, amp] : first.amplitudes()) {
        data.main[static_cast<std::size_t>(first.port1_count(config))] += std::norm(amp);
      }
    } else {
      // (|N,M> + e^{i theta}|M,N>)/sqrt2: |a + e b|^2 / 2 = (|a|^2+|b|^2)/2 + Re(e conj(a) b)
      const auto second = propagate_fock(state_.m(), state_.n(), phi, phi_tilde);
      for (const auto& [config, amp] : first.amplitudes()) {
        data.main[static_cast<std::size_t>(first.port1_count(config))] += 0.5 * std::norm(amp);
      }
      for (const auto& [config, amp] : second.amplitudes()) {
        const auto s = static_cast<std::size_t>(second.port1_count(config));
        data.main[s] += 0.5 * std::norm(amp);
        auto it = first.amplitudes().find(config);
        if (it != first.amplitudes().end()) data.cross[s] += std::conj(it->second) * amp;
      }
    }
    double norm = 0.0;
    for (double p : data.main) norm += p;
    if (std::abs(norm - 1.0) > 1e-12) {
      throw ContractError("oracle branch is not unitary: total probability " + std::to_string(norm));
    }
    return data;
  }

  InputState state_;
  PhaseMixture phases_;
  std::vector<PairData> pairs_;
};

inline OutcomeDistribution oracle_distribution(const InputState& state,
                                               const InternalEnsemble& upper,
                                               const InternalEnsemble& lower,
                                               const PhaseMixture& phases, double eta) {
  return OracleEvaluator(state, DecoheredSystem{upper, lower, phases}).distribution(eta);
}

/// |phi> = e0 and |phi~> = o e0 + sqrt(1-o^2) e1 with o = pure_overlap.
inline DecoheredSystem decohered_system(const InputState& state, double pure_overlap,
                                        const DecoherenceParams& params) {
  if (!(pure_overlap >= 0.0 && pure_overlap <= 1.0)) {
    throw DomainError("pure overlap must lie in [0,1], got " + std::to_string(pure_overlap));
  }
  auto upper = InternalEnsemble::pure({1.0, 0.0});
  auto lower = InternalEnsemble::pure({pure_overlap, std::sqrt(1.0 - pure_overlap * pure_overlap)});
  return decohere_ensembles(upper, lower, params, state.total());
}

inline OutcomeDistribution oracle_decohered_distribution(const InputState& state,
                                                         double pure_overlap,
                                                         const DecoherenceParams& params,
                                                         double eta) {
  return OracleEvaluator(state, decohered_system(state, pure_overlap, params)).distribution(eta);
}

}  // namespace fockdiag
