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
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fockdiag/aspp_table.hpp"
#include "fockdiag/combinatorics.hpp"
#include "fockdiag/decoherence.hpp"
#include "fockdiag/error.hpp"
#include "fockdiag/harmonic.hpp"
#include "fockdiag/input_state.hpp"
#include "fockdiag/probability.hpp"

namespace fockdiag {

/// Observables of |2:1>: signed (2,1)-channel visibility, (3,0)-channel
/// visibility and the total bunching probability P(3,0) + P(0,3).
struct Observables21 {
  double v21 = 0.0;
  double v30 = 0.0;
  double p_sum = 0.0;
};

/// Phase-independent observables of |2,2>: P(1,3) and P(2,2).
struct Observables22 {
  double p13 = 0.0;
  double p22 = 0.0;
};

enum class Identifiability { Unique, DegenerateFullDecoherence, OutOfPhysicalRegion };

inline const char* to_string(Identifiability id) {
  switch (id) {
    case Identifiability::Unique: return "Unique";
    case Identifiability::DegenerateFullDecoherence: return "DegenerateFullDecoherence";
    case Identifiability::OutOfPhysicalRegion: return "OutOfPhysicalRegion";
  }
  return "?";
}

/// Recovered decoherence parameters. Fields that the observables cannot
/// determine are left empty; in degenerate cases the identifiable product
/// gamma_dist * gamma_mix is reported instead.
struct DiagnosisResult {
  std::optional<double> gamma_dist;
  std::optional<double> gamma_phase;
  std::optional<double> gamma_mix;
  std::optional<double> dist_mix_product;
  Identifiability identifiability = Identifiability::Unique;
  double residual = 0.0;
  bool projected = false;

  /// All three parameters; throws unless each one was identified.
  DecoherenceParams params() const {
    if (!gamma_dist || !gamma_phase || !gamma_mix) {
      throw DomainError(std::string("parameters not fully identified (") +
                        to_string(identifiability) + ")");
    }
    return {*gamma_dist, *gamma_phase, *gamma_mix};
  }
};

namespace detail {

/// Box-constrained Levenberg-Marquardt on [0,1]^n with a forward-difference
/// Jacobian. Small problems only (n <= 3).
inline Eigen::VectorXd fit_in_unit_box(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
    Eigen::VectorXd x) {
  auto clamp = [](Eigen::VectorXd v) { return v.cwiseMax(0.0).cwiseMin(1.0).eval(); };
  x = clamp(x);
  Eigen::VectorXd r = residuals(x);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int iter = 0; iter < 500 && cost > 1e-32; ++iter) {
    Eigen::MatrixXd jac(r.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = 1e-7;
      Eigen::VectorXd xh = x;
      // step inward at the upper face
      xh(i) += (x(i) + h <= 1.0) ? h : -h;
      jac.col(i) = (residuals(xh) - r) / (xh(i) - x(i));
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    bool improved = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal().array() += lambda * (1.0 + jtj.diagonal().array());
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      const Eigen::VectorXd candidate = clamp(x + step);
      const Eigen::VectorXd rc = residuals(candidate);
      const double cc = rc.squaredNorm();
      if (cc < cost) {
        const double gain = cost - cc;
        x = candidate;
        r = rc;
        cost = cc;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = gain > 1e-30;
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) break;
  }
  return x;
}

inline double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace detail

/// Thresholds for the inverse maps.
struct InversionOptions {
  /// Accepted observable mismatch for a point to count as physical.
  double tolerance = 1e-9;
  /// ASPP floors at or below which coherence counts as fully lost: (a, b, c)
  /// for |2:1>, (y, -, -) for |2,2>. Each defaults to `tolerance`.
  std::optional<std::array<double, 3>> degeneracy_floor;
  /// |2:1> only: verdicts of a statistical test on the ASPP estimates. When
  /// set they replace the floor checks: an unresolved signal is reported as
  /// full decoherence outright.
  struct Resolution {
    bool interference;  // (a, b, c) differ from zero
    bool phase;         // (b, c) differ from zero
  };
  std::optional<Resolution> resolved;
};

// ---------------------------------------------------------------------------
// Twin-Fock |2,2>

inline Observables22 observables_22(const AsppTable& aspps) {
  const double x = aspps.at(1, 0);
  const double y = aspps.at(2, 0);
  return {(1.0 - y) / 4.0, (3.0 - 4.0 * x + 3.0 * y) / 8.0};
}

inline Observables22 observables_22(const DecoherenceParams& params) {
  return observables_22(aspp_table_from_params(params, InputState::twin_fock(2)));
}

/// Recovers gamma_dist and gamma_mix from |2,2> probabilities via
/// x = gamma_mix^2 gamma_dist^2, y = gamma_mix^2 gamma_dist^4. gamma_phase is
/// never identified by a twin-Fock state.
inline DiagnosisResult invert_22(const Observables22& obs, const InversionOptions& options = {}) {
  const double tolerance = options.tolerance;
  const double y_floor = options.degeneracy_floor ? (*options.degeneracy_floor)[0] : tolerance;
  const double y = 1.0 - 4.0 * obs.p13;
  const double x = (3.0 + 3.0 * y - 8.0 * obs.p22) / 4.0;
  DiagnosisResult result;

  auto mismatch = [&](double dist, double mix) {
    const auto o = observables_22(DecoherenceParams{dist, 1.0, mix});
    return std::max(std::abs(o.p13 - obs.p13), std::abs(o.p22 - obs.p22));
  };

  if (y <= y_floor) {
    // only the product survives, and it must vanish with y
    const double product = std::sqrt(std::clamp(x, 0.0, 1.0));
    const double residual = mismatch(1.0, product);
    if (residual <= tolerance) {
      result.dist_mix_product = product;
      result.residual = residual;
      result.identifiability = Identifiability::DegenerateFullDecoherence;
      return result;
    }
  }

  double dist = x > 0.0 ? std::sqrt(y / x) : 2.0;
  double mix = x / std::sqrt(y);
  const bool inside = x > 0.0 && dist <= 1.0 + tolerance && mix >= -tolerance &&
                      mix <= 1.0 + tolerance;
  if (inside) {
    dist = std::clamp(dist, 0.0, 1.0);
    mix = std::clamp(mix, 0.0, 1.0);
  } else {
    auto res = [&](const Eigen::VectorXd& g) {
      const auto o = observables_22(DecoherenceParams{g(0), 1.0, g(1)});
      Eigen::VectorXd r(2);
      r << o.p13 - obs.p13, o.p22 - obs.p22;
      return r;
    };
    Eigen::VectorXd seed(2);
    seed << std::clamp(std::isfinite(dist) ? dist : 1.0, 0.0, 1.0),
        std::clamp(std::isfinite(mix) ? mix : 1.0, 0.0, 1.0);
    const auto best = detail::fit_in_unit_box(res, seed);
    dist = best(0);
    mix = best(1);
    result.projected = true;
  }
  result.gamma_dist = dist;
  result.gamma_mix = mix;
  result.dist_mix_product = dist * mix;
  result.residual = mismatch(dist, mix);
  result.identifiability =
      result.residual <= tolerance ? Identifiability::Unique : Identifiability::OutOfPhysicalRegion;
  return result;
}

inline DiagnosisResult invert_22(const Observables22& obs, double tolerance) {
  return invert_22(obs, InversionOptions{tolerance, std::nullopt, std::nullopt});
}

// ---------------------------------------------------------------------------
// Double-Fock superposition |2:1>

/// The three ASPPs |2:1> depends on: a = {|o|^2}, b = {o}, c = {|o|^2 o}.
struct Aspps21 {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

inline Observables21 observables_21(const Aspps21& s) {
  return {(3.0 * s.c - 2.0 * s.b) / (3.0 - 2.0 * s.a), (s.c + 2.0 * s.b) / (1.0 + 2.0 * s.a),
          (1.0 + 2.0 * s.a) / 4.0};
}

inline Observables21 observables_21(const AsppTable& aspps) {
  return observables_21(Aspps21{aspps.at(1, 0), aspps.at(0, 1), aspps.at(1, 1)});
}

inline Observables21 observables_21(const DecoherenceParams& params) {
  return observables_21(aspp_table_from_params(params, InputState::double_fock(2, 1)));
}

/// Linear recovery of (a, b, c) from the observables.
inline Aspps21 aspps_from_observables_21(const Observables21& obs) {
  const double a = (4.0 * obs.p_sum - 1.0) / 2.0;
  const double x = obs.v30 * (1.0 + 2.0 * a);  // c + 2b
  const double y = obs.v21 * (3.0 - 2.0 * a);  // 3c - 2b
  return {a, (3.0 * x - y) / 8.0, (x + y) / 4.0};
}

/// Closed-form gamma triple from (a, b, c); no range checks.
inline DecoherenceParams params_from_aspps_21(const Aspps21& s) {
  return {std::sqrt(s.c / s.b), std::sqrt(s.b * s.c) / s.a, std::sqrt(s.a * s.b / s.c)};
}

inline DiagnosisResult invert_21(const Observables21& obs, const InversionOptions& options = {}) {
  const double tol = options.tolerance;
  const auto floor = options.degeneracy_floor.value_or(std::array<double, 3>{tol, tol, tol});
  const auto s = aspps_from_observables_21(obs);
  DiagnosisResult result;

  auto mismatch = [&](const DecoherenceParams& p) {
    const auto o = observables_21(p);
    return std::max({std::abs(o.v21 - obs.v21), std::abs(o.v30 - obs.v30),
                     std::abs(o.p_sum - obs.p_sum)});
  };

  // Without a statistical verdict, a degenerate reading is taken only if its
  // model reproduces the input; a small but resolved ASPP still determines
  // all three rates.
  const auto& verdict = options.resolved;
  const bool classical = verdict ? !verdict->interference : s.a <= floor[0];
  const bool dephased = verdict ? !verdict->phase : (s.b <= floor[1] || s.c <= floor[2]);
  if (classical) {
    // classical edge: gamma_dist * gamma_mix = 0, nothing else survives
    const double residual = mismatch({0.0, 1.0, 1.0});
    if (verdict || residual <= tol) {
      result.dist_mix_product = 0.0;
      result.residual = residual;
      result.identifiability = Identifiability::DegenerateFullDecoherence;
      return result;
    }
  } else if (dephased) {
    // full dephasing: only the product gamma_dist * gamma_mix is visible
    const double product = std::sqrt(std::clamp(s.a, 0.0, 1.0));
    const double residual = mismatch({1.0, 0.0, product});
    if (verdict || residual <= tol) {
      result.gamma_phase = 0.0;
      result.dist_mix_product = product;
      result.residual = residual;
      result.identifiability = Identifiability::DegenerateFullDecoherence;
      return result;
    }
  }

  DecoherenceParams p = params_from_aspps_21(s);
  auto in_range = [&](double g) { return g >= -tol && g <= 1.0 + tol; };
  if (in_range(p.gamma_dist) && in_range(p.gamma_phase) && in_range(p.gamma_mix)) {
    p = {std::clamp(p.gamma_dist, 0.0, 1.0), std::clamp(p.gamma_phase, 0.0, 1.0),
         std::clamp(p.gamma_mix, 0.0, 1.0)};
  } else {
    auto res = [&](const Eigen::VectorXd& g) {
      const auto o = observables_21(DecoherenceParams{g(0), g(1), g(2)});
      Eigen::VectorXd r(3);
      r << o.v21 - obs.v21, o.v30 - obs.v30, o.p_sum - obs.p_sum;
      return r;
    };
    Eigen::VectorXd seed(3);
    seed << p.gamma_dist, p.gamma_phase, p.gamma_mix;
    for (Eigen::Index i = 0; i < 3; ++i) {
      if (!std::isfinite(seed(i))) seed(i) = 1.0;
    }
    const auto best = detail::fit_in_unit_box(res, seed);
    p = {best(0), best(1), best(2)};
    result.projected = true;
  }
  result.gamma_dist = p.gamma_dist;
  result.gamma_phase = p.gamma_phase;
  result.gamma_mix = p.gamma_mix;
  result.dist_mix_product = p.gamma_dist * p.gamma_mix;
  result.residual = mismatch(p);
  result.identifiability =
      result.residual <= tol ? Identifiability::Unique : Identifiability::OutOfPhysicalRegion;
  return result;
}

inline DiagnosisResult invert_21(const Observables21& obs, double tolerance) {
  return invert_21(obs, InversionOptions{tolerance, std::nullopt, std::nullopt});
}

// ---------------------------------------------------------------------------
// Curves

inline std::vector<HarmonicFit> fit_channels(const SignalCurve& curve) {
  const auto etas = curve.etas();
  const int d = curve.state.is_twin() ? 0 : curve.state.harmonic();
  const Eigen::MatrixXd proj = harmonic_projector(etas, d);
  std::vector<HarmonicFit> fits;
  for (int s = 0; s <= curve.state.total(); ++s) {
    const auto values = curve.channel(s);
    const Eigen::Map<const Eigen::VectorXd> y(values.data(),
                                              static_cast<Eigen::Index>(values.size()));
    fits.push_back(coefficients_to_fit(proj * y));
  }
  return fits;
}

/// Visibility (max-min)/(max+min) of channel s1, taken from the fitted
/// harmonic (N-M) plus mean. Negative when the channel's fringe is opposite in
/// phase to the s1 = 0 channel.
inline double signed_visibility(const SignalCurve& curve, int s1) {
  const auto& state = curve.state;
  if (s1 < 0 || s1 > state.total()) throw DomainError("channel s1 out of range");
  const int d = state.is_twin() ? 0 : state.harmonic();
  const int needed = 2 * d + 3;
  if (distinct_phases(curve.etas()) < needed) {
    throw DomainError("visibility needs at least " + std::to_string(needed) +
                      " distinct phases for harmonic " + std::to_string(d));
  }
  const auto fits = fit_channels(curve);
  const auto& fit = fits[static_cast<std::size_t>(s1)];
  if (!(fit.mean > 0.0)) {
    throw DomainError("visibility undefined for a channel with zero mean signal");
  }
  if (d == 0) return 0.0;
  Eigen::Vector2d ref(fits[0].cos_coeff, fits[0].sin_coeff);
  if (ref.norm() == 0.0) ref = model_direction(d);
  const Eigen::Vector2d h(fit.cos_coeff, fit.sin_coeff);
  const double magnitude = fit.amplitude() / fit.mean;
  return h.dot(ref) < 0.0 ? -magnitude : magnitude;
}

inline Observables21 observables_21_from_curve(const SignalCurve& curve) {
  if (!(curve.state == InputState::double_fock(2, 1))) {
    throw DomainError("Observables21 are defined for |2:1> only");
  }
  const auto fits = fit_channels(curve);
  return {signed_visibility(curve, 2), signed_visibility(curve, 0), fits[0].mean + fits[3].mean};
}

inline Observables22 observables_22_from_curve(const SignalCurve& curve) {
  if (!(curve.state == InputState::twin_fock(2))) {
    throw DomainError("Observables22 are defined for |2,2> only");
  }
  const auto fits = fit_channels(curve);
  return {fits[1].mean, fits[2].mean};
}

// ---------------------------------------------------------------------------
// General ASPP inference

struct InferredAspps {
  AsppTable table;                 // values clamped to [-1, 1]
  std::vector<AsppKey> unknowns;   // column order of the linear system
  std::vector<double> raw_values;  // unclamped least-squares solution
  double condition_number = 0.0;
  int rank = 0;
};

/// Infers every free ASPP of curve.state from the channel means and the
/// amplitudes along the model harmonic Re[(i e^{i eta})^(N-M)], by linear
/// least squares on the scalar-product polynomial.
inline InferredAspps infer_aspps(const SignalCurve& curve, double rank_tolerance = 1e-10) {
  const auto& state = curve.state;
  const bool twin = state.is_twin();
  const int d = twin ? 0 : state.harmonic();
  const int needed = twin ? 1 : 2 * d + 1;
  if (distinct_phases(curve.etas()) < needed) {
    throw DomainError("ASPP inference needs at least " + std::to_string(needed) +
                      " distinct phases");
  }
  const auto fits = fit_channels(curve);
  const Eigen::Vector2d direction = model_direction(d);

  InferredAspps out;
  out.unknowns = unknown_aspps(state);
  const auto cols = static_cast<Eigen::Index>(out.unknowns.size());
  auto column_of = [&](int m, int k) -> Eigen::Index {
    for (Eigen::Index i = 0; i < cols; ++i) {
      if (out.unknowns[static_cast<std::size_t>(i)].m == m &&
          out.unknowns[static_cast<std::size_t>(i)].k == k) {
        return i;
      }
    }
    return -1;
  };

  const int outcomes = state.total() + 1;
  const int mean_rows = state.m() >= 1 ? outcomes : 0;
  const int harmonic_rows = twin ? 0 : outcomes;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(mean_rows + harmonic_rows, cols);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mean_rows + harmonic_rows);

  for (int s = 0; s < outcomes; ++s) {
    const double pref = outcome_prefactor(state, s);
    const auto& fit = fits[static_cast<std::size_t>(s)];
    if (mean_rows > 0) {
      rhs(s) = fit.mean - pref * static_cast<double>(coeff_c(state, s, 0));
      for (int j = 1; j <= state.m(); ++j) {
        a(s, column_of(j, 0)) = pref * static_cast<double>(coeff_c(state, s, j));
      }
    }
    if (!twin) {
      const Eigen::Index row = mean_rows + s;
      const double sign = s % 2 == 0 ? 1.0 : -1.0;
      rhs(row) = direction.x() * fit.cos_coeff + direction.y() * fit.sin_coeff;
      for (int j = 0; j <= state.m(); ++j) {
        a(row, column_of(state.m() - j, d)) +=
            sign * pref * static_cast<double>(coeff_c(state, s, j));
      }
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rank_tolerance * smax) ++rank;
  }
  out.rank = rank;
  if (rank < cols || smax == 0.0) throw RankDeficientError(rank, static_cast<int>(cols));
  out.condition_number = smax / sv(sv.size() - 1);

  const Eigen::VectorXd solution = svd.solve(rhs);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const auto& key = out.unknowns[static_cast<std::size_t>(i)];
    out.raw_values.push_back(solution(i));
    out.table.set(key.m, key.k, std::clamp(solution(i), -1.0, 1.0));
  }
  return out;
}

}  // namespace fockdiag
