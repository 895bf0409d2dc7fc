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
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "fockdiag/diagnosis.hpp"
#include "fockdiag/error.hpp"
#include "fockdiag/harmonic.hpp"
#include "fockdiag/input_state.hpp"
#include "fockdiag/philox.hpp"
#include "fockdiag/probability.hpp"

namespace fockdiag {

/// Detector counts at one phase setting.
struct CountRecord {
  double eta = 0.0;
  std::int64_t shots = 0;
  std::vector<std::int64_t> counts;  // indexed by s1

  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

namespace detail {

inline void check_row(const std::vector<double>& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) {
      throw DomainError("distribution entry " + std::to_string(p) + " outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DomainError("distribution row sums to " + std::to_string(sum));
  }
}

/// Inverse-CDF multinomial draw; the last channel absorbs rounding slack.
inline std::vector<std::int64_t> draw_multinomial(const std::vector<double>& probs,
                                                  std::int64_t shots, UniformStream& rng) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t s = 0; s < probs.size(); ++s) {
    acc += std::max(probs[s], 0.0);
    cdf[s] = acc;
  }
  for (auto& c : cdf) c /= acc;
  std::vector<std::int64_t> counts(probs.size(), 0);
  const std::size_t last = probs.size() - 1;
  for (std::int64_t i = 0; i < shots; ++i) {
    const double u = rng.next();
    std::size_t s = 0;
    while (s < last && u >= cdf[s]) ++s;
    ++counts[s];
  }
  return counts;
}

}  // namespace detail

/// Multinomial counts per phase point. Phase i draws from the Philox stream
/// (seed, i), so results are identical on every platform.
inline std::vector<CountRecord> sample_counts(const SignalCurve& curve,
                                              std::int64_t shots_per_phase, std::uint64_t seed) {
  if (shots_per_phase < 1) throw DomainError("shots per phase must be >= 1");
  std::vector<CountRecord> records;
  records.reserve(curve.rows.size());
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    const auto& row = curve.rows[i];
    detail::check_row(row.probs);
    UniformStream rng(seed, i);
    records.push_back({row.eta, shots_per_phase, detail::draw_multinomial(row.probs, shots_per_phase, rng)});
  }
  return records;
}

/// Observables estimated from counts, with their covariance in field order
/// (v21, v30, p_sum) or (p13, p22).
struct EstimatedObservables {
  InputState state;
  std::variant<Observables21, Observables22> values;
  std::vector<double> std_errors;
  Eigen::MatrixXd covariance;
  std::int64_t shots_total = 0;
  bool physical = true;

  /// Linear ASPP estimates: (a, b, c) for |2:1>, (x, y) for |2,2>.
  std::vector<double> aspps;
  std::vector<double> aspp_std_errors;
  Eigen::MatrixXd aspp_covariance;

  /// |2:1> only: normal-approximation confidence that the sign of v21 is
  /// right, and whether |v21| clears two standard errors.
  double v21_sign_confidence = 1.0;
  bool v21_sign_resolved = true;

  const Observables21& obs21() const { return std::get<Observables21>(values); }
  const Observables22& obs22() const { return std::get<Observables22>(values); }
};

namespace detail {

inline void validate_records(const std::vector<CountRecord>& records, const InputState& state) {
  if (records.empty()) throw DomainError("no count records");
  for (const auto& r : records) {
    if (r.shots < 1) throw DomainError("count record with no shots at eta=" + std::to_string(r.eta));
    if (static_cast<int>(r.counts.size()) != state.total() + 1) {
      throw DomainError("count record has " + std::to_string(r.counts.size()) +
                        " channels, expected " + std::to_string(state.total() + 1));
    }
    std::int64_t sum = 0;
    for (auto c : r.counts) {
      if (c < 0) throw DomainError("negative count");
      sum += c;
    }
    if (sum != r.shots) throw DomainError("counts do not sum to the shot number");
  }
}

inline bool is_21(const InputState& s) { return s == InputState::double_fock(2, 1); }
inline bool is_22(const InputState& s) { return s == InputState::twin_fock(2); }

/// Fitted coefficients stacked per channel: [mean, cos, sin] (|2:1>) or [mean].
struct ChannelFits {
  Eigen::VectorXd theta;
  Eigen::MatrixXd covariance;
  int per_channel = 1;
};

inline ChannelFits fit_counts(const std::vector<CountRecord>& records, const InputState& state) {
  std::vector<double> etas;
  for (const auto& r : records) etas.push_back(r.eta);
  const int d = state.is_twin() ? 0 : state.harmonic();
  const Eigen::MatrixXd proj = harmonic_projector(etas, d);
  const Eigen::MatrixXd design = harmonic_design(etas, d);
  const int q = static_cast<int>(proj.rows());
  const int channels = state.total() + 1;
  const auto k = static_cast<Eigen::Index>(records.size());

  Eigen::MatrixXd freq(k, channels);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    for (int s = 0; s < channels; ++s) {
      freq(i, s) = static_cast<double>(r.counts[static_cast<std::size_t>(s)]) / r.shots;
    }
  }
  ChannelFits out;
  out.per_channel = q;
  out.theta.resize(q * channels);
  for (int s = 0; s < channels; ++s) out.theta.segment(s * q, q) = proj * freq.col(s);

  // multinomial covariance from the fitted (smoothed) probabilities
  Eigen::MatrixXd fitted(k, channels);
  for (int s = 0; s < channels; ++s) fitted.col(s) = design * out.theta.segment(s * q, q);
  fitted = fitted.cwiseMax(0.0).cwiseMin(1.0);
  out.covariance = Eigen::MatrixXd::Zero(q * channels, q * channels);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double n = static_cast<double>(records[static_cast<std::size_t>(i)].shots);
    const Eigen::VectorXd col = proj.col(i);
    const Eigen::MatrixXd outer = col * col.transpose();
    for (int s = 0; s < channels; ++s) {
      for (int t = 0; t < channels; ++t) {
        const double cov = ((s == t ? fitted(i, s) : 0.0) - fitted(i, s) * fitted(i, t)) / n;
        out.covariance.block(s * q, t * q, q, q) += cov * outer;
      }
    }
  }
  return out;
}

inline Eigen::VectorXd observables_from_theta(const Eigen::VectorXd& th, bool twin) {
  if (twin) {
    Eigen::VectorXd o(2);
    o << 0.5 * (th(1) + th(3)), th(2);
    return o;
  }
  auto mean = [&](int s) { return th(3 * s); };
  auto harm = [&](int s) { return Eigen::Vector2d(th(3 * s + 1), th(3 * s + 2)); };
  const Eigen::Vector2d h03 = 0.5 * (harm(0) - harm(3));
  const Eigen::Vector2d h21 = 0.5 * (harm(2) - harm(1));
  const double mu03 = 0.5 * (mean(0) + mean(3));
  const double mu21 = 0.5 * (mean(1) + mean(2));
  const double norm03 = h03.norm();
  const Eigen::Vector2d ref = norm03 > 0.0 ? Eigen::Vector2d(h03 / norm03) : model_direction(1);
  Eigen::VectorXd o(3);
  o << h21.dot(ref) / mu21, norm03 / mu03, mean(0) + mean(3);
  return o;
}

/// ASPPs as linear functionals of the fit along the model harmonic.
inline Eigen::VectorXd aspps_from_theta(const Eigen::VectorXd& th, bool twin) {
  if (twin) {
    const double y = 1.0 - 2.0 * (th(1) + th(3));
    const double x = (3.0 + 3.0 * y - 8.0 * th(2)) / 4.0;
    Eigen::VectorXd v(2);
    v << x, y;
    return v;
  }
  const Eigen::Vector2d u = model_direction(1);
  auto harm = [&](int s) { return Eigen::Vector2d(th(3 * s + 1), th(3 * s + 2)); };
  const double x = 4.0 * (harm(0) - harm(3)).dot(u);  // c + 2b
  const double y = 4.0 * (harm(2) - harm(1)).dot(u);  // 3c - 2b
  const double a = (4.0 * (th(0) + th(9)) - 1.0) / 2.0;
  Eigen::VectorXd v(3);
  v << a, (3.0 * x - y) / 8.0, (x + y) / 4.0;
  return v;
}

template <class F>
Eigen::MatrixXd numeric_jacobian(const F& f, const Eigen::VectorXd& x, double step) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd lo = x;
    Eigen::VectorXd hi = x;
    lo(i) -= step;
    hi(i) += step;
    jac.col(i) = (f(hi) - f(lo)) / (2.0 * step);
  }
  return jac;
}

inline std::vector<double> sqrt_diagonal(const Eigen::MatrixXd& cov) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) out.push_back(std::sqrt(std::max(cov(i, i), 0.0)));
  return out;
}

}  // namespace detail

/// Fourier regression of the empirical frequencies at harmonic N-M, with
/// standard errors propagated from the multinomial covariance.
inline EstimatedObservables estimate_observables(const std::vector<CountRecord>& records,
                                                 const InputState& state) {
  if (!detail::is_21(state) && !detail::is_22(state)) {
    throw DomainError("observable estimation supports |2:1> and |2,2>, got |" + state.label() + ">");
  }
  detail::validate_records(records, state);
  std::vector<double> etas;
  for (const auto& r : records) etas.push_back(r.eta);
  const int d = state.is_twin() ? 0 : state.harmonic();
  if (distinct_phases(etas) < 2 * d + 3) {
    throw DomainError("need at least " + std::to_string(2 * d + 3) + " distinct phases, got " +
                      std::to_string(distinct_phases(etas)));
  }
  const bool twin = state.is_twin();
  const auto fits = detail::fit_counts(records, state);

  EstimatedObservables est{state, Observables21{}, {}, {}, 0, true, {}, {}, {}};
  for (const auto& r : records) est.shots_total += r.shots;

  const Eigen::VectorXd obs = detail::observables_from_theta(fits.theta, twin);
  const auto obs_fn = [twin](const Eigen::VectorXd& th) {
    return detail::observables_from_theta(th, twin);
  };
  const Eigen::MatrixXd jac = detail::numeric_jacobian(obs_fn, fits.theta, 1e-7);
  est.covariance = jac * fits.covariance * jac.transpose();
  est.std_errors = detail::sqrt_diagonal(est.covariance);

  const Eigen::VectorXd lin = detail::aspps_from_theta(fits.theta, twin);
  const auto lin_fn = [twin](const Eigen::VectorXd& th) { return detail::aspps_from_theta(th, twin); };
  const Eigen::MatrixXd ljac = detail::numeric_jacobian(lin_fn, fits.theta, 1e-7);
  est.aspps.assign(lin.data(), lin.data() + lin.size());
  est.aspp_covariance = ljac * fits.covariance * ljac.transpose();
  est.aspp_std_errors = detail::sqrt_diagonal(est.aspp_covariance);

  if (twin) {
    est.values = Observables22{obs(0), obs(1)};
    const double x = lin(0);
    const double y = lin(1);
    est.physical = x <= 1.0 && y >= x * x && y <= x;
  } else {
    est.values = Observables21{obs(0), obs(1), obs(2)};
    const Aspps21 s{lin(0), lin(1), lin(2)};
    bool physical = s.a >= 0.0 && s.a <= 1.0 && s.b >= 0.0 && s.c >= 0.0;
    if (physical && s.a > 0.0 && s.b > 0.0 && s.c > 0.0) {
      const auto p = params_from_aspps_21(s);
      physical = p.gamma_dist <= 1.0 && p.gamma_phase <= 1.0 && p.gamma_mix <= 1.0;
    }
    est.physical = physical;
    const double sigma = est.std_errors[0];
    if (sigma > 0.0) {
      const double z = std::abs(obs(0)) / sigma;
      est.v21_sign_confidence = 0.5 * std::erfc(-z / std::sqrt(2.0));
      est.v21_sign_resolved = z >= 2.0;
    }
  }
  return est;
}

enum class ErrorMethod { Jacobian, Bootstrap };

struct RunOptions {
  ErrorMethod errors = ErrorMethod::Jacobian;
  int bootstrap_resamples = 200;
  std::uint64_t bootstrap_seed = 0;
  /// Significance, in Gaussian standard deviations, at which the ASPP
  /// estimates must exclude zero before the rates count as identified.
  double resolution_sigma = 5.0;
};

/// Diagnosis of a counting run plus one-sigma parameter uncertainties.
struct DiagnosisRun {
  DiagnosisResult diagnosis;
  EstimatedObservables estimate;
  std::optional<double> sigma_dist;
  std::optional<double> sigma_phase;
  std::optional<double> sigma_mix;
};

namespace detail {

/// Chi-square threshold with the same upper-tail mass as a two-sided
/// `sigma`-standard-deviation Gaussian interval.
inline double chi_square_threshold(int dof, double sigma) {
  const double tail = std::erfc(sigma / std::sqrt(2.0));
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), tail));
}

/// v^T cov^-1 v; a vanishing covariance gives 0 or infinity.
inline double mahalanobis_squared(const Eigen::VectorXd& v, const Eigen::MatrixXd& cov) {
  if (cov.cwiseAbs().maxCoeff() == 0.0) {
    return v.isZero(0.0) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  return v.dot(ldlt.solve(v));
}

/// Closed-form (gamma_dist, gamma_phase, gamma_mix) or (gamma_dist, gamma_mix).
inline Eigen::VectorXd closed_form_params(const Eigen::VectorXd& obs, bool twin) {
  if (twin) {
    const double y = 1.0 - 4.0 * obs(0);
    const double x = (3.0 + 3.0 * y - 8.0 * obs(1)) / 4.0;
    Eigen::VectorXd p(2);
    p << std::sqrt(y / x), x / std::sqrt(y);
    return p;
  }
  const auto p = params_from_aspps_21(aspps_from_observables_21({obs(0), obs(1), obs(2)}));
  Eigen::VectorXd v(3);
  v << p.gamma_dist, p.gamma_phase, p.gamma_mix;
  return v;
}

inline Eigen::VectorXd observable_vector(const EstimatedObservables& est) {
  if (est.state.is_twin()) {
    Eigen::VectorXd o(2);
    o << est.obs22().p13, est.obs22().p22;
    return o;
  }
  Eigen::VectorXd o(3);
  o << est.obs21().v21, est.obs21().v30, est.obs21().p_sum;
  return o;
}

}  // namespace detail

/// estimate_observables followed by the closed-form inversion. ASPP estimates
/// that do not exclude zero at options.resolution_sigma mark full
/// decoherence; estimates outside the physical region by less than
/// region_tolerance standard errors are projected onto it and flagged.
inline DiagnosisRun diagnose_run(const std::vector<CountRecord>& records, const InputState& state,
                                 double region_tolerance, const RunOptions& options = {}) {
  if (!(region_tolerance >= 0.0)) throw DomainError("region tolerance must be non-negative");
  DiagnosisRun run{{}, estimate_observables(records, state), {}, {}, {}};
  const auto& est = run.estimate;
  const bool twin = state.is_twin();
  const double max_sigma = *std::max_element(est.std_errors.begin(), est.std_errors.end());

  InversionOptions inv;
  inv.tolerance = std::max(region_tolerance * max_sigma, 1e-9);
  if (!(options.resolution_sigma > 0.0)) throw DomainError("resolution sigma must be positive");
  if (twin) {
    inv.degeneracy_floor = std::array<double, 3>{
        options.resolution_sigma * est.aspp_std_errors[1], 0.0, 0.0};
    run.diagnosis = invert_22(est.obs22(), inv);
  } else {
    // Joint tests on the linear ASPP estimates: the visibilities are
    // magnitudes and would bias b and c away from zero.
    const Eigen::Map<const Eigen::VectorXd> abc(est.aspps.data(), 3);
    const bool interference =
        detail::mahalanobis_squared(abc, est.aspp_covariance) >
        detail::chi_square_threshold(3, options.resolution_sigma);
    const bool phase =
        detail::mahalanobis_squared(abc.tail(2), est.aspp_covariance.bottomRightCorner(2, 2)) >
        detail::chi_square_threshold(2, options.resolution_sigma);
    inv.resolved = InversionOptions::Resolution{interference, phase};
    run.diagnosis = invert_21(est.obs21(), inv);
  }
  if (run.diagnosis.identifiability != Identifiability::Unique) return run;

  Eigen::VectorXd sigma;
  const Eigen::VectorXd obs = detail::observable_vector(est);
  if (options.errors == ErrorMethod::Jacobian) {
    const auto fn = [twin](const Eigen::VectorXd& o) { return detail::closed_form_params(o, twin); };
    const Eigen::MatrixXd jac = detail::numeric_jacobian(fn, obs, 1e-6);
    const Eigen::MatrixXd cov = jac * est.covariance * jac.transpose();
    sigma = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else {
    if (options.bootstrap_resamples < 2) throw DomainError("bootstrap needs >= 2 resamples");
    std::vector<Eigen::VectorXd> draws;
    for (int b = 0; b < options.bootstrap_resamples; ++b) {
      std::vector<CountRecord> resampled;
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        std::vector<double> freq;
        for (auto c : r.counts) freq.push_back(static_cast<double>(c) / r.shots);
        UniformStream rng(options.bootstrap_seed,
                          (static_cast<std::uint64_t>(b + 1) << 32) | static_cast<std::uint64_t>(i));
        resampled.push_back({r.eta, r.shots, detail::draw_multinomial(freq, r.shots, rng)});
      }
      const auto e = estimate_observables(resampled, state);
      const Eigen::VectorXd p = detail::closed_form_params(detail::observable_vector(e), twin);
      if (p.allFinite()) draws.push_back(p);
    }
    if (draws.size() < 2) throw DomainError("bootstrap produced no finite parameter draws");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(draws.front().size());
    for (const auto& p : draws) mean += p;
    mean /= static_cast<double>(draws.size());
    Eigen::VectorXd var = Eigen::VectorXd::Zero(mean.size());
    for (const auto& p : draws) var += (p - mean).cwiseAbs2();
    sigma = (var / static_cast<double>(draws.size() - 1)).cwiseSqrt();
  }
  run.sigma_dist = sigma(0);
  if (twin) {
    run.sigma_mix = sigma(1);
  } else {
    run.sigma_phase = sigma(1);
    run.sigma_mix = sigma(2);
  }
  return run;
}

}  // namespace fockdiag
