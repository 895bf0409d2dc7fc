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
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fockdiag/error.hpp"

namespace fockdiag {

/// Least-squares fit of mean + cos(d eta) + sin(d eta). For d = 0 only the
/// mean is fitted and both harmonic coefficients are zero.
struct HarmonicFit {
  double mean = 0.0;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;

  double amplitude() const { return std::hypot(cos_coeff, sin_coeff); }
};

/// Design matrix with columns [1, cos(d eta), sin(d eta)] (just [1] for d=0).
inline Eigen::MatrixXd harmonic_design(std::span<const double> etas, int harmonic) {
  const auto rows = static_cast<Eigen::Index>(etas.size());
  Eigen::MatrixXd x(rows, harmonic == 0 ? 1 : 3);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double eta = etas[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    if (harmonic != 0) {
      x(i, 1) = std::cos(harmonic * eta);
      x(i, 2) = std::sin(harmonic * eta);
    }
  }
  return x;
}

/// Linear map from samples to fit coefficients, (X^T X)^{-1} X^T.
inline Eigen::MatrixXd harmonic_projector(std::span<const double> etas, int harmonic) {
  const Eigen::MatrixXd x = harmonic_design(etas, harmonic);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    throw DomainError("phase grid does not resolve harmonic " + std::to_string(harmonic));
  }
  return qr.solve(Eigen::MatrixXd::Identity(x.rows(), x.rows()));
}

inline HarmonicFit coefficients_to_fit(const Eigen::VectorXd& theta) {
  HarmonicFit fit;
  fit.mean = theta(0);
  if (theta.size() == 3) {
    fit.cos_coeff = theta(1);
    fit.sin_coeff = theta(2);
  }
  return fit;
}

inline HarmonicFit fit_harmonic(std::span<const double> etas, std::span<const double> values,
                                int harmonic) {
  if (etas.size() != values.size()) throw DomainError("phase and value counts differ");
  const Eigen::MatrixXd proj = harmonic_projector(etas, harmonic);
  const Eigen::Map<const Eigen::VectorXd> y(values.data(), static_cast<Eigen::Index>(values.size()));
  return coefficients_to_fit(proj * y);
}

/// Unit vector (cos, sin coefficients) of Re[(i e^{i eta})^d] = cos(d eta + d pi/2).
inline Eigen::Vector2d model_direction(int harmonic) {
  switch (harmonic % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

/// Number of distinct phase values (exact comparison).
inline int distinct_phases(std::span<const double> etas) {
  std::vector<double> sorted(etas.begin(), etas.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

}  // namespace fockdiag
