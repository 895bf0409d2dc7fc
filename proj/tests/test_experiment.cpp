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

#include "fockdiag/experiment.hpp"

#include <cmath>
#include <numbers>

#include "gtest/gtest.h"

#include "test_util.hpp"

using namespace fockdiag;
using std::numbers::pi;

namespace {

const InputState kTwoOne = InputState::double_fock(2, 1);
const InputState kTwoTwo = InputState::twin_fock(2);
const DecoherenceParams kFigure{0.7, 0.6, 0.7};

std::vector<CountRecord> simulate(const InputState& s, const DecoherenceParams& p,
                                  std::int64_t shots, std::uint64_t seed, int phases = 12) {
  return sample_counts(signal_curve(s, phase_grid(phases), aspp_table_from_params(p, s)), shots,
                       seed);
}

// Phases where sin(eta) is dyadic, so dyadic ASPPs give dyadic probabilities
// and integer counts reproduce them exactly.
std::vector<CountRecord> exact_records(const InputState& s, const AsppTable& t) {
  constexpr std::int64_t shots = std::int64_t{1} << 20;
  std::vector<CountRecord> out;
  for (double eta : {0.0, pi / 6, pi / 2, 5 * pi / 6, pi, 7 * pi / 6, 3 * pi / 2, 11 * pi / 6}) {
    const auto d = outcome_distribution(s, eta, t);
    CountRecord r{eta, shots, {}};
    std::int64_t total = 0;
    for (double p : d.probs) total += r.counts.emplace_back(std::llround(p * shots));
    EXPECT_EQ(total, shots);
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(experiment, deterministic_streams) {
  const auto a = simulate(kTwoOne, kFigure, 1000, 7);
  const auto b = simulate(kTwoOne, kFigure, 1000, 7);
  const auto c = simulate(kTwoOne, kFigure, 1000, 8);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(experiment, fixed_draws) {
  // Regression lock on the generator and the inverse-CDF mapping.
  const auto r = simulate(kTwoOne, {1, 1, 1}, 10, 5, 3);
  EXPECT_EQ(r[0].counts, (std::vector<std::int64_t>{4, 0, 1, 5}));
  EXPECT_EQ(r[1].counts, (std::vector<std::int64_t>{0, 2, 0, 8}));
  EXPECT_EQ(r[2].counts, (std::vector<std::int64_t>{5, 0, 5, 0}));
}

TEST(experiment, certain_outcome) {
  SignalCurve curve{kTwoOne, {}};
  for (double eta : phase_grid(5)) curve.rows.push_back({eta, {0.0, 0.0, 0.0, 1.0}});
  for (const auto& r : sample_counts(curve, 1000, 3)) {
    EXPECT_EQ(r.counts, (std::vector<std::int64_t>{0, 0, 0, 1000}));
  }
}

TEST(experiment, frequencies_within_five_sigma) {
  constexpr std::int64_t n = 100000;
  const auto curve = signal_curve(kTwoOne, phase_grid(12), aspp_table_from_params({1, 1, 1}, kTwoOne));
  const auto records = sample_counts(curve, n, 2024);
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t s = 0; s < 4; ++s) {
      const double p = curve.rows[i].probs[s];
      const double sigma = std::sqrt(p * (1 - p) / n);
      EXPECT_LE(std::abs(static_cast<double>(records[i].counts[s]) / n - p), 5 * sigma + 1e-12);
    }
  }
}

TEST(experiment, single_shot) {
  for (const auto& r : simulate(kTwoOne, kFigure, 1, 9)) {
    std::int64_t total = 0;
    for (auto c : r.counts) total += c;
    EXPECT_EQ(total, 1);
    EXPECT_EQ(r.shots, 1);
  }
}

TEST(experiment, invalid_inputs) {
  EXPECT_THROW(simulate(kTwoOne, kFigure, 0, 1), DomainError);
  SignalCurve bad{kTwoOne, {{0.0, {0.5, 0.5, 0.5, 0.0}}}};
  EXPECT_THROW(sample_counts(bad, 10, 1), DomainError);
}

TEST(experiment, exact_frequencies_give_exact_observables) {
  AsppTable t21;
  t21.set(1, 0, 0.5);
  t21.set(0, 1, 0.25);
  t21.set(1, 1, 0.125);
  const auto e21 = estimate_observables(exact_records(kTwoOne, t21), kTwoOne);
  const auto want21 = observables_21(t21);
  EXPECT_NEAR(e21.obs21().v21, want21.v21, 1e-12);
  EXPECT_NEAR(e21.obs21().v30, want21.v30, 1e-12);
  EXPECT_NEAR(e21.obs21().p_sum, want21.p_sum, 1e-12);
  EXPECT_TRUE(e21.physical);
  for (double s : e21.std_errors) EXPECT_GE(s, 0.0);

  AsppTable t22;
  t22.set(1, 0, 0.5);
  t22.set(2, 0, 0.25);
  const auto e22 = estimate_observables(exact_records(kTwoTwo, t22), kTwoTwo);
  EXPECT_NEAR(e22.obs22().p13, observables_22(t22).p13, 1e-12);
  EXPECT_NEAR(e22.obs22().p22, observables_22(t22).p22, 1e-12);
}

TEST(experiment, v30_within_three_sigma) {
  const auto e = estimate_observables(simulate(kTwoOne, kFigure, 10000, 1), kTwoOne);
  EXPECT_EQ(e.shots_total, 120000);
  EXPECT_LE(std::abs(e.obs21().v30 - 0.34620), 3 * e.std_errors[1]);
}

TEST(experiment, insufficient_phases) {
  EXPECT_THROW(estimate_observables(simulate(kTwoOne, kFigure, 1000, 1, 1), kTwoOne), DomainError);
  EXPECT_THROW(estimate_observables(simulate(kTwoOne, kFigure, 1000, 1, 4), kTwoOne), DomainError);
  EXPECT_THROW(estimate_observables(simulate(InputState::double_fock(3, 1), kFigure, 10, 1),
                                    InputState::double_fock(3, 1)),
               DomainError);
}

TEST(experiment, zero_shot_records) {
  auto records = simulate(kTwoOne, kFigure, 10, 1);
  for (auto& r : records) {
    r.shots = 0;
    std::fill(r.counts.begin(), r.counts.end(), 0);
  }
  EXPECT_THROW(diagnose_run(records, kTwoOne, 3.0), DomainError);
}

TEST(experiment, figure_triple_within_three_sigma) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto run = diagnose_run(simulate(kTwoOne, kFigure, 100000, seed), kTwoOne, 3.0);
    ASSERT_EQ(run.diagnosis.identifiability, Identifiability::Unique) << seed;
    EXPECT_LE(std::abs(*run.diagnosis.gamma_dist - 0.7), 3 * *run.sigma_dist);
    EXPECT_LE(std::abs(*run.diagnosis.gamma_phase - 0.6), 3 * *run.sigma_phase);
    EXPECT_LE(std::abs(*run.diagnosis.gamma_mix - 0.7), 3 * *run.sigma_mix);
  }
}

TEST(experiment, bootstrap_agrees_with_jacobian) {
  const auto records = simulate(kTwoOne, kFigure, 100000, 3);
  const auto jac = diagnose_run(records, kTwoOne, 3.0);
  const auto boot = diagnose_run(records, kTwoOne, 3.0, {ErrorMethod::Bootstrap, 100, 17});
  ASSERT_TRUE(boot.sigma_dist && jac.sigma_dist);
  EXPECT_NEAR(*boot.sigma_dist / *jac.sigma_dist, 1.0, 0.35);
  EXPECT_NEAR(*boot.sigma_phase / *jac.sigma_phase, 1.0, 0.35);
  EXPECT_NEAR(*boot.sigma_mix / *jac.sigma_mix, 1.0, 0.35);
}

TEST(experiment, twin_run) {
  const DecoherenceParams p{0.8, 1.0, 0.9};
  const auto run = diagnose_run(simulate(kTwoTwo, p, 100000, 4), kTwoTwo, 3.0);
  ASSERT_EQ(run.diagnosis.identifiability, Identifiability::Unique);
  EXPECT_LE(std::abs(*run.diagnosis.gamma_dist - 0.8), 3 * *run.sigma_dist);
  EXPECT_LE(std::abs(*run.diagnosis.gamma_mix - 0.9), 3 * *run.sigma_mix);
  EXPECT_FALSE(run.sigma_phase.has_value());
}

TEST(experiment, full_decoherence_is_flagged) {
  const std::vector<DecoherenceParams> cases{{0.7, 0.0, 0.7}, {0.0, 0.6, 0.7}, {0.7, 0.6, 0.0}};
  for (const auto& p : cases) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto run = diagnose_run(simulate(kTwoOne, p, 100000, seed), kTwoOne, 3.0);
      EXPECT_EQ(run.diagnosis.identifiability, Identifiability::DegenerateFullDecoherence)
          << p.gamma_dist << "," << p.gamma_phase << "," << p.gamma_mix << " seed " << seed;
    }
  }
}

// RMS error over 50 seeds per shot count; each tenfold increase in shots
// should shrink it by sqrt(10) up to a factor two.
TEST(experiment, consistency_scaling) {
  std::vector<double> rms;
  for (std::int64_t shots : {1000, 10000, 100000, 1000000}) {
    double sq = 0.0;
    int used = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const auto r = diagnose_run(simulate(kTwoOne, kFigure, shots, seed), kTwoOne, 3.0).diagnosis;
      if (!r.gamma_dist || !r.gamma_phase || !r.gamma_mix) continue;
      sq += std::pow(*r.gamma_dist - 0.7, 2) + std::pow(*r.gamma_phase - 0.6, 2) +
            std::pow(*r.gamma_mix - 0.7, 2);
      ++used;
    }
    ASSERT_GE(used, 40) << shots;
    rms.push_back(std::sqrt(sq / (3 * used)));
  }
  for (std::size_t i = 1; i < rms.size(); ++i) {
    EXPECT_LT(rms[i], rms[i - 1]);
    const double ratio = rms[i - 1] / rms[i];
    EXPECT_GT(ratio, std::sqrt(10.0) / 2);
    EXPECT_LT(ratio, std::sqrt(10.0) * 2);
  }
}

TEST(experiment, one_sigma_coverage) {
  std::array<int, 3> covered{};
  constexpr int runs = 200;
  for (std::uint64_t seed = 1; seed <= runs; ++seed) {
    const auto run = diagnose_run(simulate(kTwoOne, kFigure, 100000, 1000 + seed), kTwoOne, 3.0);
    ASSERT_EQ(run.diagnosis.identifiability, Identifiability::Unique);
    covered[0] += std::abs(*run.diagnosis.gamma_dist - 0.7) <= *run.sigma_dist;
    covered[1] += std::abs(*run.diagnosis.gamma_phase - 0.6) <= *run.sigma_phase;
    covered[2] += std::abs(*run.diagnosis.gamma_mix - 0.7) <= *run.sigma_mix;
  }
  for (int c : covered) {
    EXPECT_GE(c, 0.58 * runs);
    EXPECT_LE(c, 0.78 * runs);
  }
}
