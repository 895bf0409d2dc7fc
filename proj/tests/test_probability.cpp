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

#include "fockdiag/probability.hpp"

#include <cmath>
#include <numbers>

#include "gtest/gtest.h"

#include "fockdiag/decoherence.hpp"
#include "fockdiag/oracle.hpp"
#include "test_util.hpp"

using namespace fockdiag;
using std::numbers::pi;

namespace {

AsppTable unit_table(const InputState& s) { return aspp_table_from_params({1, 1, 1}, s); }

AsppTable zero_table(const InputState& s) {
  AsppTable t;
  for (const auto& key : required_aspps(s)) {
    if (key.m != 0 || key.k != 0) t.set(key.m, key.k, 0.0);
  }
  return t;
}

}  // namespace

TEST(probability, single_particle_fringe) {
  const auto s = InputState::double_fock(1, 0);
  for (double eta : phase_grid(16)) {
    EXPECT_NEAR(event_probability(s, 1, eta, unit_table(s)), (1 + std::sin(eta)) / 2, 1e-15);
  }
  const auto d = outcome_distribution(s, pi / 2, unit_table(s));
  EXPECT_NEAR(d.probs[0], 0.0, 1e-15);
  EXPECT_NEAR(d.probs[1], 1.0, 1e-15);
}

TEST(probability, twin_perfect_interference) {
  const auto s = InputState::twin_fock(2);
  EXPECT_NEAR(event_probability(s, 1, 0.3, unit_table(s)), 0.0, 1e-15);
}

TEST(probability, bunching_channel_at_zero_phase) {
  const auto s = InputState::double_fock(2, 1);
  for (double a : {0.0, 0.25, 0.49, 1.0}) {
    AsppTable t;
    t.set(1, 0, a);
    t.set(0, 1, 0.3);
    t.set(1, 1, 0.2);
    EXPECT_NEAR(event_probability(s, 0, 0.0, t), 1.0 / 8 + a / 4, 1e-15);
  }
}

TEST(probability, classical_limits) {
  const auto s = InputState::twin_fock(2);
  const auto d = outcome_distribution(s, 1.0, zero_table(s));
  const std::vector<double> want{1.0 / 16, 0.25, 3.0 / 8, 0.25, 1.0 / 16};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(d.probs[i], want[i], 1e-15);
  EXPECT_DOUBLE_EQ(classical_distribution(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(classical_distribution(4, 2), 3.0 / 8);
  EXPECT_DOUBLE_EQ(classical_distribution(3, 3), 1.0 / 8);
  EXPECT_THROW(classical_distribution(3, 4), DomainError);
}

// The closed form gives P(0,3) = 3/8 (1 - sin eta) and P(2,1) = 3/8 (1 + sin eta)
// here; the ordering [0, 1/4, 0, 3/4] is what both evaluation paths agree on.
TEST(probability, two_one_unit_quarter_turn) {
  const auto s = InputState::double_fock(2, 1);
  const auto d = outcome_distribution(s, pi / 2, unit_table(s));
  const auto brute = oracle_decohered_distribution(s, 1.0, {1, 1, 1}, pi / 2);
  const std::vector<double> want{0.0, 0.25, 0.0, 0.75};
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_NEAR(d.probs[i], want[i], 1e-15);
    EXPECT_NEAR(brute.probs[i], want[i], 1e-14);
  }
}

TEST(probability, missing_entry) {
  const auto s = InputState::double_fock(2, 1);
  AsppTable t;
  t.set(1, 0, 0.5);
  t.set(1, 1, 0.2);
  try {
    event_probability(s, 1, 0.0, t);
    FAIL();
  } catch (const MissingAsppError& e) {
    EXPECT_EQ(e.code(), "missing_aspp");
    EXPECT_NE(std::string(e.what()).find("m=0, k=1"), std::string::npos) << e.what();
  }
}

TEST(probability, negative_values_rejected) {
  const auto s = InputState::twin_fock(2);
  AsppTable t;
  t.set(1, 0, 1.0);
  t.set(2, 0, 0.0);
  EXPECT_NEAR(event_polynomial(s, 2, 0.0, t), -1.0 / 8, 1e-15);
  EXPECT_THROW(event_probability(s, 2, 0.0, t), ContractError);
  EXPECT_THROW(t.set(1, 0, 1.5), DomainError);
}

// Random tables need not correspond to any ensemble, so the polynomial may
// leave [0,1]; the structural identities hold regardless.
TEST(probability, normalization_random_tables) {
  std::mt19937_64 rng(11);
  const auto etas = phase_grid(16);
  for (const auto& s : fixtures::states_up_to(10)) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto t = fixtures::random_table(s, rng);
      for (double eta : etas) {
        double sum = 0.0;
        for (int s1 = 0; s1 <= s.total(); ++s1) sum += event_polynomial(s, s1, eta, t);
        ASSERT_NEAR(sum, 1.0, 1e-12) << s.label();
      }
    }
  }
}

TEST(probability, mirror_symmetry) {
  std::mt19937_64 rng(12);
  for (const auto& s : fixtures::states_up_to(10)) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto t = fixtures::random_table(s, rng);
      for (double eta : phase_grid(7)) {
        for (int s1 = 0; s1 <= s.total(); ++s1) {
          ASSERT_NEAR(event_polynomial(s, s1, eta, t),
                      event_polynomial(s, s.total() - s1, eta + pi, t), 1e-12)
              << s.label() << " s1=" << s1;
        }
      }
    }
  }
}

// |N:0>: P = binom(N,s1)/2^N [1 + (-1)^s1 {<>^N} Re((i e^{i eta})^N)].
TEST(probability, noon_reduction) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 1; n <= 8; ++n) {
    const auto s = InputState::double_fock(n, 0);
    const double g = u(rng);
    AsppTable t;
    t.set(0, n, g);
    for (double eta : phase_grid(9)) {
      for (int s1 = 0; s1 <= n; ++s1) {
        const double want = classical_distribution(n, s1) *
                            (1.0 + (s1 % 2 == 0 ? 1 : -1) * g * phase_factor(n, eta));
        EXPECT_NEAR(event_probability(s, s1, eta, t), want, 1e-14);
      }
    }
  }
}

TEST(probability, phase_factor_quadrants) {
  for (int d = 0; d <= 7; ++d) {
    for (double eta : phase_grid(5)) {
      const auto z = std::pow(std::complex<double>(0, 1) * std::polar(1.0, eta), d);
      EXPECT_NEAR(phase_factor(d, eta), z.real(), 1e-13);
    }
  }
}

TEST(probability, twin_phase_independence) {
  std::mt19937_64 rng(14);
  for (int n = 1; n <= 5; ++n) {
    const auto s = InputState::twin_fock(n);
    const auto t = fixtures::random_table(s, rng);
    for (int s1 = 0; s1 <= s.total(); ++s1) {
      const double base = event_polynomial(s, s1, 0.0, t);
      for (double eta : phase_grid(11)) EXPECT_EQ(event_polynomial(s, s1, eta, t), base);
    }
  }
}

TEST(probability, oracle_equivalence_pure) {
  const auto etas = phase_grid(8);
  for (const auto& s : fixtures::states_up_to(8)) {
    for (double g : {0.0, 0.3, 0.7, 1.0}) {
      const DecoherenceParams p{g, 1.0, 1.0};
      const OracleEvaluator oracle(s, decohered_system(s, g, p));
      const auto table = aspp_table_from_params(p, s);
      for (double eta : etas) {
        const auto a = oracle.distribution(eta);
        const auto b = outcome_distribution(s, eta, table);
        for (std::size_t i = 0; i < a.probs.size(); ++i) {
          ASSERT_NEAR(a.probs[i], b.probs[i], 1e-10) << s.label() << " g=" << g;
        }
      }
    }
  }
}
