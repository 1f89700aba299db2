// Copyright 2026 The scatterer Authors
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

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "scatterer/lattice_sums.hpp"

namespace scatterer {
namespace {

// c0 for Z^2, 28 digits from an independent arbitrary-precision evaluation.
constexpr double kSquareC0 = 4.7968257510574039921719768715;

// Sum of f(|xi|^2) over |m|, |n| <= K plus (pi/2 + 1)/h^2 times the 1/|xi|^4
// coefficient, which is the box tail to leading order.
template <class F>
double box_sum(const LatticeSpec& spec, std::int64_t K, F&& f, double inv4_coeff) {
  double s = 0.0;
  for (std::int64_t m = -K; m <= K; ++m) {
    for (std::int64_t n = -K; n <= K; ++n) s += f(spec.norm(m, n));
  }
  const double h = static_cast<double>(K) + 0.5;
  return s + inv4_coeff * (std::numbers::pi / 2.0 + 1.0) / (h * h);
}

template <class F>
double disk_sum(const LatticeSpec& spec, double lo, double hi, F&& f) {
  double s = 0.0;
  const std::int64_t mb = spec.m_bound(hi), nb = spec.n_bound(hi);
  for (std::int64_t m = -mb; m <= mb; ++m) {
    for (std::int64_t n = -nb; n <= nb; ++n) {
      const double v = spec.norm(m, n);
      if (v > lo && v <= hi) s += f(v);
    }
  }
  return s;
}

TEST(LatticeC0, SquareMatchesReference) { EXPECT_NEAR(lattice_c0(LatticeSpec::square()), kSquareC0, 1e-13); }

TEST(LatticeC0, SquareMatchesBoxSum) {
  const double bf = box_sum(LatticeSpec::square(), 2000, [](double v) { return 1.0 / (v * v + 1.0); }, 1.0);
  EXPECT_NEAR(lattice_c0(LatticeSpec::square()), bf, 1e-8);
  EXPECT_GE(lattice_c0(LatticeSpec::square()), 1.0 + 4.0 / 2.0 + 4.0 / 5.0);
}

TEST(LatticeC0, OtherLatticesMatchDiskSum) {
  for (const char* l : {"2/1", "1/3", "irrational:1.7320508075688772"}) {
    const auto spec = LatticeSpec::parse(l);
    const double R = 4e5;
    // outside the disk, 1/|xi|^4 integrates to pi/R over unit covolume
    const double bf = disk_sum(spec, -1.0, R, [](double v) { return 1.0 / (v * v + 1.0); }) + std::numbers::pi / R;
    EXPECT_NEAR(lattice_c0(spec), bf, 1e-7) << l;
  }
}

TEST(LatticeTailSum, RequiresBalancedWeights) {
  const std::array<Pole, 1> p = {Pole{2.0, 1.0}};
  EXPECT_THROW(lattice_tail_sum(LatticeSpec::square(), 10, p), DomainError);
}

TEST(SpectralTail, SplitRadiiAgree) {
  for (const char* l : {"1/1", "5/2", "irrational:0.8"}) {
    const auto spec = LatticeSpec::parse(l);
    for (double lambda : {0.3, 17.5, 420.25}) {
      const double R1 = lambda + 40, R2 = 3 * lambda + 500;
      const double between = disk_sum(spec, R1, R2, [&](double v) { return 1.0 / (v - lambda) - v / (v * v + 1.0); });
      const double a = spectral_tail(spec, R1, lambda);
      const double b = spectral_tail(spec, R2, lambda) + between;
      EXPECT_NEAR(a, b, 1e-11 * (1.0 + std::abs(a))) << l << ' ' << lambda;
    }
  }
}

TEST(SpectralTail, LargeRadiusMatchesIntegral) {
  const auto spec = LatticeSpec::square();
  const double lambda = 3.0, R = 1e6;
  // sum (1 + lambda v)/((v - lambda)(v^2 + 1)) ~ lambda sum 1/v^2 ~ lambda pi / R
  EXPECT_NEAR(spectral_tail(spec, R, lambda), lambda * std::numbers::pi / R, 1e-9);
}

TEST(InverseSquareTail, MatchesDirectSumAndDerivative) {
  for (const char* l : {"1/1", "3/2", "irrational:1.1"}) {
    const auto spec = LatticeSpec::parse(l);
    for (double lambda : {2.5, 88.0}) {
      const double R1 = lambda + 30, R2 = 4 * lambda + 400;
      const double between = disk_sum(spec, R1, R2, [&](double v) { return 1.0 / ((v - lambda) * (v - lambda)); });
      const double a = inverse_square_tail(spec, R1, lambda);
      EXPECT_NEAR(a, inverse_square_tail(spec, R2, lambda) + between, 1e-12 * a) << l;
      const double h = 1e-4;
      const double fd = (spectral_tail(spec, R1, lambda + h) - spectral_tail(spec, R1, lambda - h)) / (2 * h);
      EXPECT_NEAR(a, fd, 1e-6 * a) << l;
    }
  }
}

TEST(HalfRowTail, MatchesDirectSum) {
  for (double s2 : {0.25, 9.0, 1e4}) {
    long double direct = 0.0L;
    for (std::int64_t n = 20000000 - 1; n >= 3; --n) direct += 1.0L / (static_cast<long double>(n) * n + s2);
    const long double tail = 1.0L / 20000000.0L;
    EXPECT_NEAR(detail::half_row_tail(3, s2).real(), static_cast<double>(direct + tail), 1e-14);
  }
}

TEST(FullRow, MatchesCoth) {
  for (double s : {0.1, 1.0, 7.0, 30.0}) {
    const double want = std::numbers::pi / std::tanh(std::numbers::pi * s) / s;
    EXPECT_NEAR(detail::full_row(s * s).real(), want, 1e-14 * want);
  }
}

}  // namespace
}  // namespace scatterer
