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

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "quadrature_oracle.hpp"
#include "scatterer/greens.hpp"
#include "scatterer/sieves.hpp"
#include "scatterer/spectral.hpp"

namespace scatterer {
namespace {

using testing::quadrature_matrix_element;

class SquareSpectrum : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    spectrum_ = new PerturbedSpectrum(perturbed_spectrum(LatticeSpec::square(), SpectralParams{}, 1e4));
  }
  static void TearDownTestSuite() { delete spectrum_; }

  static double lambda(std::size_t i) { return spectrum_->entries[i].lambda; }

  static PerturbedSpectrum* spectrum_;
  LatticeSpec spec = LatticeSpec::square();
};

PerturbedSpectrum* SquareSpectrum::spectrum_ = nullptr;

TEST_F(SquareSpectrum, NormLowerBoundFromNearestShell) {
  const GreensContext ctx(spec, lambda(0));
  const double n2 = green_norm_sq(ctx, 1e-10);
  EXPECT_GE(n2, 4.0 / ((lambda(0) - 1) * (lambda(0) - 1)) / kSixteenPi4);
  EXPECT_NEAR(n2, green_norm_sq(ctx, 1e-6), 2e-6 * n2);
}

TEST_F(SquareSpectrum, CoefficientSumMatchesBoxSum) {
  for (double lam : {lambda(0), 50.5, lambda(400)}) {
    const GreensContext ctx(spec, lam);
    double s = 0.0;
    const std::int64_t K = 1500;
    for (std::int64_t m = -K; m <= K; ++m) {
      for (std::int64_t n = -K; n <= K; ++n) {
        const double c = ctx.coeff(m, n);
        s += c * c;
      }
    }
    const double h = K + 0.5;
    s += (std::numbers::pi / 2 + 1) / (h * h);
    EXPECT_NEAR(green_coeff_sq_sum(ctx), s, 1e-10 * s) << lam;
  }
}

TEST_F(SquareSpectrum, NormsAlongGapFilterDominateNearestTerm) {
  const auto g = lambda_g_filter(*spectrum_, 0.25);
  for (std::size_t i = 0; i < g.entries.size(); i += 7) {
    if (!g.entries[i].kept) continue;
    const auto& e = spectrum_->entries[i];
    const GreensContext ctx(spec, e.lambda);
    const double d = std::min(e.lambda - e.lower, e.upper - e.lambda);
    EXPECT_GE(green_norm_sq(ctx, 1e-10), 1.0 / (d * d) / kSixteenPi4);
  }
}

TEST(GreensContext, RejectsPolesAndNonPositive) {
  EXPECT_THROW(GreensContext(LatticeSpec::square(), 25.0), PoleError);
  EXPECT_THROW(GreensContext(LatticeSpec::square(), 0.0), DomainError);
  EXPECT_NO_THROW(GreensContext(LatticeSpec::square(), 25.5));
}

TEST_F(SquareSpectrum, TruncationAtFirstEigenvalue) {
  const double lam = lambda(0);
  const auto t = truncate(GreensContext(spec, lam), 2.0);
  std::set<double> norms;
  for (std::size_t i = 0; i < t.vectors.size(); ++i) {
    norms.insert(t.vectors[i].norm_sq);
    EXPECT_DOUBLE_EQ(t.coeffs[i], 1.0 / (t.vectors[i].norm_sq - lam));
  }
  // the open annulus (lambda - 2, lambda + 2) reaches below 0
  EXPECT_EQ(norms, (std::set<double>{0, 1, 2}));
  EXPECT_EQ(t.vectors.size(), 9u);
  double s = 0.0;
  for (double c : t.coeffs) s += c * c;
  EXPECT_NEAR(t.norm_sq_trunc, s / kSixteenPi4, 1e-16);
}

TEST_F(SquareSpectrum, DefectSmallWhenAnnulusCoversBulk) {
  for (std::size_t i = 0; i < spectrum_->entries.size(); i += 50) {
    if (lambda(i) < 100) continue;
    EXPECT_LT(truncation_error(GreensContext(spec, lambda(i)), lambda(i)).defect, 0.1) << lambda(i);
  }
}

TEST_F(SquareSpectrum, DefectIsTailMassFraction) {
  for (std::size_t i : {0u, 3u, 60u}) {
    const double lam = lambda(i), L = lam + 1e-9;
    const GreensContext ctx(spec, lam);
    double inside = 0.0, all = 0.0;
    const std::int64_t K = 1500;
    for (std::int64_t m = -K; m <= K; ++m) {
      for (std::int64_t n = -K; n <= K; ++n) {
        const double v = static_cast<double>(m * m + n * n);
        const double c2 = 1.0 / ((v - lam) * (v - lam));
        all += c2;
        if (std::abs(v - lam) < L) inside += c2;
      }
    }
    all += (std::numbers::pi / 2 + 1) / ((K + 0.5) * (K + 0.5));
    EXPECT_NEAR(truncation_error(ctx, L).defect, std::sqrt(1.0 - inside / all), 1e-9) << lam;
  }
}

TEST_F(SquareSpectrum, EmptyAnnulusHasDefectOne) {
  const GreensContext ctx(spec, lambda(0));
  const auto t = truncate(ctx, 1e-3);
  EXPECT_TRUE(t.empty());
  EXPECT_EQ(truncation_error(ctx, 1e-3).defect, 1.0);
  EXPECT_EQ(matrix_element(t, spec.vector(1, 0)), std::complex<double>(0.0));
  EXPECT_THROW(truncate(ctx, 0.0), DomainError);
}

TEST_F(SquareSpectrum, DefectDecaysAlongGapFilter) {
  const auto g = lambda_g_filter(*spectrum_, 0.25);
  const auto median_defect = [&](double lo) {
    std::vector<double> d;
    for (std::size_t i = 0; i < g.entries.size(); ++i) {
      const double lam = lambda(i);
      if (g.entries[i].kept && lam >= lo && lam < 2 * lo) {
        d.push_back(truncation_error(GreensContext(spec, lam), std::pow(lam, 0.4)).defect);
      }
    }
    std::sort(d.begin(), d.end());
    return d[d.size() / 2];
  };
  EXPECT_GT(median_defect(256), median_defect(4096));
}

TEST_F(SquareSpectrum, ZeroFrequencyIsOne) {
  for (std::size_t i : {0u, 10u, 500u}) {
    const GreensContext ctx(spec, lambda(i), {0.3, 0.7});
    EXPECT_EQ(matrix_element(ctx, Cutoff::full(), spec.vector(0, 0)), std::complex<double>(1.0));
    EXPECT_EQ(matrix_element(truncate(ctx, 5.0), spec.vector(0, 0)), std::complex<double>(1.0));
  }
}

TEST_F(SquareSpectrum, MatrixElementsBoundedByOne) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> pick(0, spectrum_->entries.size() - 1);
  std::uniform_int_distribution<int> z(-3, 3);
  std::uniform_real_distribution<double> Lexp(0.1, 0.6), x(0.0, 2 * std::numbers::pi);
  for (int c = 0; c < 200; ++c) {
    const double lam = lambda(pick(rng));
    const GreensContext ctx(spec, lam, {x(rng), x(rng)});
    const auto zeta = spec.vector(z(rng), z(rng));
    const auto t = truncate(ctx, std::pow(lam, Lexp(rng)));
    EXPECT_LE(std::abs(matrix_element(t, zeta)), 1.0 + 1e-12);
    EXPECT_LE(std::abs(matrix_element(ctx, Cutoff::full(), zeta)), 1.0 + 1e-12);
  }
}

TEST_F(SquareSpectrum, BasePointShiftOnlyRotatesPhase) {
  const auto zeta = spec.vector(2, -1);
  for (std::size_t i : {0u, 30u, 700u}) {
    const TorusPoint a{0.0, 0.0}, b{1.3, -0.4};
    const GreensContext ca(spec, lambda(i), a), cb(spec, lambda(i), b);
    for (std::optional<double> L : {std::optional<double>{}, std::optional<double>{6.0}}) {
      const Cutoff cut = L ? Cutoff::annulus(*L) : Cutoff::full();
      const auto va = matrix_element(ca, cut, zeta), vb = matrix_element(cb, cut, zeta);
      EXPECT_NEAR(std::abs(va), std::abs(vb), 1e-12);
      const auto rotated = va * std::polar(1.0, cb.pairing(zeta.m, zeta.n, b) - ca.pairing(zeta.m, zeta.n, a));
      EXPECT_NEAR(std::abs(rotated - vb), 0.0, 1e-12);
    }
  }
}

TEST_F(SquareSpectrum, FullModeMatchesQuadratureOracle) {
  const std::pair<int, int> zetas[] = {{1, 0}, {1, 1}, {0, 1}, {2, 1}, {1, 0}};
  for (std::size_t k = 0; k < 5; ++k) {
    const GreensContext ctx(spec, lambda(k));
    const auto zeta = spec.vector(zetas[k].first, zetas[k].second);
    EXPECT_NEAR(std::abs(matrix_element(ctx, Cutoff::full(), zeta) - quadrature_matrix_element(ctx, zeta, 2048)), 0.0,
                1e-6)
        << k;
  }
  const GreensContext shifted(spec, lambda(2), {0.3, 1.1});
  const auto zeta = spec.vector(1, 2);
  EXPECT_NEAR(
      std::abs(matrix_element(shifted, Cutoff::full(), zeta) - quadrature_matrix_element(shifted, zeta, 2048)), 0.0,
      1e-6);
}

TEST_F(SquareSpectrum, QuadratureGapAtCoarseGridIsBoxTruncation) {
  // The N-point oracle keeps |m|, |n| < N/2, so its distance to the full
  // expansion falls like 1/N^2.
  const GreensContext ctx(spec, lambda(0));
  const auto zeta = spec.vector(1, 0);
  const auto full = matrix_element(ctx, Cutoff::full(), zeta);
  const double d512 = std::abs(full - quadrature_matrix_element(ctx, zeta, 512));
  const double d1024 = std::abs(full - quadrature_matrix_element(ctx, zeta, 1024));
  EXPECT_NEAR(d512 / d1024, 4.0, 0.1);
}

TEST_F(SquareSpectrum, FullIsLimitOfTruncations) {
  const double lam = lambda(20);
  const GreensContext ctx(spec, lam);
  const auto zeta = spec.vector(1, 1);
  const auto full = matrix_element(ctx, Cutoff::full(), zeta);
  double prev = 1e9;
  for (double L = 64; L <= 8192; L *= 2) {
    const double d = std::abs(matrix_element(ctx, Cutoff::annulus(L), zeta) - full);
    EXPECT_LT(d, prev) << L;
    prev = d;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST_F(SquareSpectrum, TruncatedMatchesQuadrature) {
  const GreensContext ctx(spec, lambda(15), {0.2, 0.9});
  const auto t = truncate(ctx, 8.0);
  const auto zeta = spec.vector(1, -2);
  const auto g = density_grid(t, 64);
  std::complex<double> q = 0.0;
  for (std::size_t i = 0; i < g.N; ++i) {
    for (std::size_t j = 0; j < g.N; ++j) {
      q += g.density[i * g.N + j] * std::polar(1.0, ctx.pairing(zeta.m, zeta.n, {g.x[i], g.y[j]}));
    }
  }
  q /= static_cast<double>(g.N * g.N);
  EXPECT_NEAR(std::abs(q - matrix_element(t, zeta)), 0.0, 1e-13);
}

TEST_F(SquareSpectrum, Observables) {
  const GreensContext ctx(spec, lambda(40), {0.5, 0.5});
  Observable one;
  one.coeffs[{0, 0}] = 1.0;
  EXPECT_EQ(observable_average(ctx, one, Cutoff::full()), std::complex<double>(1.0));
  Observable cosine;
  cosine.coeffs[{1, 2}] = 0.5;
  cosine.coeffs[{-1, -2}] = 0.5;
  EXPECT_TRUE(cosine.is_real());
  EXPECT_EQ(cosine.mean(), std::complex<double>(0.0));
  for (const Cutoff cut : {Cutoff::full(), Cutoff::annulus(10.0)}) {
    const auto v = observable_average(ctx, cosine, cut);
    EXPECT_LE(std::abs(v.imag()), 1e-10);
    EXPECT_LE(std::abs(v.real()), 1.0);
  }
}

TEST_F(SquareSpectrum, PointwiseValues) {
  const TorusPoint x0{0.7, 1.9};
  const auto t = truncate(GreensContext(spec, lambda(8), x0), 6.0);
  double sum = 0.0;
  for (double c : t.coeffs) sum += c;
  const auto at = eval_pointwise(t, x0);
  EXPECT_NEAR(at.real(), -sum / (4 * std::numbers::pi * std::numbers::pi), 1e-13);
  EXPECT_NEAR(at.imag(), 0.0, 1e-13);
  const TorusPoint x{2.1, 0.4}, mirror{2 * x0[0] - x[0], 2 * x0[1] - x[1]};
  EXPECT_NEAR(std::abs(eval_pointwise(t, mirror) - std::conj(eval_pointwise(t, x))), 0.0, 1e-13);
}

TEST_F(SquareSpectrum, DensityGridIntegratesToOne) {
  const auto t = truncate(GreensContext(spec, lambda(0)), 5.0);
  EXPECT_NEAR(density_grid(t, 256).mean(), 1.0, 1e-3);
  for (std::size_t i : {100u, 1500u}) {
    const auto tl = truncate(GreensContext(spec, lambda(i)), std::pow(lambda(i), 0.4));
    EXPECT_NEAR(density_grid(tl, 512).mean(), 1.0, 1e-3);
  }
}

TEST_F(SquareSpectrum, DensityGridMatchesPointwise) {
  const auto t = truncate(GreensContext(spec, lambda(12), {0.4, 2.2}), 7.0);
  const auto g = density_grid(t, 32);
  const double scale = 1.0 / (t.norm_sq_trunc * kSixteenPi4) * 16 * std::pow(std::numbers::pi, 4);
  for (std::size_t i : {0u, 5u, 31u}) {
    for (std::size_t j : {0u, 17u}) {
      const double direct = std::norm(eval_pointwise(t, {g.x[i], g.y[j]})) * scale;
      EXPECT_NEAR(g.density[i * g.N + j], direct, 1e-12 * (1 + direct));
    }
  }
}

TEST(MatrixCsv, FullModeLabel) {
  std::ostringstream os;
  write_matrix_csv(os, {{1.5, 1, 0, std::nullopt, {0.25, 0.0}}, {1.5, 1, 0, 2.0, {0.5, 0.0}}});
  EXPECT_EQ(os.str(),
            "lambda,zeta_m,zeta_n,L,re,im,abs\n1.5,1,0,full,0.25,0,0.25\n1.5,1,0,2,0.5,0,0.5\n");
}

}  // namespace
}  // namespace scatterer
