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
#include <sstream>

#include "scatterer/sieves.hpp"

namespace scatterer {
namespace {

class SquareSieves : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    large_ = new PerturbedSpectrum(perturbed_spectrum(LatticeSpec::square(), SpectralParams{}, 1e5));
    small_ = new PerturbedSpectrum(perturbed_spectrum(LatticeSpec::square(), SpectralParams{}, 1e4));
  }
  static void TearDownTestSuite() {
    delete large_;
    delete small_;
  }

  static PerturbedSpectrum* large_;
  static PerturbedSpectrum* small_;
  LatticeSpec spec = LatticeSpec::square();
  SieveParams params;
};

PerturbedSpectrum* SquareSieves::large_ = nullptr;
PerturbedSpectrum* SquareSieves::small_ = nullptr;

TEST(Strip, Membership) {
  const auto spec = LatticeSpec::square();
  const auto z = spec.vector(1, 0);
  for (double d : {0.16, 0.17, 0.18}) EXPECT_TRUE(s_zeta_membership(spec, spec.vector(0, 5), z, d));
  EXPECT_FALSE(s_zeta_membership(spec, spec.vector(3, 4), z, 0.17));
  for (const auto& zeta : {spec.vector(2, 0), spec.vector(1, 1), spec.vector(3, -2)}) {
    EXPECT_FALSE(s_zeta_membership(spec, zeta, zeta, 0.17));
  }
  EXPECT_THROW(s_zeta_membership(spec, z, spec.vector(0, 0), 0.17), DomainError);
}

TEST(Strip, DeltaWindow) {
  SieveParams p;
  EXPECT_NEAR(p.delta_min(), 0.15745, 1e-5);
  EXPECT_NEAR(p.delta_max(), 0.18510, 1e-5);
  EXPECT_NO_THROW(p.validate());
  for (double bad : {0.5, 0.15, 0.19}) {
    p.delta = bad;
    EXPECT_THROW(p.validate(), DomainError) << bad;
  }
  p.delta = 0.17;
  p.theta = 0.34;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(Strip, CountMatchesBruteForce) {
  for (const char* l : {"1/1", "3/2"}) {
    const auto spec = LatticeSpec::parse(l);
    for (const auto& zeta : {spec.vector(1, 0), spec.vector(2, 3)}) {
      const double X = 3000, delta = 0.17;
      std::int64_t bf = 0;
      for (std::int64_t m = -80; m <= 80; ++m) {
        for (std::int64_t n = -80; n <= 80; ++n) {
          const auto eta = spec.vector(m, n);
          if ((m || n) && eta.norm_sq <= X && std::abs(spec.inner(eta, zeta)) <= std::pow(eta.norm_sq, delta)) ++bf;
        }
      }
      EXPECT_EQ(s_zeta_count(spec, zeta, delta, X).count, bf) << l;
    }
  }
}

TEST(Strip, CountEdgeCasesAndScaling) {
  const auto spec = LatticeSpec::square();
  EXPECT_EQ(s_zeta_count(spec, spec.vector(1, 0), 0.17, 0.5).count, 0);
  for (double X : {1e3, 1e4}) {
    EXPECT_LE(s_zeta_count(spec, spec.vector(2, 0), 0.17, X).count, s_zeta_count(spec, spec.vector(1, 0), 0.17, X).count);
  }
  std::vector<double> ratios;
  for (double X : {1e3, 1e4, 1e5}) ratios.push_back(s_zeta_count(spec, spec.vector(1, 0), 0.17, X).bound_ratio);
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_GT(*lo, 0.0);
  EXPECT_LT(*hi / *lo, 2.0);
}

TEST(Strip, Representatives) {
  const auto spec = LatticeSpec::square();
  const auto one = zeta_representatives(spec, 1);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0], spec.vector(0, 1));
  EXPECT_EQ(one[1], spec.vector(1, 0));
  EXPECT_EQ(zeta_representatives(spec, 2).size(), 5u);
  EXPECT_EQ(zeta_representatives(LatticeSpec::rational(4, 1), 1).size(), 1u);
}

TEST_F(SquareSieves, GapFilterLimits) {
  const auto all = lambda_g_filter(*small_, 1.0);
  EXPECT_EQ(all.density, 1.0);
  const auto unit = lambda_g_filter(*small_, 0.0);
  for (std::size_t i = 0; i < unit.entries.size(); ++i) {
    const auto& e = small_->entries[i];
    EXPECT_EQ(unit.entries[i].kept, e.upper - e.lower <= 1.0);
  }
  EXPECT_THROW(lambda_g_filter(*small_, -0.1), DomainError);
}

TEST_F(SquareSieves, GapFilterDensityGrows) {
  const auto g = lambda_g_filter(*small_, 0.25);
  const auto density_upto = [&](double x) {
    double n = 0, k = 0;
    for (const auto& e : g.entries) {
      if (e.lambda <= x) ++n, k += e.kept;
    }
    return k / n;
  };
  EXPECT_GE(density_upto(1e4), density_upto(1e3));
  for (std::size_t i = 0; i < g.entries.size(); ++i) EXPECT_TRUE(recheck_gap(*small_, g.entries[i], i, 0.25));
}

TEST_F(SquareSieves, StripWitnessesRecheck) {
  for (const auto& zeta : {spec.vector(1, 0), spec.vector(1, 1)}) {
    const auto r = lambda_zeta_filter(*small_, zeta, params);
    for (const auto& e : r.entries) {
      if (e.kept) {
        EXPECT_TRUE(recheck_kept(spec, e.lambda, zeta, params.delta)) << e.lambda;
      } else {
        EXPECT_TRUE(recheck_vector_witness(spec, e, params.delta)) << e.lambda;
      }
    }
  }
}

TEST_F(SquareSieves, StripFilterReflectionSymmetric) {
  const auto a = lambda_zeta_filter(*small_, spec.vector(1, 1), params);
  const auto b = lambda_zeta_filter(*small_, spec.vector(1, -1), params);
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].kept, b.entries[i].kept);
}

TEST_F(SquareSieves, WiderDeltaOnlyExcludesMore) {
  SieveParams narrow = params, wide = params;
  narrow.delta = 0.16;
  wide.delta = 0.18;
  for (const auto& zeta : {spec.vector(1, 0), spec.vector(2, 1)}) {
    const auto a = lambda_zeta_filter(*small_, zeta, narrow);
    const auto b = lambda_zeta_filter(*small_, zeta, wide);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      if (b.entries[i].kept) {
        EXPECT_TRUE(a.entries[i].kept) << a.entries[i].lambda;
      }
    }
    EXPECT_LT(b.kept, a.kept);
  }
}

TEST_F(SquareSieves, StripDensityGrowsOverDyadicWindows) {
  for (const auto& zeta : {spec.vector(1, 0), spec.vector(1, 1)}) {
    const auto r = lambda_zeta_filter(*large_, zeta, params);
    EXPECT_LT(r.excluded_exponent, 1.0);
    EXPECT_GT(r.excluded_exponent, 0.0);
    double prev = 0.0;
    for (const auto& w : r.windows) {
      if (w.lo < 256) continue;
      EXPECT_GE(w.density(), prev) << w.lo;
      prev = w.density();
    }
    EXPECT_GT(r.windows.back().density(), 0.85);
  }
}

TEST_F(SquareSieves, IntersectionsNest) {
  std::vector<SieveReport> reports;
  for (double J : {1.0, 2.0, 3.0}) reports.push_back(lambda_J_intersection(*small_, J, params));
  for (std::size_t j = 1; j < reports.size(); ++j) {
    for (std::size_t i = 0; i < small_->entries.size(); ++i) {
      if (reports[j].entries[i].kept) {
        EXPECT_TRUE(reports[j - 1].entries[i].kept);
      }
    }
    EXPECT_LT(reports[j].density, reports[j - 1].density);
  }
  EXPECT_THROW(lambda_J_intersection(*small_, 0.5, params), DomainError);
}

TEST_F(SquareSieves, IntersectionOfFiltersEqualsJ) {
  const auto J = lambda_J_intersection(*small_, 1.0, params);
  const auto g = lambda_g_filter(*small_, params.epsilon_gap);
  const auto a = lambda_zeta_filter(*small_, spec.vector(1, 0), params);
  const auto b = lambda_zeta_filter(*small_, spec.vector(0, 1), params);
  for (std::size_t i = 0; i < J.entries.size(); ++i) {
    EXPECT_EQ(J.entries[i].kept, g.entries[i].kept && a.entries[i].kept && b.entries[i].kept);
  }
}

TEST(Intersection, SingleOrbitEqualsPairOfFilters) {
  const auto spec = LatticeSpec::rational(4, 1);
  const auto s = perturbed_spectrum(spec, SpectralParams{}, 3000);
  const SieveParams p;
  const auto J = lambda_J_intersection(s, 1.0, p);
  const auto g = lambda_g_filter(s, p.epsilon_gap);
  const auto z = lambda_zeta_filter(s, spec.vector(0, 1), p);
  for (std::size_t i = 0; i < J.entries.size(); ++i) EXPECT_EQ(J.entries[i].kept, g.entries[i].kept && z.entries[i].kept);
}

TEST_F(SquareSieves, Outputs) {
  const auto r = lambda_J_intersection(*small_, 2.0, params);
  std::ostringstream os;
  write_sieve_csv(os, r);
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,kept,witness_m,witness_n,witness_norm");
  std::size_t gap_rows = 0, vector_rows = 0;
  for (const auto& e : r.entries) {
    gap_rows += e.witness.kind == WitnessKind::gap;
    vector_rows += e.witness.kind == WitnessKind::vector;
  }
  EXPECT_GT(gap_rows, 0u);
  EXPECT_GT(vector_rows, 0u);
  const auto j = sieve_summary(r);
  EXPECT_EQ(j["total"].get<std::size_t>(), r.total);
  EXPECT_EQ(j["kept"].get<std::size_t>() + j["excluded"].get<std::size_t>(), r.total);
  EXPECT_EQ(j["windows"].size(), r.windows.size());
}

TEST(Sieve, RejectsZeroZeta) {
  const auto s = perturbed_spectrum(LatticeSpec::square(), SpectralParams{}, 100);
  EXPECT_THROW(lambda_zeta_filter(s, LatticeSpec::square().vector(0, 0), SieveParams{}), DomainError);
}

}  // namespace
}  // namespace scatterer
