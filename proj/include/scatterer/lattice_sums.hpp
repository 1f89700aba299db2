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

// Convergent lattice sums over the exterior of a disk.
//
// Every regularized sum in the library has the shape
//
//   T(R) = sum_{xi : |xi|^2 > R}  sum_t  w_t / (|xi|^2 - z_t),   sum_t w_t = 0,
//
// for a handful of complex poles z_t. T is evaluated row by row (fixed m):
//
//   * a row lying entirely outside the disk is summed in closed form,
//       sum_{n in Z} 1/(n^2 + s^2) = pi coth(pi s) / s;
//   * a row cut by the disk is summed over n > n0 by Euler-Maclaurin, with the
//     integral and all derivatives of 1/(u^2 + s^2) in closed form;
//   * rows |m| > M are expanded in 1/m; each power sums to a Hurwitz zeta
//     value, and the O(1/m) term cancels because the weights sum to zero.
//
// The result is accurate to a few ulps of the row magnitudes, so the tail
// tolerances accepted by the callers are met with a wide margin.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "scatterer/errors.hpp"
#include "scatterer/lattice.hpp"

namespace scatterer {

using cplx = std::complex<double>;

struct Pole {
  cplx z;
  cplx weight;
};

namespace detail {

// B_{2k} / (2k)!, k = 1..7
inline constexpr std::array<double, 7> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
};

// Distance kept between the Euler-Maclaurin start point and any singularity.
inline constexpr double kEulerMaclaurinClearance = 12.0;

inline constexpr int kMaxDerivative = 2 * static_cast<int>(kBernoulliOverFactorial.size()) - 1;

/// Derivatives of order 0..kMaxDerivative of u -> 1/(u^2 + s2) at real u, from
/// (u^2 + s2) f = 1. Only s2 enters, so complex steps in s2 stay analytic.
inline std::array<cplx, kMaxDerivative + 1> lorentzian_derivatives(double u, cplx s2) {
  std::array<cplx, kMaxDerivative + 1> f{};
  const cplx g = u * u + s2;
  f[0] = 1.0 / g;
  f[1] = -2.0 * u * f[0] / g;
  for (int r = 2; r <= kMaxDerivative; ++r) {
    f[r] = -(2.0 * r * u * f[r - 1] + r * (r - 1.0) * f[r - 2]) / g;
  }
  return f;
}

/// sum_{n >= n1} 1/(n^2 + s2), n1 >= 1, with no singularity on the range.
inline cplx half_row_tail(std::int64_t n1, cplx s2) {
  const cplx s = std::sqrt(s2);
  const auto start = std::max<std::int64_t>(
      n1, static_cast<std::int64_t>(std::ceil(std::abs(s.imag()) + kEulerMaclaurinClearance)));
  cplx direct = 0.0;
  for (std::int64_t n = n1; n < start; ++n) {
    const double dn = static_cast<double>(n);
    direct += 1.0 / (dn * dn + s2);
  }
  const double N = static_cast<double>(start);
  const cplx w = s / N;
  cplx integral;
  if (std::abs(w) < 1e-4) {
    const cplx w2 = w * w;
    integral = (1.0 - w2 / 3.0 + w2 * w2 / 5.0) / N;
  } else {
    integral = std::atan(w) / s;
  }
  const auto f = lorentzian_derivatives(N, s2);
  cplx em = integral + 0.5 * f[0];
  for (std::size_t k = 0; k < kBernoulliOverFactorial.size(); ++k) em -= kBernoulliOverFactorial[k] * f[2 * k + 1];
  return direct + em;
}

/// sum_{n in Z} 1/(n^2 + s2) = pi coth(pi s)/s.
inline cplx full_row(cplx s2) {
  const cplx s = std::sqrt(s2);
  const double X = 2.0 * std::numbers::pi * s.real();
  const double Y = 2.0 * std::numbers::pi * s.imag();
  cplx coth;
  if (X > 40.0) {
    const cplx e = std::exp(-2.0 * std::numbers::pi * s);
    coth = (1.0 + e) / (1.0 - e);
  } else {
    // keeps tiny real parts of s, which complex-step derivatives rely on
    const double sx = std::sinh(0.5 * X), sy = std::sin(0.5 * Y);
    const double den = 2.0 * (sx * sx + sy * sy);
    if (den < 1e-300) throw DomainError("full_row: pole on the summation range");
    coth = cplx(std::sinh(X), -std::sin(Y)) / den;
  }
  return std::numbers::pi * coth / s;
}

/// q^p * zeta(p, q) = sum_{k >= 0} (1 + k/q)^(-p), p >= 2, q >= 1.
inline double scaled_hurwitz(int p, double q) {
  const double h_min = std::max(2.0 * p, 20.0);
  const auto K = static_cast<std::int64_t>(std::max(0.0, std::ceil(h_min - q)));
  double direct = 0.0;
  for (std::int64_t k = 0; k < K; ++k) direct += std::pow(1.0 + static_cast<double>(k) / q, -p);
  const double x = 1.0 + static_cast<double>(K) / q;
  double em = q / (p - 1.0) * std::pow(x, 1.0 - p) + 0.5 * std::pow(x, -p);
  // d^r/dk^r (1+k/q)^-p = (-1)^r p(p+1)..(p+r-1) q^-r (1+k/q)^(-p-r)
  double rising = p;  // p (p+1) ... (p+r-1) for r = 1
  double deriv_scale = 1.0 / (q * x);
  double deriv = -rising * deriv_scale * std::pow(x, -p);
  for (std::size_t k = 0; k < kBernoulliOverFactorial.size(); ++k) {
    em -= kBernoulliOverFactorial[k] * deriv;
    const int r = static_cast<int>(2 * k + 1);
    // advance from order r to order r + 2
    deriv *= (p + r) * (p + r + 1.0) * deriv_scale * deriv_scale;
  }
  return direct + em;
}

}  // namespace detail

/// sum over lattice vectors with |xi|^2 > R of sum_t w_t / (|xi|^2 - z_t).
/// R < 0 includes every vector. The weights must sum to zero.
inline cplx lattice_tail_sum(const LatticeSpec& spec, double R, std::span<const Pole> poles) {
  cplx wsum = 0.0;
  double wabs = 0.0, zmax = 0.0;
  for (const auto& p : poles) {
    wsum += p.weight;
    wabs += std::abs(p.weight);
    zmax = std::max(zmax, std::abs(p.z));
  }
  if (std::abs(wsum) > 1e-12 * wabs) throw DomainError("lattice_tail_sum: weights must sum to zero");

  const double a2 = spec.a2();
  const double b = spec.inv_a2();
  const double a = spec.a();
  const auto ceil_i = [](double v) { return static_cast<std::int64_t>(std::ceil(v)); };
  const std::int64_t M = std::max({spec.m_bound(std::max(R, 0.0)),
                                   ceil_i(std::sqrt(std::max(4.0 * zmax, 4.0) / a2)),
                                   ceil_i(8.0 / a2), std::int64_t{1}});

  cplx total = 0.0;
  for (std::int64_t m = 0; m <= M; ++m) {
    const double A = a2 * static_cast<double>(m) * static_cast<double>(m);
    const double mult = m == 0 ? 1.0 : 2.0;
    std::int64_t n0 = -1;
    if (R >= 0.0 && spec.norm(m, 0) <= R) {
      n0 = static_cast<std::int64_t>(std::floor(std::sqrt(std::max(R - A, 0.0)) * a));
      while (spec.norm(m, n0 + 1) <= R) ++n0;
      while (n0 > 0 && spec.norm(m, n0) > R) --n0;
    }
    cplx row = 0.0;
    for (const auto& p : poles) {
      const cplx s2 = (A - p.z) / b;
      if (n0 < 0) {
        row += p.weight * detail::full_row(s2) / b;
      } else {
        row += p.weight * 2.0 * detail::half_row_tail(n0 + 1, s2) / b;
      }
    }
    total += mult * row;
  }

  // Rows |m| > M: pi a (a^2 m^2 - z)^(-1/2) per row up to exp(-2 pi a^2 m) terms,
  // expanded as sum_j binom(-1/2, j) (-z / (a^2 m^2))^j / (a m).
  const double q = static_cast<double>(M + 1);
  std::vector<cplx> u, upow;
  double umax = 0.0;
  for (const auto& p : poles) {
    u.push_back(-p.z / (a2 * q * q));
    upow.push_back(1.0);
    umax = std::max(umax, std::abs(u.back()));
  }
  double ubound = 1.0;
  double binom = 1.0;  // binom(-1/2, j)
  cplx far = 0.0;
  for (int j = 1; j <= 120; ++j) {
    binom *= -(2.0 * j - 1.0) / (2.0 * j);
    cplx wj = 0.0;
    for (std::size_t t = 0; t < poles.size(); ++t) {
      upow[t] *= u[t];
      wj += poles[t].weight * upow[t];
    }
    const cplx term = 2.0 * std::numbers::pi / q * binom * wj * detail::scaled_hurwitz(2 * j + 1, q);
    far += term;
    // W_j may vanish for some j, so stop on a bound rather than on the term.
    ubound *= umax;
    const double bound = 2.0 * std::numbers::pi / q * std::abs(binom) * wabs * ubound * 2.0;
    if (bound <= 1e-18 * (std::abs(far) + std::abs(total)) + 1e-300) break;
  }
  return total + far;
}

/// c0 = sum over the whole lattice of 1/(|xi|^4 + 1).
inline double lattice_c0(const LatticeSpec& spec) {
  const cplx i(0.0, 1.0);
  const std::array<Pole, 2> poles = {Pole{i, 1.0 / (2.0 * i)}, Pole{-i, -1.0 / (2.0 * i)}};
  return lattice_tail_sum(spec, -1.0, poles).real();
}

/// sum_{|xi|^2 > R} [1/(|xi|^2 - lambda) - |xi|^2/(|xi|^4 + 1)], R > lambda.
inline double spectral_tail(const LatticeSpec& spec, double R, double lambda) {
  const cplx i(0.0, 1.0);
  const std::array<Pole, 3> poles = {Pole{lambda, 1.0}, Pole{i, -0.5}, Pole{-i, -0.5}};
  return lattice_tail_sum(spec, R, poles).real();
}

/// sum_{|xi|^2 > R} 1/(|xi|^2 - lambda)^2, R > lambda, by a complex step in lambda.
inline double inverse_square_tail(const LatticeSpec& spec, double R, double lambda) {
  const double h = 1e-20 * std::max(1.0, std::abs(lambda));
  const std::array<Pole, 2> poles = {Pole{cplx(lambda, h), 1.0}, Pole{-1.0, -1.0}};
  return lattice_tail_sum(spec, R, poles).imag() / h;
}

}  // namespace scatterer
