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

// Green's-function eigenfunctions
//
//   G(x) = -(1/4 pi^2) sum_xi c(xi) e^{i<xi, x - x0>},   c(xi) = 1/(|xi|^2 - lambda),
//
// on the torus with sides 2 pi / a and 2 pi a. Norms use the probability
// measure dx / (4 pi^2), so ||G||^2 = sum c^2 / (16 pi^4).
//
// Matrix elements <e_zeta g, g> of the normalized g = G/||G|| reduce to the
// lattice correlation sum c(xi) c(xi + zeta) / sum c^2. Over the whole
// lattice the correlation is written as
//
//   sum c(xi) c(xi + zeta) = sum c^2 - sum (2<xi,zeta> + |zeta|^2) c(xi)^2 c(xi + zeta),
//
// whose second sum is odd at leading order under xi -> -xi and converges like
// R^-2, with an explicit bound used to choose the cutoff.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scatterer/errors.hpp"
#include "scatterer/format.hpp"
#include "scatterer/lattice.hpp"
#include "scatterer/lattice_sums.hpp"

namespace scatterer {

using TorusPoint = std::array<double, 2>;

inline constexpr double kSixteenPi4 = 16.0 * std::numbers::pi * std::numbers::pi * std::numbers::pi * std::numbers::pi;

struct GreensContext {
  LatticeSpec spec;
  double lambda = 0.0;
  TorusPoint x0{0.0, 0.0};

  GreensContext(LatticeSpec s, double lam, TorusPoint x = {0.0, 0.0}) : spec(s), lambda(lam), x0(x) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("GreensContext: lambda must be positive");
    const double guard = 1e-12 * lambda;
    for_each_in_open_shell(spec, lambda - guard, lambda + guard, [&](std::int64_t m, std::int64_t n) {
      throw PoleError("GreensContext: lambda is a norm", spec.norm(m, n), 0);
    });
  }

  double coeff(std::int64_t m, std::int64_t n) const { return 1.0 / (spec.norm(m, n) - lambda); }

  /// <xi, x> for xi = (m a, n / a).
  double pairing(std::int64_t m, std::int64_t n, const TorusPoint& x) const {
    return static_cast<double>(m) * spec.a() * x[0] + static_cast<double>(n) * x[1] / spec.a();
  }
};

namespace detail {

/// Calls fn(m, n) for every lattice vector with |xi|^2 <= R.
template <class Fn>
void for_each_in_disk(const LatticeSpec& spec, double R, Fn&& fn) {
  if (R < 0.0) return;
  const std::int64_t mb = spec.m_bound(R);
  for (std::int64_t m = -mb; m <= mb; ++m) {
    const double am = spec.a2() * static_cast<double>(m) * static_cast<double>(m);
    if (am > R) continue;
    std::int64_t nt = static_cast<std::int64_t>(std::floor(std::sqrt(R - am) * spec.a())) + 1;
    while (nt >= 0 && spec.norm(m, nt) > R) --nt;
    for (std::int64_t n = -nt; n <= nt; ++n) fn(m, n);
  }
}

inline std::int64_t pack(std::int64_t m, std::int64_t n) { return (m << 32) ^ (n & 0xffffffff); }

}  // namespace detail

/// sum over the lattice of c(xi)^2, exact band plus closed-form tail.
inline double green_coeff_sq_sum(const GreensContext& ctx) {
  const double R = 2.0 * ctx.lambda + 16.0;
  double s = 0.0;
  detail::for_each_in_disk(ctx.spec, R, [&](std::int64_t m, std::int64_t n) {
    const double c = ctx.coeff(m, n);
    s += c * c;
  });
  return s + inverse_square_tail(ctx.spec, R, ctx.lambda);
}

/// ||G||^2 = sum c^2 / (16 pi^4). The tail is summed in closed form, so the
/// error is rounding only and far below tail_tol.
inline double green_norm_sq(const GreensContext& ctx, double tail_tol) {
  if (!(tail_tol > 0.0)) throw DomainError("tail_tol must be positive");
  return green_coeff_sq_sum(ctx) / kSixteenPi4;
}

struct GreensTruncation {
  GreensContext context;
  double L = 0.0;
  std::vector<LatticeVector> vectors;  ///< A(lambda, L), ordered by key, m, n
  std::vector<double> coeffs;          ///< c(xi) for each vector
  double norm_sq_trunc = 0.0;
  double norm_sq_full = 0.0;

  bool empty() const noexcept { return vectors.empty(); }
};

inline GreensTruncation truncate(const GreensContext& ctx, double L, double tail_tol = 1e-10) {
  if (!(L > 0.0)) throw DomainError("truncate: L must be positive");
  GreensTruncation t{ctx, L, annulus_points(ctx.spec, ctx.lambda, L), {}, 0.0, 0.0};
  double s = 0.0;
  for (const auto& v : t.vectors) {
    const double c = 1.0 / (v.norm_sq - ctx.lambda);
    t.coeffs.push_back(c);
    s += c * c;
  }
  t.norm_sq_trunc = s / kSixteenPi4;
  t.norm_sq_full = green_norm_sq(ctx, tail_tol);
  return t;
}

struct TruncationError {
  double defect = 0.0;  ///< ||g - g_L|| = sqrt(1 - ||G_L||^2 / ||G||^2)
  double bound = 0.0;   ///< 2 ||G - G_L|| / ||G||
};

inline TruncationError truncation_error(const GreensContext& ctx, double L, double tail_tol = 1e-10) {
  const GreensTruncation t = truncate(ctx, L, tail_tol);
  const double d = std::sqrt(std::max(0.0, 1.0 - t.norm_sq_trunc / t.norm_sq_full));
  return {d, 2.0 * d};
}

/// Cutoff for matrix elements: the annulus A(lambda, L), or the full lattice.
struct Cutoff {
  std::optional<double> L;

  static Cutoff full() { return {}; }
  static Cutoff annulus(double L) { return {L}; }
  bool is_full() const noexcept { return !L.has_value(); }
};

/// Radius of the exact band for a FULL matrix element with relative tolerance tol.
inline double full_mode_radius(const GreensContext& ctx, const LatticeVector& zeta, double tol, double coeff_sq_sum) {
  const double q = zeta.norm_sq;
  return std::max({4.0 * (ctx.lambda + q + 1.0), 13.0 * q,
                   std::sqrt(70.0 * std::numbers::pi * q / (tol * coeff_sq_sum))});
}

namespace detail {

inline std::complex<double> phase(const GreensContext& ctx, const LatticeVector& zeta) {
  if (zeta.m == 0 && zeta.n == 0) return 1.0;
  return std::polar(1.0, ctx.pairing(zeta.m, zeta.n, ctx.x0));
}

inline double truncated_correlation(const GreensTruncation& t, const LatticeVector& zeta) {
  std::unordered_map<std::int64_t, double> index;
  index.reserve(t.vectors.size() * 2);
  for (std::size_t i = 0; i < t.vectors.size(); ++i) index.emplace(pack(t.vectors[i].m, t.vectors[i].n), t.coeffs[i]);
  double num = 0.0;
  for (std::size_t i = 0; i < t.vectors.size(); ++i) {
    const auto it = index.find(pack(t.vectors[i].m + zeta.m, t.vectors[i].n + zeta.n));
    if (it != index.end()) num += t.coeffs[i] * it->second;
  }
  return num;
}

}  // namespace detail

/// <e_zeta g, g> for g = G_L/||G_L||; an empty truncation gives 0.
inline std::complex<double> matrix_element(const GreensTruncation& t, const LatticeVector& zeta) {
  if (zeta.m == 0 && zeta.n == 0) return t.empty() ? 0.0 : 1.0;
  if (t.empty()) return 0.0;
  const double s2 = t.norm_sq_trunc * kSixteenPi4;
  return detail::phase(t.context, zeta) * (detail::truncated_correlation(t, zeta) / s2);
}

/// <e_zeta g, g> over the annulus or, for Cutoff::full(), the whole lattice.
inline std::complex<double> matrix_element(const GreensContext& ctx, const Cutoff& cutoff, const LatticeVector& zeta,
                                           double tail_tol = 1e-10) {
  if (!(tail_tol > 0.0)) throw DomainError("tail_tol must be positive");
  if (!cutoff.is_full()) return matrix_element(truncate(ctx, *cutoff.L, tail_tol), zeta);
  if (zeta.m == 0 && zeta.n == 0) return 1.0;
  const double s2 = green_coeff_sq_sum(ctx);
  const double R = full_mode_radius(ctx, zeta, tail_tol, s2);
  const double q = zeta.norm_sq;
  double corr = 0.0;
  detail::for_each_in_disk(ctx.spec, R, [&](std::int64_t m, std::int64_t n) {
    const double c = ctx.coeff(m, n);
    const double cz = ctx.coeff(m + zeta.m, n + zeta.n);
    const double t = ctx.spec.inner(LatticeVector{m, n, 0.0, {}}, zeta);
    corr -= (2.0 * t + q) * c * c * cz;
  });
  return detail::phase(ctx, zeta) * ((s2 + corr) / s2);
}

/// Finite Fourier observable a(x) = sum a_zeta e^{i<zeta, x>}, keyed by (m, n).
struct Observable {
  std::map<std::pair<std::int64_t, std::int64_t>, std::complex<double>> coeffs;

  std::complex<double> mean() const {
    const auto it = coeffs.find({0, 0});
    return it == coeffs.end() ? 0.0 : it->second;
  }

  /// a_{-zeta} = conj(a_zeta) for every zeta, i.e. a(x) is real.
  bool is_real(double tol = 0.0) const {
    for (const auto& [k, v] : coeffs) {
      const auto it = coeffs.find({-k.first, -k.second});
      const std::complex<double> w = it == coeffs.end() ? 0.0 : it->second;
      if (std::abs(w - std::conj(v)) > tol) return false;
    }
    return true;
  }
};

/// sum_zeta a_zeta <e_zeta g, g>. For real observables the imaginary part is
/// rounding only and is dropped.
inline std::complex<double> observable_average(const GreensContext& ctx, const Observable& obs, const Cutoff& cutoff,
                                               double tail_tol = 1e-10) {
  std::optional<GreensTruncation> t;
  if (!cutoff.is_full()) t = truncate(ctx, *cutoff.L, tail_tol);
  std::complex<double> s = 0.0;
  for (const auto& [k, a] : obs.coeffs) {
    const LatticeVector zeta = ctx.spec.vector(k.first, k.second);
    s += a * (t ? matrix_element(*t, zeta) : matrix_element(ctx, cutoff, zeta, tail_tol));
  }
  if (obs.is_real(1e-14 * (1.0 + std::abs(s)))) s.imag(0.0);
  return s;
}

/// G_L(x) = -(1/4 pi^2) sum_{A(lambda, L)} c(xi) e^{i<xi, x - x0>}.
inline std::complex<double> eval_pointwise(const GreensTruncation& t, const TorusPoint& x) {
  const TorusPoint d{x[0] - t.context.x0[0], x[1] - t.context.x0[1]};
  std::complex<double> s = 0.0;
  for (std::size_t i = 0; i < t.vectors.size(); ++i) {
    s += t.coeffs[i] * std::polar(1.0, t.context.pairing(t.vectors[i].m, t.vectors[i].n, d));
  }
  return -s / (4.0 * std::numbers::pi * std::numbers::pi);
}

struct DensityGrid {
  std::size_t N = 0;
  std::vector<double> x, y;  ///< grid coordinates
  std::vector<double> density;  ///< |g_L|^2 row-major, index i * N + j

  /// Trapezoidal average over the torus; equals 1 when the grid resolves g_L.
  double mean() const {
    double s = 0.0;
    for (double d : density) s += d;
    return s / static_cast<double>(density.size());
  }
};

/// |g_L|^2 on the N x N grid x = 2 pi i / (a N), y = 2 pi a j / N. The
/// trapezoidal rule on this grid is exact for |g_L|^2 when every |m| and |n|
/// in the annulus is below N / 2.
inline DensityGrid density_grid(const GreensTruncation& t, std::size_t N) {
  if (N == 0) throw DomainError("density_grid: N must be positive");
  DensityGrid g;
  g.N = N;
  const double a = t.context.spec.a();
  for (std::size_t i = 0; i < N; ++i) {
    g.x.push_back(2.0 * std::numbers::pi * static_cast<double>(i) / (a * static_cast<double>(N)));
    g.y.push_back(2.0 * std::numbers::pi * a * static_cast<double>(i) / static_cast<double>(N));
  }
  g.density.assign(N * N, 0.0);
  if (t.empty()) return g;
  const auto Ni = static_cast<std::int64_t>(N);
  const auto twiddle = [&](std::int64_t k) {
    std::vector<std::complex<double>> w(N);
    const std::int64_t r = ((k % Ni) + Ni) % Ni;
    for (std::size_t i = 0; i < N; ++i) {
      w[i] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>((r * static_cast<std::int64_t>(i)) % Ni) /
                                 static_cast<double>(N));
    }
    return w;
  };
  // Group by m: row(j) = sum_n c e^{i n y_j / a} e^{-i<xi, x0>}, then add row * e^{i m a x_i}.
  std::map<std::int64_t, std::vector<std::size_t>> by_m;
  for (std::size_t k = 0; k < t.vectors.size(); ++k) by_m[t.vectors[k].m].push_back(k);
  std::vector<std::complex<double>> field(N * N, 0.0);
  for (const auto& [m, idx] : by_m) {
    std::vector<std::complex<double>> row(N, 0.0);
    for (std::size_t k : idx) {
      const auto& v = t.vectors[k];
      const std::complex<double> c0 = t.coeffs[k] * std::polar(1.0, -t.context.pairing(v.m, v.n, t.context.x0));
      const auto wn = twiddle(v.n);
      for (std::size_t j = 0; j < N; ++j) row[j] += c0 * wn[j];
    }
    const auto wm = twiddle(m);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) field[i * N + j] += wm[i] * row[j];
    }
  }
  const double scale = 1.0 / (t.norm_sq_trunc * kSixteenPi4);
  for (std::size_t i = 0; i < N * N; ++i) g.density[i] = std::norm(field[i]) * scale;
  return g;
}

struct MatrixElementRow {
  double lambda;
  std::int64_t zeta_m, zeta_n;
  std::optional<double> L;
  std::complex<double> value;
};

inline void write_matrix_csv(std::ostream& os, const std::vector<MatrixElementRow>& rows) {
  os << "lambda,zeta_m,zeta_n,L,re,im,abs\n";
  for (const auto& r : rows) {
    os << fmt17(r.lambda) << ',' << r.zeta_m << ',' << r.zeta_n << ',' << (r.L ? fmt17(*r.L) : "full") << ','
       << fmt17(r.value.real()) << ',' << fmt17(r.value.imag()) << ',' << fmt17(std::abs(r.value)) << '\n';
  }
}

inline void write_density_csv(std::ostream& os, const DensityGrid& g) {
  os << "x,y,density\n";
  for (std::size_t i = 0; i < g.N; ++i) {
    for (std::size_t j = 0; j < g.N; ++j) {
      os << fmt17(g.x[i]) << ',' << fmt17(g.y[j]) << ',' << fmt17(g.density[i * g.N + j]) << '\n';
    }
  }
}

}  // namespace scatterer
