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

// The regularized spectral function
//
//   F(lambda) = sum_n r(n) [ 1/(n - lambda) - n/(n^2 + 1) ]
//
// and the perturbed eigenvalues, one root of F(lambda) = c0 tan(phi/2) in each
// interval between consecutive positive norms.
//
// Norms up to a radius R are summed from the table and the rest comes from
// lattice_tail_sum, which is exact to rounding. When solving many intervals,
// the terms far from a group of neighbouring intervals are replaced by a
// Chebyshev interpolant over the group, and the terms near the group are
// evaluated relative to the bracketing pole with offsets taken from the exact
// norm keys.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "scatterer/chebyshev.hpp"
#include "scatterer/errors.hpp"
#include "scatterer/format.hpp"
#include "scatterer/lattice.hpp"
#include "scatterer/lattice_sums.hpp"
#include "scatterer/parallel.hpp"

namespace scatterer {

/// phi closer than this to +-pi is treated as the unperturbed Laplacian.
inline constexpr double kPhiEdgeGuard = 1e-8;
inline constexpr double kPoleGuard = 1e-12;
inline constexpr double kDegenerateWidth = 1e-10;

struct SpectralParams {
  double phi = 0.0;
  double theta = kDefaultTheta;
  double tail_tol = 1e-6;
  double window = 64.0;

  void validate() const {
    if (!std::isfinite(phi) || std::abs(phi) >= std::numbers::pi - kPhiEdgeGuard) {
      throw DomainError("phi must lie strictly inside (-pi, pi); phi = pi is the unperturbed Laplacian");
    }
    if (!(tail_tol > 0.0)) throw DomainError("tail_tol must be positive");
    if (!(window > 0.0)) throw DomainError("window must be positive");
  }

  double tan_half_phi() const { return std::tan(0.5 * phi); }
};

struct PerturbedEigenvalue {
  std::size_t k = 0;
  double lower = 0.0;
  double upper = 0.0;
  double lambda = 0.0;
  double residual = 0.0;
  /// Interval narrower than kDegenerateWidth: lambda is the midpoint.
  bool degenerate = false;
};

struct PerturbedSpectrum {
  LatticeSpec spec;
  SpectralParams params;
  double c0 = 0.0;
  double rhs = 0.0;  ///< c0 tan(phi/2)
  double X = 0.0;
  std::vector<PerturbedEigenvalue> entries;
};

/// sum over the lattice of 1/(|xi|^4 + 1). The tail is summed in closed form,
/// so the error is rounding only and far below tail_tol.
inline double compute_c0(const LatticeSpec& spec, double tail_tol) {
  if (!(tail_tol > 0.0)) throw DomainError("tail_tol must be positive");
  return lattice_c0(spec);
}

namespace detail {

inline double regularized_term(double n, double lambda) { return 1.0 / (n - lambda) - n / (n * n + 1.0); }

inline void check_pole(const NormTable& table, double lambda) {
  const std::size_t j = table.index_upto(lambda);
  for (std::size_t i : {j, j == 0 ? j : j - 1}) {
    if (i >= table.size()) continue;
    const double n = table[i].norm;
    if (std::abs(lambda - n) <= kPoleGuard * std::max(lambda, n)) {
      throw PoleError("lambda=" + fmt17(lambda) + " is within the pole guard of the norm " + fmt17(n), n, i);
    }
  }
}

/// Radius up to which table norms are summed directly for a single evaluation.
inline double direct_radius(const NormTable& table, double lambda, const SpectralParams& params) {
  return std::min(table.X(), std::max(2.0 * lambda, lambda + 10.0 * params.window));
}

// Tail beyond R as a function of lambda on [0, xmax], xmax < R. Each panel is
// no longer than its distance to R, so the panels grow geometrically downward.
class TailInterpolant {
 public:
  TailInterpolant(const LatticeSpec& spec, double R, double xmax) {
    if (!(R > xmax)) throw DomainError("TailInterpolant: xmax must lie below R");
    double v = xmax;
    while (v > 0.0) {
      const double len = std::min(R - v, v);
      panels_.emplace_back(v - len, v, 30, [&](double x) { return spectral_tail(spec, R, x); });
      lows_.push_back(v - len);
      v -= len;
    }
    std::reverse(panels_.begin(), panels_.end());
    std::reverse(lows_.begin(), lows_.end());
    xmax_ = xmax;
  }

  double operator()(double x) const {
    if (x < 0.0 || x > xmax_) throw RangeError("TailInterpolant: argument outside the panels");
    auto it = std::upper_bound(lows_.begin(), lows_.end(), x);
    const std::size_t i = it == lows_.begin() ? 0 : static_cast<std::size_t>(it - lows_.begin()) - 1;
    return panels_[i](x);
  }

 private:
  std::vector<Chebyshev> panels_;
  std::vector<double> lows_;
  double xmax_ = 0.0;
};

// Solves the intervals k0..k1 (inclusive); k indexes the table, k >= 1.
class GroupSolver {
 public:
  GroupSolver(const NormTable& table, double R, std::size_t k0, std::size_t k1, double window, bool interpolate,
              const TailInterpolant* tail = nullptr)
      : table_(table), R_(R), tail_(tail) {
    const auto& e = table.entries();
    lo_ = e[k0].norm;
    hi_ = e[k1 + 1].norm;
    const double margin = std::max(window, hi_ - lo_);
    jR_ = table.index_upto(R);
    const auto first = std::lower_bound(e.begin(), e.end(), lo_ - margin,
                                        [](const NormEntry& x, double v) { return x.norm < v; });
    near_lo_ = static_cast<std::size_t>(first - e.begin());
    near_hi_ = std::min(jR_, table.index_upto(hi_ + margin));
    for (std::size_t j = near_lo_; j < near_hi_; ++j) {
      near_const_ += static_cast<double>(e[j].multiplicity) * e[j].norm / (e[j].norm * e[j].norm + 1.0);
    }
    if (interpolate && R - hi_ >= margin && hi_ > lo_) {
      cheb_ = Chebyshev(lo_, hi_, 28, [&](double x) { return smooth_exact(x); });
    }
  }

  PerturbedEigenvalue solve(std::size_t k, double rhs) const {
    const auto& e = table_.entries();
    const auto& spec = table_.spec();
    PerturbedEigenvalue out;
    out.k = k;
    out.lower = e[k].norm;
    out.upper = e[k + 1].norm;
    const double width = spec.norm_difference(e[k + 1].key, e[k].key);
    if (width < kDegenerateWidth) {
      out.degenerate = true;
      out.lambda = 0.5 * (out.lower + out.upper);
      out.residual = std::abs(shifted(k, 0.5 * width, true) - rhs);
      return out;
    }
    std::size_t origin = k;
    double lo = 0.0, hi = 0.5 * width;
    if (shifted(k, 0.5 * width, false) - rhs <= 0.0) {
      origin = k + 1;
      lo = -0.5 * width;
      hi = 0.0;
    }
    for (int it = 0; it < 2000; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (shifted(origin, mid, false) - rhs > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    const double tau = 0.5 * (lo + hi);
    out.lambda = e[origin].norm + tau;
    if (!(out.lambda > out.lower)) out.lambda = std::nextafter(out.lower, out.upper);
    if (!(out.lambda < out.upper)) out.lambda = std::nextafter(out.upper, out.lower);
    out.residual = std::abs(shifted(origin, tau, true) - rhs);
    return out;
  }

  /// F(n_origin + tau); the near terms use key differences.
  double shifted(std::size_t origin, double tau, bool exact) const {
    const auto& e = table_.entries();
    const auto& spec = table_.spec();
    double near = 0.0;
    for (std::size_t j = near_lo_; j < near_hi_; ++j) {
      const double d = spec.norm_difference(e[j].key, e[origin].key) - tau;
      near += static_cast<double>(e[j].multiplicity) / d;
    }
    const double x = e[origin].norm + tau;
    const double smooth = (exact || cheb_.coefficients().empty()) ? smooth_exact(x) : cheb_(x);
    return near - near_const_ + smooth;
  }

 private:
  double smooth_exact(double x) const {
    const auto& e = table_.entries();
    double s = 0.0;
    for (std::size_t j = 0; j < near_lo_; ++j) s += static_cast<double>(e[j].multiplicity) * regularized_term(e[j].norm, x);
    for (std::size_t j = near_hi_; j < jR_; ++j) s += static_cast<double>(e[j].multiplicity) * regularized_term(e[j].norm, x);
    return s + (tail_ ? (*tail_)(x) : spectral_tail(table_.spec(), R_, x));
  }

  const NormTable& table_;
  double R_;
  const TailInterpolant* tail_;
  double lo_ = 0.0, hi_ = 0.0;
  std::size_t jR_ = 0, near_lo_ = 0, near_hi_ = 0;
  double near_const_ = 0.0;
  Chebyshev cheb_;
};

inline void check_table(const LatticeSpec& spec, const NormTable& table) {
  if (spec.to_string() != table.spec().to_string()) throw DomainError("lattice spec does not match the norm table");
}

}  // namespace detail

/// F(lambda) by direct summation of the table up to R plus the exact tail.
inline double spectral_function(const LatticeSpec& spec, const NormTable& table, double lambda,
                                const SpectralParams& params) {
  detail::check_table(spec, table);
  if (!(params.tail_tol > 0.0) || !(params.window > 0.0)) throw DomainError("tail_tol and window must be positive");
  if (!(lambda > 0.0)) throw DomainError("spectral_function: lambda must be positive");
  if (table.X() < lambda + params.window) {
    throw RangeError("spectral_function: table cutoff " + fmt17(table.X()) + " < lambda + window");
  }
  detail::check_pole(table, lambda);
  const double R = detail::direct_radius(table, lambda, params);
  const std::size_t jR = table.index_upto(R);
  double s = 0.0;
  for (std::size_t j = 0; j < jR; ++j) {
    s += static_cast<double>(table[j].multiplicity) * detail::regularized_term(table[j].norm, lambda);
  }
  return s + spectral_tail(spec, R, lambda);
}

/// d F / d lambda = sum_n r(n)/(n - lambda)^2, by the same splitting.
inline double spectral_derivative(const LatticeSpec& spec, const NormTable& table, double lambda,
                                  const SpectralParams& params) {
  detail::check_table(spec, table);
  if (table.X() < lambda + params.window) throw RangeError("spectral_derivative: table too small");
  detail::check_pole(table, lambda);
  const double R = detail::direct_radius(table, lambda, params);
  const std::size_t jR = table.index_upto(R);
  double s = 0.0;
  for (std::size_t j = 0; j < jR; ++j) {
    const double d = table[j].norm - lambda;
    s += static_cast<double>(table[j].multiplicity) / (d * d);
  }
  return s + inverse_square_tail(spec, R, lambda);
}

/// Root in (n_k, n_{k+1}), k >= 1, where n_1 is the smallest positive norm.
inline PerturbedEigenvalue solve_interval(const LatticeSpec& spec, const NormTable& table,
                                          const SpectralParams& params, std::size_t k, double c0) {
  detail::check_table(spec, table);
  params.validate();
  if (k < 1 || k + 1 >= table.size()) throw RangeError("solve_interval: k outside the table");
  if (table[k + 1].norm + params.window > table.X()) {
    throw RangeError("solve_interval: n_{k+1} + window exceeds the table cutoff");
  }
  const detail::GroupSolver g(table, table.X(), k, k, params.window, false);
  return g.solve(k, c0 * params.tan_half_phi());
}

inline PerturbedEigenvalue solve_interval(const LatticeSpec& spec, const NormTable& table,
                                          const SpectralParams& params, std::size_t k) {
  return solve_interval(spec, table, params, k, compute_c0(spec, params.tail_tol));
}

/// Every lambda_k with n_{k+1} <= X, using a table that reaches at least X + window.
inline PerturbedSpectrum perturbed_spectrum(const NormTable& table, const SpectralParams& params, double X,
                                            std::optional<double> c0_hint = std::nullopt) {
  params.validate();
  const LatticeSpec& spec = table.spec();
  if (table.size() < 2 || !(X > table[1].norm)) throw DomainError("X must exceed the first positive norm");
  if (table.X() < X + params.window) throw RangeError("perturbed_spectrum: table cutoff < X + window");

  PerturbedSpectrum out;
  out.spec = spec;
  out.params = params;
  out.X = X;
  out.c0 = c0_hint ? *c0_hint : compute_c0(spec, params.tail_tol);
  out.rhs = out.c0 * params.tan_half_phi();

  const std::size_t last = table.index_upto(X);  // entries [0, last) are <= X
  if (last < 3) return out;
  const std::size_t k_end = last - 1;  // intervals k = 1 .. k_end - 1
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t k = 1; k < k_end;) {
    std::size_t k1 = k;
    while (k1 + 1 < k_end && table[k1 + 2].norm - table[k].norm <= params.window) ++k1;
    groups.emplace_back(k, k1);
    k = k1 + 1;
  }
  const detail::TailInterpolant tail(spec, table.X(), X);
  std::vector<std::vector<PerturbedEigenvalue>> parts(groups.size());
  parallel_for(groups.size(), [&](std::size_t g) {
    const auto [k0, k1] = groups[g];
    const detail::GroupSolver solver(table, table.X(), k0, k1, params.window, true, &tail);
    for (std::size_t k = k0; k <= k1; ++k) parts[g].push_back(solver.solve(k, out.rhs));
  });
  for (auto& p : parts) out.entries.insert(out.entries.end(), p.begin(), p.end());
  return out;
}

inline PerturbedSpectrum perturbed_spectrum(const LatticeSpec& spec, const SpectralParams& params, double X) {
  params.validate();
  if (!(X > 0.0)) throw DomainError("X must be positive");
  const NormTable table = build_norm_table(spec, X + 2.0 * params.window);
  return perturbed_spectrum(table, params, X);
}

struct SpecfunRow {
  double lambda;
  double F;
};

/// F on a grid; points inside the pole guard are omitted.
inline std::vector<SpecfunRow> specfun_scan(const LatticeSpec& spec, const NormTable& table,
                                            std::span<const double> grid, const SpectralParams& params) {
  std::vector<SpecfunRow> rows;
  for (double x : grid) {
    try {
      rows.push_back({x, spectral_function(spec, table, x, params)});
    } catch (const PoleError&) {
    }
  }
  return rows;
}

/// n uniformly spaced points strictly inside (lo, hi].
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(n);
  return g;
}

inline void write_spectrum_csv(std::ostream& os, const PerturbedSpectrum& s) {
  os << "k,n_k,lambda_k,n_k1,residual\n";
  for (const auto& e : s.entries) {
    os << e.k << ',' << fmt17(e.lower) << ',' << fmt17(e.lambda) << ',' << fmt17(e.upper) << ','
       << fmt17(e.residual) << '\n';
  }
}

inline void write_specfun_csv(std::ostream& os, std::span<const SpecfunRow> rows) {
  os << "lambda,F\n";
  for (const auto& r : rows) os << fmt17(r.lambda) << ',' << fmt17(r.F) << '\n';
}

}  // namespace scatterer
