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

// Density-one subsequences of the perturbed spectrum.
//
//   Lambda_g     gap filter: n_{k+1} - n_k <= n_k^epsilon_gap
//   S_zeta       vectors eta with |<eta, zeta>| <= |eta|^(2 delta)
//   Lambda_zeta  eigenvalues whose annulus A(lambda, lambda^delta) misses S_zeta
//   Lambda_J     Lambda_g intersected with Lambda_zeta over 0 < |zeta| <= J
//
// Every exclusion carries a witness that can be re-verified on its own.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "scatterer/errors.hpp"
#include "scatterer/format.hpp"
#include "scatterer/lattice.hpp"
#include "scatterer/parallel.hpp"
#include "scatterer/spectral.hpp"

namespace scatterer {

struct SieveParams {
  double delta = 0.17;
  double epsilon_gap = 0.25;
  double theta = kDefaultTheta;

  double delta_min() const { return theta / 2.0; }
  double delta_max() const { return 0.5 - theta; }

  void validate() const {
    if (!(theta < 1.0 / 3.0)) throw DomainError("theta must be below 1/3 for the delta window to be nonempty");
    if (!(delta > delta_min() && delta < delta_max())) {
      throw DomainError("delta=" + fmt17(delta) + " outside the window (" + fmt17(delta_min()) + ", " +
                        fmt17(delta_max()) + ")");
    }
    if (!(epsilon_gap >= 0.0)) throw DomainError("epsilon_gap must be nonnegative");
  }
};

enum class WitnessKind { none, gap, vector };

struct SieveWitness {
  WitnessKind kind = WitnessKind::none;
  LatticeVector eta{};      ///< for vector witnesses
  LatticeVector zeta{};     ///< the zeta whose strip was hit
  double gap = 0.0;         ///< for gap witnesses
  double upper_norm = 0.0;  ///< n_{k+1} for gap witnesses
};

struct SieveEntry {
  double lambda = 0.0;
  double lower = 0.0;  ///< n_k
  bool kept = true;
  SieveWitness witness;
};

struct WindowDensity {
  double lo = 0.0;  ///< window [lo, 2 lo)
  std::size_t total = 0;
  std::size_t kept = 0;
  double density() const { return total == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(total); }
};

struct SieveReport {
  std::string name;
  std::size_t total = 0;
  std::size_t kept = 0;
  double density = 0.0;
  std::vector<SieveEntry> entries;
  std::vector<WindowDensity> windows;
  /// Least-squares slope of log #excluded(<= x) against log x over dyadic x.
  double excluded_exponent = 0.0;

  std::size_t excluded() const { return total - kept; }
};

/// <eta, zeta> <= |eta|^(2 delta) in absolute value.
inline bool s_zeta_membership(const LatticeSpec& spec, const LatticeVector& eta, const LatticeVector& zeta,
                              double delta) {
  if (zeta.m == 0 && zeta.n == 0) throw DomainError("S_zeta: zeta must be nonzero");
  return std::abs(spec.inner(eta, zeta)) <= std::pow(eta.norm_sq, delta);
}

struct StripCount {
  std::int64_t count = 0;
  double bound_ratio = 0.0;  ///< count / (X^(1/2 + delta) / |zeta|)
};

/// Nonzero eta in S_zeta with |eta|^2 <= X.
inline StripCount s_zeta_count(const LatticeSpec& spec, const LatticeVector& zeta, double delta, double X) {
  if (zeta.m == 0 && zeta.n == 0) throw DomainError("S_zeta: zeta must be nonzero");
  if (!(X > 0.0)) throw DomainError("s_zeta_count: X must be positive");
  StripCount out;
  const double strip = std::pow(X, delta);
  const std::int64_t mb = spec.m_bound(X);
  for (std::int64_t m = -mb; m <= mb; ++m) {
    const double am = spec.a2() * static_cast<double>(m) * static_cast<double>(m);
    if (am > X) continue;
    const std::int64_t nb = static_cast<std::int64_t>(std::floor(std::sqrt(X - am) * spec.a())) + 1;
    for (std::int64_t n = -nb; n <= nb; ++n) {
      if (m == 0 && n == 0) continue;
      const LatticeVector eta{m, n, spec.norm(m, n), {}};
      if (eta.norm_sq > X) continue;
      if (std::abs(spec.inner(eta, zeta)) > strip) continue;
      if (s_zeta_membership(spec, eta, zeta, delta)) ++out.count;
    }
  }
  out.bound_ratio = static_cast<double>(out.count) / (std::pow(X, 0.5 + delta) / std::sqrt(zeta.norm_sq));
  return out;
}

/// Nonzero dual vectors with m, n >= 0 and Euclidean length <= J, one per
/// orbit of (m, n) -> (+-m, +-n), ordered by norm then (m, n).
inline std::vector<LatticeVector> zeta_representatives(const LatticeSpec& spec, double J) {
  std::vector<LatticeVector> out;
  const double J2 = J * J;
  for (std::int64_t m = 0; m <= spec.m_bound(J2); ++m) {
    for (std::int64_t n = 0; n <= spec.n_bound(J2); ++n) {
      if (m == 0 && n == 0) continue;
      const LatticeVector v = spec.vector(m, n);
      if (v.norm_sq <= J2 * (1.0 + 1e-14)) out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end(), [](const LatticeVector& x, const LatticeVector& y) {
    if (x.norm_sq != y.norm_sq) return x.norm_sq < y.norm_sq;
    return x.m != y.m ? x.m < y.m : x.n < y.n;
  });
  return out;
}

namespace detail {

inline std::optional<SieveWitness> gap_violation(const PerturbedEigenvalue& e, double eps) {
  const double g = e.upper - e.lower;
  if (g <= std::pow(e.lower, eps)) return std::nullopt;
  SieveWitness w;
  w.kind = WitnessKind::gap;
  w.gap = g;
  w.upper_norm = e.upper;
  return w;
}

inline std::optional<SieveWitness> strip_violation(const LatticeSpec& spec, double lambda, const LatticeVector& zeta,
                                                   double delta) {
  const auto pts = annulus_points(spec, lambda, std::pow(lambda, delta));
  for (const auto& eta : pts) {
    if (s_zeta_membership(spec, eta, zeta, delta)) {
      SieveWitness w;
      w.kind = WitnessKind::vector;
      w.eta = eta;
      w.zeta = zeta;
      return w;
    }
  }
  return std::nullopt;
}

inline void finish_report(SieveReport& r) {
  r.total = r.entries.size();
  r.kept = static_cast<std::size_t>(std::count_if(r.entries.begin(), r.entries.end(), [](const SieveEntry& e) { return e.kept; }));
  r.density = r.total == 0 ? 0.0 : static_cast<double>(r.kept) / static_cast<double>(r.total);
  for (const auto& e : r.entries) {
    const double lo = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(e.lambda))));
    if (r.windows.empty() || r.windows.back().lo != lo) r.windows.push_back({lo, 0, 0});
    ++r.windows.back().total;
    if (e.kept) ++r.windows.back().kept;
  }
  // cumulative excluded count at the right end of each dyadic window
  std::vector<double> lx, ly;
  std::size_t excluded = 0;
  for (const auto& w : r.windows) {
    excluded += w.total - w.kept;
    if (excluded > 0) {
      lx.push_back(std::log(2.0 * w.lo));
      ly.push_back(std::log(static_cast<double>(excluded)));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    r.excluded_exponent = sxy / sxx;
  }
}

template <class Check>
SieveReport run_filter(const PerturbedSpectrum& s, std::string name, Check&& check) {
  if (s.entries.empty()) throw DomainError("sieve: spectrum is empty");
  SieveReport r;
  r.name = std::move(name);
  r.entries.resize(s.entries.size());
  parallel_for(s.entries.size(), [&](std::size_t i) {
    const auto& e = s.entries[i];
    SieveEntry out{e.lambda, e.lower, true, {}};
    if (auto w = check(e)) {
      out.kept = false;
      out.witness = *w;
    }
    r.entries[i] = out;
  });
  finish_report(r);
  return r;
}

}  // namespace detail

inline SieveReport lambda_g_filter(const PerturbedSpectrum& s, double epsilon_gap) {
  if (!(epsilon_gap >= 0.0)) throw DomainError("epsilon_gap must be nonnegative");
  return detail::run_filter(s, "lambda_g", [&](const PerturbedEigenvalue& e) {
    return detail::gap_violation(e, epsilon_gap);
  });
}

inline SieveReport lambda_zeta_filter(const PerturbedSpectrum& s, const LatticeVector& zeta, const SieveParams& p) {
  p.validate();
  if (zeta.m == 0 && zeta.n == 0) throw DomainError("S_zeta: zeta must be nonzero");
  return detail::run_filter(s, "lambda_zeta", [&](const PerturbedEigenvalue& e) {
    return detail::strip_violation(s.spec, e.lambda, zeta, p.delta);
  });
}

inline SieveReport lambda_J_intersection(const PerturbedSpectrum& s, double J, const SieveParams& p) {
  p.validate();
  if (!(J >= 1.0)) throw DomainError("J must be >= 1");
  const auto zetas = zeta_representatives(s.spec, J);
  return detail::run_filter(s, "lambda_J", [&](const PerturbedEigenvalue& e) -> std::optional<SieveWitness> {
    if (auto w = detail::gap_violation(e, p.epsilon_gap)) return w;
    for (const auto& z : zetas) {
      if (auto w = detail::strip_violation(s.spec, e.lambda, z, p.delta)) return w;
    }
    return std::nullopt;
  });
}

/// Recomputes the exclusion (or the full admission check) for one entry.
inline bool recheck_gap(const PerturbedSpectrum& s, const SieveEntry& entry, std::size_t i, double epsilon_gap) {
  const bool violates = detail::gap_violation(s.entries[i], epsilon_gap).has_value();
  if (entry.kept) return !violates;
  return entry.witness.kind == WitnessKind::gap && entry.witness.gap > std::pow(entry.lower, epsilon_gap);
}

inline bool recheck_vector_witness(const LatticeSpec& spec, const SieveEntry& entry, double delta) {
  if (entry.witness.kind != WitnessKind::vector) return false;
  const auto& eta = entry.witness.eta;
  const double L = std::pow(entry.lambda, delta);
  const double nrm = spec.norm(eta.m, eta.n);
  return nrm > entry.lambda - L && nrm < entry.lambda + L && s_zeta_membership(spec, eta, entry.witness.zeta, delta);
}

/// Every vector of A(lambda, lambda^delta) lies outside S_zeta.
inline bool recheck_kept(const LatticeSpec& spec, double lambda, const LatticeVector& zeta, double delta) {
  for (const auto& eta : annulus_points(spec, lambda, std::pow(lambda, delta))) {
    if (s_zeta_membership(spec, eta, zeta, delta)) return false;
  }
  return true;
}

inline void write_sieve_csv(std::ostream& os, const SieveReport& r) {
  os << "lambda,kept,witness_m,witness_n,witness_norm\n";
  for (const auto& e : r.entries) {
    os << fmt17(e.lambda) << ',' << (e.kept ? 1 : 0) << ',';
    switch (e.witness.kind) {
      case WitnessKind::none:
        os << ",,";
        break;
      case WitnessKind::gap:
        os << ",," << fmt17(e.witness.upper_norm);
        break;
      case WitnessKind::vector:
        os << e.witness.eta.m << ',' << e.witness.eta.n << ',' << fmt17(e.witness.eta.norm_sq);
        break;
    }
    os << '\n';
  }
}

inline nlohmann::json sieve_summary(const SieveReport& r) {
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : r.windows) {
    windows.push_back({{"lo", w.lo}, {"hi", 2.0 * w.lo}, {"total", w.total}, {"kept", w.kept}, {"density", w.density()}});
  }
  return {{"filter", r.name},
          {"total", r.total},
          {"kept", r.kept},
          {"excluded", r.excluded()},
          {"density", r.density},
          {"excluded_exponent", r.excluded_exponent},
          {"windows", windows}};
}

}  // namespace scatterer
