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

// Dual lattice of the rectangular flat torus R^2 / 2pi (Z(1/a,0) + Z(0,a)).
//
// Dual vectors are xi = (m a, n / a) with norm |xi|^2 = a^2 m^2 + n^2 / a^2.
// Equal norms are decided on exact integer keys, never on floating point:
//
//   rational a^4 = p/q : key = p m^2 + q n^2, norm = key / sqrt(p q)
//   irrational a^4     : key = (m^2, n^2)

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "scatterer/errors.hpp"
#include "scatterer/format.hpp"

namespace scatterer {

/// Best known exponent in the circle-problem remainder; diagnostics only.
inline constexpr double kDefaultTheta = 131.0 / 416.0;

struct NormKey {
  std::int64_t first = 0;
  std::int64_t second = 0;

  friend auto operator<=>(const NormKey&, const NormKey&) = default;
};

struct LatticeVector {
  std::int64_t m = 0;
  std::int64_t n = 0;
  double norm_sq = 0.0;
  NormKey key;

  friend bool operator==(const LatticeVector& x, const LatticeVector& y) {
    return x.m == y.m && x.n == y.n;
  }
};

class LatticeSpec {
 public:
  /// Lattice with a^4 = p/q; the fraction is reduced.
  static LatticeSpec rational(std::int64_t p, std::int64_t q) {
    if (p < 1 || q < 1) throw DomainError("lattice: p and q must be >= 1");
    const std::int64_t g = std::gcd(p, q);
    LatticeSpec s;
    s.rational_ = true;
    s.p_ = p / g;
    s.q_ = q / g;
    s.a2_ = std::sqrt(static_cast<double>(s.p_) / static_cast<double>(s.q_));
    s.sqrt_pq_ = std::sqrt(static_cast<double>(s.p_) * static_cast<double>(s.q_));
    s.finish();
    return s;
  }

  /// Caller asserts a^4 is irrational; a2 is the real value of a^2.
  static LatticeSpec irrational(double a2) {
    if (!(a2 > 0.0) || !std::isfinite(a2))
      throw DomainError("lattice: a^2 must be a positive finite real");
    LatticeSpec s;
    s.rational_ = false;
    s.a2_ = a2;
    s.finish();
    return s;
  }

  static LatticeSpec square() { return rational(1, 1); }

  /// Accepts "p/q", "p" or "irrational:<a2>".
  static LatticeSpec parse(std::string_view text) {
    constexpr std::string_view kIrr = "irrational:";
    const auto fail = [&] {
      return DomainError("lattice: cannot parse '" + std::string(text) +
                         "' (expected p/q or irrational:<a2>)");
    };
    if (text.starts_with(kIrr)) {
      const std::string_view body = text.substr(kIrr.size());
      double a2 = 0.0;
      const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), a2);
      if (ec != std::errc{} || ptr != body.data() + body.size()) throw fail();
      return irrational(a2);
    }
    const auto slash = text.find('/');
    const std::string_view ps = text.substr(0, slash);
    const std::string_view qs = slash == std::string_view::npos ? "1" : text.substr(slash + 1);
    std::int64_t p = 0, q = 0;
    const auto rp = std::from_chars(ps.data(), ps.data() + ps.size(), p);
    const auto rq = std::from_chars(qs.data(), qs.data() + qs.size(), q);
    if (rp.ec != std::errc{} || rp.ptr != ps.data() + ps.size() || rq.ec != std::errc{} ||
        rq.ptr != qs.data() + qs.size())
      throw fail();
    return rational(p, q);
  }

  bool is_rational() const noexcept { return rational_; }
  std::int64_t p() const noexcept { return p_; }
  std::int64_t q() const noexcept { return q_; }
  double a2() const noexcept { return a2_; }
  double a() const noexcept { return a_; }
  double inv_a2() const noexcept { return inv_a2_; }

  NormKey key(std::int64_t m, std::int64_t n) const {
    const __int128 m2 = static_cast<__int128>(m) * m;
    const __int128 n2 = static_cast<__int128>(n) * n;
    if (!rational_) {
      if (m2 > kKeyLimit || n2 > kKeyLimit) throw CapacityError("lattice: key overflow");
      return {static_cast<std::int64_t>(m2), static_cast<std::int64_t>(n2)};
    }
    const __int128 k = p_ * m2 + q_ * n2;
    if (k > kKeyLimit) throw CapacityError("lattice: exact norm key overflow");
    return {static_cast<std::int64_t>(k), 0};
  }

  double norm_of_key(const NormKey& k) const noexcept {
    if (rational_) return static_cast<double>(k.first) / sqrt_pq_;
    return a2_ * static_cast<double>(k.first) + static_cast<double>(k.second) * inv_a2_;
  }

  double norm(std::int64_t m, std::int64_t n) const {
    if (rational_) return static_cast<double>(p_ * m * m + q_ * n * n) / sqrt_pq_;
    const double dm = static_cast<double>(m), dn = static_cast<double>(n);
    return a2_ * dm * dm + dn * dn * inv_a2_;
  }

  LatticeVector vector(std::int64_t m, std::int64_t n) const {
    const NormKey k = key(m, n);
    return {m, n, norm_of_key(k), k};
  }

  /// Euclidean inner product <xi, eta> = a^2 m m' + n n' / a^2.
  double inner(const LatticeVector& x, const LatticeVector& y) const noexcept {
    if (rational_) {
      return static_cast<double>(p_ * x.m * y.m + q_ * x.n * y.n) / sqrt_pq_;
    }
    return a2_ * static_cast<double>(x.m) * static_cast<double>(y.m) +
           static_cast<double>(x.n) * static_cast<double>(y.n) * inv_a2_;
  }

  /// Difference of two norms computed from the exact keys where possible.
  double norm_difference(const NormKey& x, const NormKey& y) const noexcept {
    if (rational_) return static_cast<double>(x.first - y.first) / sqrt_pq_;
    return a2_ * static_cast<double>(x.first - y.first) +
           static_cast<double>(x.second - y.second) * inv_a2_;
  }

  /// |m| bound for any vector with norm <= x.
  std::int64_t m_bound(double x) const {
    return static_cast<std::int64_t>(std::ceil(std::sqrt(std::max(x, 0.0)) / a_)) + 1;
  }
  std::int64_t n_bound(double x) const {
    return static_cast<std::int64_t>(std::ceil(std::sqrt(std::max(x, 0.0)) * a_)) + 1;
  }

  std::string to_string() const {
    if (rational_) return std::to_string(p_) + "/" + std::to_string(q_);
    return "irrational:" + fmt17(a2_);
  }

  std::string format_key(const NormKey& k) const {
    if (rational_) return std::to_string(k.first);
    return std::to_string(k.first) + ":" + std::to_string(k.second);
  }

 private:
  static constexpr __int128 kKeyLimit = static_cast<__int128>(1) << 62;

  void finish() {
    a_ = std::sqrt(a2_);
    inv_a2_ = 1.0 / a2_;
  }

  bool rational_ = true;
  std::int64_t p_ = 1;
  std::int64_t q_ = 1;
  double a2_ = 1.0;
  double a_ = 1.0;
  double inv_a2_ = 1.0;
  double sqrt_pq_ = 1.0;
};

struct NormEntry {
  double norm = 0.0;
  NormKey key;
  std::int64_t multiplicity = 0;
  /// At most TableOptions::representative_cap vectors, ordered by (m, n).
  std::vector<LatticeVector> representatives;
};

struct TableOptions {
  std::size_t representative_cap = 64;
  double max_X = 1e8;
};

/// Distinct norms <= X with exact multiplicities. Immutable after construction.
class NormTable {
 public:
  NormTable(LatticeSpec spec, double X, std::vector<NormEntry> entries)
      : spec_(spec), X_(X), entries_(std::move(entries)) {
    cumulative_.reserve(entries_.size());
    std::int64_t acc = 0;
    for (const auto& e : entries_) cumulative_.push_back(acc += e.multiplicity);
  }

  const LatticeSpec& spec() const noexcept { return spec_; }
  double X() const noexcept { return X_; }
  const std::vector<NormEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const NormEntry& operator[](std::size_t i) const { return entries_[i]; }

  /// Sum of multiplicities of entries [0, i].
  std::int64_t cumulative(std::size_t i) const { return cumulative_[i]; }

  /// Number of entries with norm <= x.
  std::size_t index_upto(double x) const {
    auto it = std::upper_bound(entries_.begin(), entries_.end(), x,
                               [](double v, const NormEntry& e) { return v < e.norm; });
    return static_cast<std::size_t>(it - entries_.begin());
  }

 private:
  LatticeSpec spec_;
  double X_;
  std::vector<NormEntry> entries_;
  std::vector<std::int64_t> cumulative_;
};

inline NormTable build_norm_table(const LatticeSpec& spec, double X, const TableOptions& opt = {}) {
  if (!(X >= 0.0)) throw DomainError("X must be nonnegative");
  if (X > opt.max_X) throw CapacityError("X exceeds the table capacity " + fmt17(opt.max_X));

  const std::int64_t mb = spec.m_bound(X);
  const std::int64_t nb = spec.n_bound(X);
  spec.key(mb, nb);  // throws on overflow of the largest key that can occur

  struct Site {
    NormKey key;
    double norm;
    std::int64_t m, n;
  };
  std::vector<Site> sites;
  sites.reserve(static_cast<std::size_t>(std::numbers::pi * X / 4.0 + 4.0 * (mb + nb) + 8));
  for (std::int64_t m = 0; m <= mb; ++m) {
    for (std::int64_t n = 0; n <= nb; ++n) {
      const double nm = spec.norm(m, n);
      if (nm > X) break;
      sites.push_back({spec.key(m, n), nm, m, n});
    }
  }
  std::sort(sites.begin(), sites.end(), [](const Site& x, const Site& y) {
    if (x.norm != y.norm) return x.norm < y.norm;
    if (x.key != y.key) return x.key < y.key;
    if (x.m != y.m) return x.m < y.m;
    return x.n < y.n;
  });

  std::vector<NormEntry> entries;
  std::vector<LatticeVector> reps;
  for (std::size_t i = 0; i < sites.size();) {
    std::size_t j = i;
    NormEntry e;
    e.key = sites[i].key;
    e.norm = spec.norm_of_key(e.key);
    reps.clear();
    for (; j < sites.size() && sites[j].key == e.key; ++j) {
      const auto& s = sites[j];
      e.multiplicity += (s.m > 0 ? 2 : 1) * (s.n > 0 ? 2 : 1);
      if (opt.representative_cap == 0) continue;
      for (int sm : {-1, 1}) {
        if (s.m == 0 && sm < 0) continue;
        for (int sn : {-1, 1}) {
          if (s.n == 0 && sn < 0) continue;
          reps.push_back({sm * s.m, sn * s.n, e.norm, e.key});
        }
      }
    }
    if (!reps.empty()) {
      std::sort(reps.begin(), reps.end(), [](const LatticeVector& x, const LatticeVector& y) {
        return x.m != y.m ? x.m < y.m : x.n < y.n;
      });
      if (reps.size() > opt.representative_cap) reps.resize(opt.representative_cap);
      e.representatives = reps;
    }
    entries.push_back(std::move(e));
    i = j;
  }
  return NormTable(spec, X, std::move(entries));
}

struct NormCounts {
  std::int64_t with_multiplicity = 0;
  std::int64_t distinct = 0;
};

/// Lattice-point count N(x) and distinct-norm count for norms <= x (both include 0).
inline NormCounts count_upto(const NormTable& table, double x) {
  if (!(x >= 0.0) || x > table.X())
    throw RangeError("count_upto: x=" + fmt17(x) + " outside [0, " + fmt17(table.X()) + "]");
  const std::size_t k = table.index_upto(x);
  if (k == 0) return {};
  return {table.cumulative(k - 1), static_cast<std::int64_t>(k)};
}

/// N(x) - pi x.
inline double weyl_residual(const NormTable& table, double x) {
  if (!(x > 0.0)) throw RangeError("weyl_residual: x must be positive");
  return static_cast<double>(count_upto(table, x).with_multiplicity) - std::numbers::pi * x;
}

/// Calls fn(m, n) for every lattice vector with lo < |xi|^2 < hi (open shell).
template <class Fn>
void for_each_in_open_shell(const LatticeSpec& spec, double lo, double hi, Fn&& fn) {
  if (!(hi > 0.0) || !(hi > lo)) return;
  const std::int64_t mb = spec.m_bound(hi);
  for (std::int64_t m = -mb; m <= mb; ++m) {
    const double am = spec.a2() * static_cast<double>(m) * static_cast<double>(m);
    if (am >= hi + 1e-9 * hi) continue;
    const double top = std::sqrt(std::max(hi - am, 0.0)) * spec.a();
    const double bottom = lo > am ? std::sqrt(lo - am) * spec.a() : 0.0;
    const std::int64_t nhi = static_cast<std::int64_t>(std::ceil(top)) + 1;
    const std::int64_t nlo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(bottom)) - 1);
    for (std::int64_t n = nlo; n <= nhi; ++n) {
      const double nm = spec.norm(m, n);
      if (nm <= lo || nm >= hi) continue;
      fn(m, n);
      if (n != 0) fn(m, -n);
    }
  }
}

/// The annulus A(lambda, L): vectors with lambda - L < |xi|^2 < lambda + L,
/// ordered by key, then m, then n.
inline std::vector<LatticeVector> annulus_points(const LatticeSpec& spec, double lambda, double L) {
  if (!(lambda > 0.0) || !(L > 0.0)) throw DomainError("annulus_points: lambda and L must be positive");
  std::vector<LatticeVector> out;
  for_each_in_open_shell(spec, lambda - L, lambda + L,
                         [&](std::int64_t m, std::int64_t n) { out.push_back(spec.vector(m, n)); });
  std::sort(out.begin(), out.end(), [](const LatticeVector& x, const LatticeVector& y) {
    if (x.key != y.key) return x.key < y.key;
    if (x.m != y.m) return x.m < y.m;
    return x.n < y.n;
  });
  return out;
}

struct Gap {
  double n_k = 0.0;
  double gap = 0.0;
};

struct GapReport {
  double epsilon = 0.25;
  std::vector<Gap> gaps;  ///< over consecutive positive norms
  double max_gap = 0.0;
  double mean_gap = 0.0;
  double fraction_small = 0.0;  ///< share of gaps with gap <= n_k^epsilon
  double max_quarter_ratio = 0.0;  ///< max over k of gap / n_k^(1/4)
};

inline GapReport gap_stats(const NormTable& table, double epsilon = 0.25) {
  const auto& e = table.entries();
  std::size_t first = 0;
  while (first < e.size() && e[first].norm <= 0.0) ++first;
  if (e.size() < first + 2) throw DomainError("gap_stats: need at least two positive norms");
  GapReport r;
  r.epsilon = epsilon;
  std::size_t small = 0;
  for (std::size_t k = first; k + 1 < e.size(); ++k) {
    const double g = table.spec().norm_difference(e[k + 1].key, e[k].key);
    r.gaps.push_back({e[k].norm, g});
    r.max_gap = std::max(r.max_gap, g);
    r.max_quarter_ratio = std::max(r.max_quarter_ratio, g / std::pow(e[k].norm, 0.25));
    if (g <= std::pow(e[k].norm, epsilon)) ++small;
  }
  const double K = static_cast<double>(e.size() - first);
  r.mean_gap = (e.back().norm - e[first].norm) / (K - 1.0);
  r.fraction_small = static_cast<double>(small) / static_cast<double>(r.gaps.size());
  return r;
}

struct WindowFraction {
  double lo = 0.0;  ///< window [lo, 2 lo)
  std::size_t count = 0;
  double fraction = 0.0;
};

/// Share of small gaps (gap <= n_k^epsilon) per dyadic window of n_k.
inline std::vector<WindowFraction> gap_fraction_by_window(const GapReport& r) {
  std::vector<WindowFraction> out;
  std::vector<std::size_t> small;
  for (const auto& g : r.gaps) {
    const int j = static_cast<int>(std::floor(std::log2(g.n_k)));
    const double lo = std::ldexp(1.0, j);
    if (out.empty() || out.back().lo != lo) {
      out.push_back({lo, 0, 0.0});
      small.push_back(0);
    }
    ++out.back().count;
    if (g.gap <= std::pow(g.n_k, r.epsilon)) ++small.back();
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].fraction = static_cast<double>(small[i]) / static_cast<double>(out[i].count);
  return out;
}

inline void write_norms_csv(std::ostream& os, const NormTable& table) {
  os << "norm,key,multiplicity\n";
  for (const auto& e : table.entries())
    os << fmt17(e.norm) << ',' << table.spec().format_key(e.key) << ',' << e.multiplicity << '\n';
}

inline void write_gaps_csv(std::ostream& os, const GapReport& r) {
  os << "n_k,gap\n";
  for (const auto& g : r.gaps) os << fmt17(g.n_k) << ',' << fmt17(g.gap) << '\n';
}

}  // namespace scatterer
