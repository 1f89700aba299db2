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

// Runs the acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../tests/quadrature_oracle.hpp"
#include "scatterer.hpp"
#include "scatterer/cli.hpp"

namespace {

using namespace scatterer;

constexpr double kLandau = 0.76422365358922066;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> info;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << ']';
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_seconds, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_seconds > 0) o.require(secs < budget_seconds, "runtime over " + fmt17(budget_seconds) + " s");
  failures += !o.pass;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << id << "  " << name << " |" << o.detail.str()
            << " (" << std::fixed << std::setprecision(1) << secs << " s)" << std::defaultfloat
            << std::setprecision(6) << '\n';
  for (const auto& line : o.info) std::cout << "          info: " << line << '\n';
  std::cout.flush();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void rank_one(Outcome& o) {
  const FiniteModel demo{{0.0, 1.0}, {1.0, 1.0}, 1.0};
  const auto sol = solve_secular(demo);
  const double d0 = std::abs(sol.new_eigenvalues[0] - (3 - std::sqrt(5.0)) / 2);
  const double d1 = std::abs(sol.new_eigenvalues[1] - (3 + std::sqrt(5.0)) / 2);
  o.require(d0 <= 1e-12 && d1 <= 1e-12, "analytic 2x2 case");
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> dim(2, 64);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) worst = std::max(worst, oracle_delta(random_model(rng, dim(rng))));
  o.require(worst <= 1e-9, "dense oracle");
  o.detail << " analytic delta " << sci(std::max(d0, d1)) << ", max oracle delta over 100 models " << sci(worst);
}

void interlacing(Outcome& o) {
  const auto spec = LatticeSpec::square();
  const double X = 1e4;
  const NormTable table = build_norm_table(spec, X + 128);
  double worst = 0.0;
  std::size_t checked = 0;
  for (double phi : {0.0, std::numbers::pi / 2, -std::numbers::pi / 2, 2.8}) {
    SpectralParams p;
    p.phi = phi;
    const auto s = perturbed_spectrum(table, p, X);
    const double scale = std::max(1.0, std::abs(s.rhs));
    for (const auto& e : s.entries) {
      o.require(e.lower < e.lambda && e.lambda < e.upper, "strict interlacing at k=" + std::to_string(e.k));
      worst = std::max(worst, std::abs(spectral_function(spec, table, e.lambda, p) - s.rhs) / scale);
      ++checked;
    }
  }
  o.require(worst <= 1e-8, "residual");
  o.detail << " " << checked << " eigenvalues over 4 phases, max relative residual " << sci(worst);
}

void phase_monotone(Outcome& o) {
  const auto spec = LatticeSpec::square();
  const NormTable table = build_norm_table(spec, 2200);
  const std::vector<double> phis{-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0};
  std::vector<PerturbedSpectrum> runs;
  for (double phi : phis) {
    SpectralParams p;
    p.phi = phi;
    runs.push_back(perturbed_spectrum(table, p, 2000));
  }
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, runs[0].entries.size() - 1);
  std::size_t pairs = 0;
  for (int c = 0; c < 50; ++c) {
    const std::size_t i = pick(rng);
    for (std::size_t j = 1; j < runs.size(); ++j) {
      o.require(runs[j - 1].entries[i].lambda < runs[j].entries[i].lambda, "monotone at k=" + std::to_string(i));
      ++pairs;
    }
  }
  SpectralParams p;
  p.phi = 2.0 * std::atan(1e6);
  const auto s = perturbed_spectrum(table, p, 2000);
  double worst = 0.0;
  for (const auto& e : s.entries) worst = std::max(worst, e.upper - e.lambda);
  o.require(worst < 1e-3, "phi -> pi limit");
  o.detail << " " << pairs << " ordered pairs; at tan(phi/2)=1e6 max n_{k+1} - lambda_k = " << sci(worst);
}

void landau(Outcome& o) {
  const std::int64_t x = 1000000;
  std::vector<char> hit(x + 1, 0);
  for (std::int64_t a = 0; a * a <= x; ++a) {
    for (std::int64_t b = a; a * a + b * b <= x; ++b) hit[a * a + b * b] = 1;
  }
  std::int64_t sieve = 0;
  for (char h : hit) sieve += h;
  const auto table = build_norm_table(LatticeSpec::square(), static_cast<double>(x));
  const std::int64_t got = count_upto(table, static_cast<double>(x)).distinct;
  o.require(got == sieve, "count equals sieve");
  const double ratio = static_cast<double>(got) / (kLandau * x / std::sqrt(std::log(static_cast<double>(x))));
  o.require(ratio >= 1.0 && ratio <= 1.12, "Landau ratio in [1.00, 1.12]");
  o.detail << " distinct norms <= 1e6 = " << got << " (sieve " << sieve << "), ratio " << fmt17(ratio);
}

void irrational_weyl(Outcome& o) {
  const auto spec = LatticeSpec::irrational(std::pow(2.0, 0.25) * 1.0000001);
  const double X = 1e4;
  const auto s = perturbed_spectrum(spec, SpectralParams{}, X);
  double n = 0;
  for (const auto& e : s.entries) n += e.lambda <= X;
  const double ratio = n / (std::numbers::pi / 4 * X);
  o.require(std::abs(ratio - 1.0) <= 0.1, "within 10% of (pi/4) x");
  o.detail << " lattice " << spec.to_string() << ", count " << n << ", ratio to (pi/4)x " << fmt17(ratio);
}

void annulus(Outcome& o) {
  const auto spec = LatticeSpec::square();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lam(1.0, 1e5), frac(0.0, 1.0);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const double lambda = lam(rng);
    const double L = std::pow(lambda, 0.6 * frac(rng));
    const auto pts = annulus_points(spec, lambda, L);
    std::set<std::pair<std::int64_t, std::int64_t>> got;
    for (const auto& p : pts) got.insert({p.m, p.n});
    std::set<std::pair<std::int64_t, std::int64_t>> want;
    const auto b = static_cast<std::int64_t>(std::sqrt(lambda + L)) + 1;
    for (std::int64_t m = -b; m <= b; ++m) {
      for (std::int64_t n = -b; n <= b; ++n) {
        const double v = static_cast<double>(m * m + n * n);
        if (v > lambda - L && v < lambda + L) want.insert({m, n});
      }
    }
    o.require(got == want && got.size() == pts.size(), "brute force at lambda=" + fmt17(lambda));
    const double dev = std::abs(static_cast<double>(pts.size()) - 2 * std::numbers::pi * L);
    o.require(dev <= 16 * (std::sqrt(lambda + L) + 1), "2 pi L bound at lambda=" + fmt17(lambda));
    worst = std::max(worst, dev / (16 * (std::sqrt(lambda + L) + 1)));
  }
  o.detail << " 100 cases match enumeration, max |#A - 2 pi L| / bound = " << fmt17(worst);
}

void truncation(Outcome& o, const PerturbedSpectrum& s) {
  const auto spec = s.spec;
  const auto g = lambda_g_filter(s, 0.25);
  const auto window = [&](double lo) {
    std::vector<double> d;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < g.entries.size(); ++i) {
      const double lam = s.entries[i].lambda;
      if (g.entries[i].kept && lam >= lo && lam < 2 * lo) {
        d.push_back(truncation_error(GreensContext(spec, lam), std::pow(lam, 0.4)).defect);
        idx.push_back(i);
      }
    }
    return std::pair{median(d), idx};
  };
  const auto [lo_med, lo_idx] = window(256);
  const auto [hi_med, hi_idx] = window(4096);
  o.require(hi_med < lo_med, "median defect decreases");
  double worst = 0.0;
  for (const auto* idx : {&lo_idx, &hi_idx}) {
    for (std::size_t j = 0; j < 5; ++j) {
      const double lam = s.entries[(*idx)[j * idx->size() / 5]].lambda;
      const auto t = truncate(GreensContext(spec, lam), std::pow(lam, 0.4));
      worst = std::max(worst, std::abs(density_grid(t, 512).mean() - 1.0));
    }
  }
  o.require(worst <= 1e-3, "Parseval on 512^2 grid");
  std::size_t below = 0, kept = 0;
  double lowest = 1e300;
  for (std::size_t i = 0; i < g.entries.size(); ++i) {
    if (!g.entries[i].kept) continue;
    const double lam = s.entries[i].lambda;
    const double ratio = std::sqrt(green_norm_sq(GreensContext(spec, lam), 1e-10)) * std::pow(lam, 0.25);
    below += ratio < 1.0;
    lowest = std::min(lowest, ratio);
    ++kept;
  }
  o.info.push_back("||G|| >= lambda^(-1/4) on Lambda_g (X=1e4): fails for " + std::to_string(below) + " of " +
                   std::to_string(kept) + ", min ratio " + fmt17(lowest));
  o.detail << " median defect " << fmt17(lo_med) << " on [2^8,2^9) vs " << fmt17(hi_med)
           << " on [2^12,2^13); max |mean |g|^2 - 1| on 512^2 = " << sci(worst);
}

void matrix_contracts(Outcome& o, const PerturbedSpectrum& s) {
  const auto spec = s.spec;
  const auto lam = [&](std::size_t i) { return s.entries[i].lambda; };
  for (std::size_t i : {0u, 10u, 500u, 2000u}) {
    const GreensContext ctx(spec, lam(i), {0.3, 0.7});
    o.require(matrix_element(ctx, Cutoff::full(), spec.vector(0, 0)) == std::complex<double>(1.0), "zeta=0 full");
    o.require(matrix_element(truncate(ctx, 5.0), spec.vector(0, 0)) == std::complex<double>(1.0), "zeta=0 truncated");
  }
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> pick(0, s.entries.size() - 1);
  std::uniform_int_distribution<int> z(-4, 4);
  std::uniform_real_distribution<double> Lexp(0.1, 0.7), x(0.0, 2 * std::numbers::pi);
  double biggest = 0.0;
  for (int c = 0; c < 1000;) {
    const double l = lam(pick(rng));
    const GreensContext ctx(spec, l, {x(rng), x(rng)});
    const std::int64_t zm = z(rng), zn = z(rng);
    if (zm == 0 && zn == 0) continue;
    const auto zeta = spec.vector(zm, zn);
    const std::complex<double> v =
        c % 2 ? matrix_element(ctx, Cutoff::full(), zeta) : matrix_element(truncate(ctx, std::pow(l, Lexp(rng))), zeta);
    biggest = std::max(biggest, std::abs(v));
    ++c;
  }
  o.require(biggest <= 1.0 + 1e-12, "|m.e.| <= 1");
  double shift = 0.0;
  const auto zeta = spec.vector(2, -1);
  for (std::size_t i : {0u, 30u, 700u}) {
    const GreensContext a(spec, lam(i), {0.0, 0.0}), b(spec, lam(i), {1.3, -0.4});
    for (const Cutoff cut : {Cutoff::full(), Cutoff::annulus(6.0)}) {
      shift = std::max(shift, std::abs(std::abs(matrix_element(a, cut, zeta)) - std::abs(matrix_element(b, cut, zeta))));
    }
  }
  o.require(shift <= 1e-12, "x0-shift modulus");
  const std::pair<int, int> zetas[] = {{1, 0}, {1, 1}, {0, 1}, {2, 1}, {1, 0}};
  double quad = 0.0, coarse = 0.0;
  std::ostringstream diffs;
  for (std::size_t k = 0; k < 5; ++k) {
    const GreensContext ctx(spec, lam(k));
    const auto zk = spec.vector(zetas[k].first, zetas[k].second);
    const auto full = matrix_element(ctx, Cutoff::full(), zk);
    quad = std::max(quad, std::abs(full - testing::quadrature_matrix_element(ctx, zk, 2048)));
    const double d512 = std::abs(full - testing::quadrature_matrix_element(ctx, zk, 512));
    coarse = std::max(coarse, d512);
    diffs << (k ? ", " : "") << sci(d512);
  }
  o.require(quad <= 1e-6, "FULL vs quadrature");
  o.detail << " max |m.e.| over 1000 cases with zeta != 0 " << fmt17(biggest) << ", x0-shift " << sci(shift)
           << ", FULL vs 2048^2 quadrature " << sci(quad);
  o.info.push_back("FULL vs 512^2 quadrature per case: " + diffs.str() + " (the 512^2 grid keeps |m|,|n| <= 255)");
}

void equidistribution(Outcome& o, const PerturbedSpectrum& s) {
  const auto spec = s.spec;
  const SieveParams p;
  std::ostringstream ratios;
  for (const auto& zeta : {spec.vector(0, 1), spec.vector(1, 1)}) {
    const auto r = cli::equidist(s, zeta, p, 16, 1e-10);
    std::ostringstream meds;
    for (const auto& w : r.windows) meds << ' ' << sci(w.median_abs);
    o.info.push_back("zeta=(" + std::to_string(zeta.m) + "," + std::to_string(zeta.n) + ") medians from [16):" +
                     meds.str() + ", non-decreasing steps " + std::to_string(r.flagged));
    double m8 = 0, m12 = 0;
    for (const auto& w : r.windows) {
      if (w.lo == 256) m8 = w.median_abs;
      if (w.lo == 4096) m12 = w.median_abs;
    }
    o.require(m8 >= 2 * m12 && m12 > 0, "decay factor for zeta=(" + std::to_string(zeta.m) + "," +
                                            std::to_string(zeta.n) + ")");
    ratios << " zeta=(" << zeta.m << "," << zeta.n << "): median " << sci(m8) << " -> " << sci(m12) << " (factor "
           << fmt17(m8 / m12) << ");";
  }
  o.detail << ratios.str();
}

void sieve_soundness(Outcome& o, const PerturbedSpectrum& s) {
  const auto spec = s.spec;
  const SieveParams p;
  const auto g = lambda_g_filter(s, p.epsilon_gap);
  for (std::size_t i = 0; i < g.entries.size(); ++i) {
    if (!recheck_gap(s, g.entries[i], i, p.epsilon_gap)) o.require(false, "gap witness");
  }
  std::ostringstream summary;
  for (const auto& zeta : {spec.vector(1, 0), spec.vector(1, 1), spec.vector(0, 1)}) {
    const auto r = lambda_zeta_filter(s, zeta, p);
    std::size_t rechecked = 0;
    for (const auto& e : r.entries) {
      const bool ok = e.kept ? recheck_kept(spec, e.lambda, zeta, p.delta) : recheck_vector_witness(spec, e, p.delta);
      if (!ok) o.require(false, "strip witness at " + fmt17(e.lambda));
      ++rechecked;
    }
    const std::string tag = "(" + std::to_string(zeta.m) + "," + std::to_string(zeta.n) + ")";
    double prev = 0.0;
    bool all_windows = true;
    std::ostringstream dens;
    for (const auto& w : r.windows) {
      dens << ' ' << std::setprecision(3) << w.density();
      if (w.density() < prev) all_windows = false;
      if (w.lo >= 256 && w.density() < prev) o.require(false, "density non-decreasing for " + tag);
      prev = w.density();
    }
    o.require(r.excluded_exponent < 1.0, "exponent for " + tag);
    summary << ' ' << tag << " exponent " << std::setprecision(3) << r.excluded_exponent << ';';
    o.info.push_back("Lambda_" + tag + " window densities from [" + fmt17(r.windows.front().lo) + "):" + dens.str() +
                     (all_windows ? " (non-decreasing over all windows)" : " (non-decreasing from [256) on)") +
                     "; rechecked " + std::to_string(rechecked) + " of " + std::to_string(r.total));
  }
  std::vector<SieveReport> js;
  for (double J : {1.0, 2.0, 3.0}) js.push_back(lambda_J_intersection(s, J, p));
  for (std::size_t j = 1; j < js.size(); ++j) {
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      if (js[j].entries[i].kept && !js[j - 1].entries[i].kept) o.require(false, "J nesting");
    }
  }
  summary << " Lambda_J densities " << std::setprecision(4) << js[0].density << ", " << js[1].density << ", "
          << js[2].density;
  o.detail << summary.str() << std::setprecision(6);
}

void figure(Outcome& o) {
  const auto dir = std::filesystem::temp_directory_path() / "scatterer_acceptance";
  std::ostringstream out, err;
  const std::string d = dir.string();
  const char* argv[] = {"scatterer", "--out", d.c_str(), "specfun", "--lo", "0", "--hi", "60", "--samples", "6000"};
  o.require(cli::run(10, argv, out, err) == 0, "specfun command");
  std::ifstream is(dir / "specfun.csv");
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  o.require(line == "lambda,F", "CSV column header");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(is, line)) {
    const auto comma = line.find(',');
    rows.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  std::filesystem::remove_all(dir);
  std::set<double> want;
  for (int a = 0; a * a <= 60; ++a) {
    for (int b = 0; a * a + b * b <= 60; ++b) want.insert(a * a + b * b);
  }
  // F drops from +inf to -inf across each pole and is increasing elsewhere.
  std::set<double> poles;
  if (!rows.empty() && rows.front().second < 0 && rows.front().first < 0.05) poles.insert(0.0);
  std::vector<int> crossings{0};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double a = rows[i - 1].second, b = rows[i].second;
    if (a > 0 && b < 0) {
      poles.insert(std::round(0.5 * (rows[i - 1].first + rows[i].first)));
      crossings.push_back(0);
    } else if (a < 0 && b >= 0) {
      ++crossings.back();
    }
  }
  o.require(poles == want, "pole set");
  crossings.pop_back();
  bool one_each = !crossings.empty();
  for (int c : crossings) one_each = one_each && c == 1;
  o.require(one_each, "one sign change per interval");
  o.detail << " " << rows.size() << " rows, " << poles.size() << " poles {0,1,2,4,...," << *poles.rbegin() << "}, "
           << crossings.size() << " complete intervals with one sign change each";
}

}  // namespace

int main() {
  std::cout << "scatterer acceptance\n";
  criterion(1, "rank-one oracle", 10, rank_one);
  criterion(2, "interlacing and residual, X=1e4", 120, interlacing);
  criterion(3, "phase monotonicity", 0, phase_monotone);
  criterion(4, "Landau density at 1e6", 30, landau);
  criterion(5, "irrational Weyl law", 0, irrational_weyl);
  criterion(6, "annulus counts", 0, annulus);

  const PerturbedSpectrum s4 = perturbed_spectrum(LatticeSpec::square(), SpectralParams{}, 1e4);
  criterion(7, "truncation decay", 0, [&](Outcome& o) { truncation(o, s4); });
  criterion(8, "matrix-element contracts", 0, [&](Outcome& o) { matrix_contracts(o, s4); });
  criterion(9, "equidistribution trend", 600, [&](Outcome& o) { equidistribution(o, s4); });

  const PerturbedSpectrum s5 = perturbed_spectrum(LatticeSpec::square(), SpectralParams{}, 1e5);
  criterion(10, "sieve soundness, X=1e5", 0, [&](Outcome& o) { sieve_soundness(o, s5); });
  criterion(11, "spectral function figure on [0,60]", 0, figure);

  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << '\n';
  return failures;
}
