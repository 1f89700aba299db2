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

// Command-line experiments. Each command validates its whole configuration,
// runs, and writes CSV or JSON files into the output directory. Every file
// starts with a header line carrying the parameters and their FNV-1a hash.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scatterer/errors.hpp"
#include "scatterer/format.hpp"
#include "scatterer/greens.hpp"
#include "scatterer/lattice.hpp"
#include "scatterer/rankone.hpp"
#include "scatterer/sieves.hpp"
#include "scatterer/spectral.hpp"

namespace scatterer::cli {

struct RunConfig {
  std::string lattice = "1/1";
  double phi = 0.0;
  double X = 100.0;
  double delta = 0.17;
  double epsilon_gap = 0.25;
  double theta = kDefaultTheta;
  double tail_tol = 1e-6;
  std::uint64_t seed = 1;
  std::string output_dir = ".";

  LatticeSpec spec() const { return LatticeSpec::parse(lattice); }

  SpectralParams spectral() const {
    SpectralParams p;
    p.phi = phi;
    p.theta = theta;
    p.tail_tol = tail_tol;
    return p;
  }

  SieveParams sieve() const { return {delta, epsilon_gap, theta}; }

  void validate() const {
    spec();
    if (!(X >= 0.0) || !std::isfinite(X)) throw DomainError("X must be nonnegative");
    spectral().validate();
    sieve().validate();
  }
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Header for one output file: "# scatterer <cmd> config=<hash> key=value ...".
class Header {
 public:
  Header(std::string command, const RunConfig& c) : command_(std::move(command)) {
    add("lattice", c.spec().to_string());
    add("phi", fmt17(c.phi));
    add("X", fmt17(c.X));
    add("delta", fmt17(c.delta));
    add("eps_gap", fmt17(c.epsilon_gap));
    add("theta", fmt17(c.theta));
    add("tail_tol", fmt17(c.tail_tol));
    add("seed", std::to_string(c.seed));
  }

  Header& add(const std::string& key, const std::string& value) {
    params_ += ' ' + key + '=' + value;
    return *this;
  }

  std::string hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(command_ + params_)));
    return buf;
  }

  std::string line() const { return "scatterer " + command_ + " config=" + hash() + params_; }

 private:
  std::string command_;
  std::string params_;
};

inline std::filesystem::path output_path(const RunConfig& c, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + c.output_dir + "': " + ec.message());
  return std::filesystem::path(c.output_dir) / name;
}

template <class Body>
void write_csv(const RunConfig& c, const std::string& name, const Header& h, Body&& body) {
  const auto path = output_path(c, name);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "# " << h.line() << '\n';
  body(os);
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

/// JSON summaries carry the header as their first member.
inline void write_json(const RunConfig& c, const std::string& name, const Header& h, const nlohmann::json& body) {
  nlohmann::ordered_json j;
  j["header"] = h.line();
  for (const auto& [k, v] : body.items()) j[k] = v;
  const auto path = output_path(c, name);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

inline LatticeVector parse_zeta(const LatticeSpec& spec, const std::string& text) {
  const auto comma = text.find(',');
  std::int64_t m = 0, n = 0;
  try {
    if (comma == std::string::npos) throw std::invalid_argument("");
    std::size_t pm = 0, pn = 0;
    const std::string ms = text.substr(0, comma), ns = text.substr(comma + 1);
    m = std::stoll(ms, &pm);
    n = std::stoll(ns, &pn);
    if (pm != ms.size() || pn != ns.size()) throw std::invalid_argument("");
  } catch (const std::logic_error&) {
    throw DomainError("zeta: cannot parse '" + text + "' (expected m,n)");
  }
  return spec.vector(m, n);
}

inline std::string zeta_text(const LatticeVector& z) { return std::to_string(z.m) + ',' + std::to_string(z.n); }

// ---------------------------------------------------------------------------

inline void cmd_norms(const RunConfig& c, std::ostream& out) {
  c.validate();
  const LatticeSpec spec = c.spec();
  const NormTable table = build_norm_table(spec, c.X);
  const Header h("norms", c);
  write_csv(c, "norms.csv", h, [&](std::ostream& os) { write_norms_csv(os, table); });
  out << "distinct norms <= " << fmt17(c.X) << " (including 0): " << table.size() << '\n';
  if (table.size() >= 3) {
    const GapReport r = gap_stats(table, c.epsilon_gap);
    write_csv(c, "gaps.csv", h, [&](std::ostream& os) { write_gaps_csv(os, r); });
    out << "gaps: " << r.gaps.size() << ", max " << fmt17(r.max_gap) << ", mean " << fmt17(r.mean_gap)
        << ", fraction <= n^eps " << fmt17(r.fraction_small) << '\n';
  } else {
    out << "gaps: fewer than two positive norms, no gap report\n";
  }
}

struct SpecfunOptions {
  double lo = 0.0;
  double hi = 60.0;
  std::size_t samples = 6000;
};

inline void cmd_specfun(const RunConfig& c, const SpecfunOptions& o, std::ostream& out) {
  c.validate();
  if (!(o.hi > o.lo) || !(o.lo >= 0.0)) throw DomainError("specfun: need 0 <= lo < hi");
  if (o.samples == 0) throw DomainError("specfun: samples must be positive");
  const LatticeSpec spec = c.spec();
  const SpectralParams p = c.spectral();
  const NormTable table = build_norm_table(spec, o.hi + 2.0 * p.window);
  const auto rows = specfun_scan(spec, table, uniform_grid(o.lo, o.hi, o.samples), p);
  Header h("specfun", c);
  h.add("lo", fmt17(o.lo)).add("hi", fmt17(o.hi)).add("samples", std::to_string(o.samples));
  write_csv(c, "specfun.csv", h, [&](std::ostream& os) { write_specfun_csv(os, rows); });
  out << "c0 = " << fmt17(compute_c0(spec, p.tail_tol)) << ", rows: " << rows.size() << '\n';
}

inline PerturbedSpectrum spectrum_for(const RunConfig& c) {
  const SpectralParams p = c.spectral();
  const NormTable table = build_norm_table(c.spec(), c.X + 2.0 * p.window);
  return perturbed_spectrum(table, p, c.X);
}

inline void cmd_spectrum(const RunConfig& c, std::ostream& out) {
  c.validate();
  const PerturbedSpectrum s = spectrum_for(c);
  write_csv(c, "spectrum.csv", Header("spectrum", c), [&](std::ostream& os) { write_spectrum_csv(os, s); });
  double worst = 0.0;
  for (const auto& e : s.entries) worst = std::max(worst, e.residual);
  out << "eigenvalues: " << s.entries.size() << ", c0 = " << fmt17(s.c0) << ", max residual " << fmt17(worst)
      << '\n';
}

struct MatrixOptions {
  std::vector<std::string> zetas{"1,0"};
  std::optional<double> L;
  std::optional<double> L_exponent;
};

inline void cmd_matrix(const RunConfig& c, const MatrixOptions& o, std::ostream& out) {
  c.validate();
  if (o.L && o.L_exponent) throw DomainError("matrix: --L and --L-exponent are exclusive");
  if (o.L && !(*o.L > 0.0)) throw DomainError("matrix: L must be positive");
  if (o.L_exponent && !(*o.L_exponent > 0.0)) throw DomainError("matrix: L exponent must be positive");
  const LatticeSpec spec = c.spec();
  std::vector<LatticeVector> zetas;
  for (const auto& z : o.zetas) zetas.push_back(parse_zeta(spec, z));

  const PerturbedSpectrum s = spectrum_for(c);
  std::vector<MatrixElementRow> rows(s.entries.size() * zetas.size());
  parallel_for(s.entries.size(), [&](std::size_t i) {
    const double lambda = s.entries[i].lambda;
    const GreensContext ctx(spec, lambda);
    std::optional<double> L = o.L;
    if (o.L_exponent) L = std::pow(lambda, *o.L_exponent);
    const Cutoff cut = L ? Cutoff::annulus(*L) : Cutoff::full();
    std::optional<GreensTruncation> t;
    if (L) t = truncate(ctx, *L, c.tail_tol);
    for (std::size_t j = 0; j < zetas.size(); ++j) {
      const auto v = t ? matrix_element(*t, zetas[j]) : matrix_element(ctx, cut, zetas[j], c.tail_tol);
      rows[i * zetas.size() + j] = {lambda, zetas[j].m, zetas[j].n, L, v};
    }
  });
  Header h("matrix", c);
  std::string zs;
  for (const auto& z : zetas) zs += (zs.empty() ? "" : ";") + zeta_text(z);
  h.add("zeta", zs);
  h.add("L", o.L ? fmt17(*o.L) : o.L_exponent ? "lambda^" + fmt17(*o.L_exponent) : "full");
  write_csv(c, "matrix.csv", h, [&](std::ostream& os) { write_matrix_csv(os, rows); });
  out << "matrix elements: " << rows.size() << '\n';
}

struct EquidistWindow {
  double lo = 0.0;
  std::size_t count = 0;
  double median_abs = 0.0;
  bool non_decreasing = false;
};

struct EquidistResult {
  std::vector<MatrixElementRow> rows;
  std::vector<EquidistWindow> windows;
  std::size_t flagged = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// |<e_zeta g, g>| with full g over Lambda_g and Lambda_zeta, by dyadic window
/// [2^j, 2^(j+1)) for 2^j >= min_window and 2^(j+1) <= X.
inline EquidistResult equidist(const PerturbedSpectrum& s, const LatticeVector& zeta, const SieveParams& p,
                               double min_window, double tail_tol) {
  const SieveReport g = lambda_g_filter(s, p.epsilon_gap);
  const SieveReport z = lambda_zeta_filter(s, zeta, p);
  std::vector<double> lambdas;
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    const double lambda = s.entries[i].lambda;
    if (g.entries[i].kept && z.entries[i].kept && lambda >= min_window) lambdas.push_back(lambda);
  }
  EquidistResult r;
  r.rows.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    const GreensContext ctx(s.spec, lambdas[i]);
    r.rows[i] = {lambdas[i], zeta.m, zeta.n, std::nullopt, matrix_element(ctx, Cutoff::full(), zeta, tail_tol)};
  });
  for (double lo = min_window; 2.0 * lo <= s.X; lo *= 2.0) {
    std::vector<double> a;
    for (const auto& row : r.rows) {
      if (row.lambda >= lo && row.lambda < 2.0 * lo) a.push_back(std::abs(row.value));
    }
    EquidistWindow w{lo, a.size(), median(a), false};
    if (!r.windows.empty() && w.median_abs >= r.windows.back().median_abs) {
      w.non_decreasing = true;
      ++r.flagged;
    }
    r.windows.push_back(w);
  }
  return r;
}

struct EquidistOptions {
  std::string zeta = "1,0";
  double min_window = 16.0;
};

inline void cmd_equidist(const RunConfig& c, const EquidistOptions& o, std::ostream& out) {
  c.validate();
  if (!(o.min_window >= 1.0)) throw DomainError("equidist: min-window must be >= 1");
  const LatticeVector zeta = parse_zeta(c.spec(), o.zeta);
  if (zeta.m == 0 && zeta.n == 0) throw DomainError("S_zeta: zeta must be nonzero");
  const PerturbedSpectrum s = spectrum_for(c);
  const EquidistResult r = equidist(s, zeta, c.sieve(), o.min_window, 1e-10);
  Header h("equidist", c);
  h.add("zeta", zeta_text(zeta)).add("min_window", fmt17(o.min_window));
  write_csv(c, "equidist.csv", h, [&](std::ostream& os) { write_matrix_csv(os, r.rows); });
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : r.windows) {
    windows.push_back({{"lo", w.lo},
                       {"hi", 2.0 * w.lo},
                       {"count", w.count},
                       {"median_abs", w.median_abs},
                       {"non_decreasing", w.non_decreasing}});
  }
  write_json(c, "equidist.json", h,
             {{"zeta", {zeta.m, zeta.n}},
              {"samples", r.rows.size()},
              {"windows", windows},
              {"flagged_non_decreasing", r.flagged},
              {"total_windows", r.windows.size()}});
  out << "windows: " << r.windows.size() << ", flagged non-decreasing: " << r.flagged << '\n';
  for (const auto& w : r.windows) {
    out << "  [" << fmt17(w.lo) << ", " << fmt17(2.0 * w.lo) << ") n=" << w.count
        << " median |m.e.| = " << fmt17(w.median_abs) << (w.non_decreasing ? "  (non-decreasing)" : "") << '\n';
  }
}

struct SieveOptions {
  std::string filter = "g";
  std::string zeta = "1,0";
  double J = 1.0;
};

inline void cmd_sieve(const RunConfig& c, const SieveOptions& o, std::ostream& out) {
  c.validate();
  if (o.filter != "g" && o.filter != "zeta" && o.filter != "J") {
    throw DomainError("sieve: filter must be g, zeta or J");
  }
  const LatticeVector zeta = parse_zeta(c.spec(), o.zeta);
  if (o.filter == "zeta" && zeta.m == 0 && zeta.n == 0) throw DomainError("S_zeta: zeta must be nonzero");
  if (o.filter == "J" && !(o.J >= 1.0)) throw DomainError("J must be >= 1");
  const PerturbedSpectrum s = spectrum_for(c);
  Header h("sieve", c);
  h.add("filter", o.filter);
  SieveReport r;
  if (o.filter == "g") {
    r = lambda_g_filter(s, c.epsilon_gap);
  } else if (o.filter == "zeta") {
    h.add("zeta", zeta_text(zeta));
    r = lambda_zeta_filter(s, zeta, c.sieve());
  } else {
    h.add("J", fmt17(o.J));
    r = lambda_J_intersection(s, o.J, c.sieve());
  }
  write_csv(c, "sieve.csv", h, [&](std::ostream& os) { write_sieve_csv(os, r); });
  write_json(c, "sieve.json", h, sieve_summary(r));
  out << r.name << ": kept " << r.kept << " of " << r.total << ", density " << fmt17(r.density)
      << ", excluded exponent " << fmt17(r.excluded_exponent) << '\n';
}

struct RankoneOptions {
  bool demo = false;
  std::string model_file;
  std::size_t models = 100;
};

inline void cmd_rankone(const RunConfig& c, const RankoneOptions& o, std::ostream& out) {
  if (o.demo) {
    const FiniteModel m{{0.0, 1.0}, {1.0, 1.0}, 1.0};
    const auto sol = solve_secular(m);
    const double exact[2] = {(3.0 - std::sqrt(5.0)) / 2.0, (3.0 + std::sqrt(5.0)) / 2.0};
    out << "H = diag(0, 1) + v v^T, v = (1, 1)\n";
    for (std::size_t i = 0; i < 2; ++i) {
      out << "  E" << i << " = " << fmt17(sol.new_eigenvalues[i]) << "  (3" << (i ? '+' : '-')
          << "sqrt5)/2 = " << fmt17(exact[i]) << "  delta = " << fmt17(std::abs(sol.new_eigenvalues[i] - exact[i]))
          << '\n';
    }
    out << "  dense oracle delta = " << fmt17(oracle_delta(m)) << '\n';
  }
  if (!o.model_file.empty()) {
    std::ifstream is(o.model_file);
    if (!is) throw IoError("cannot open '" + o.model_file + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(std::string("model file: ") + e.what());
    }
    FiniteModel m;
    try {
      m = j.get<FiniteModel>();
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(std::string("model file: ") + e.what());
    }
    Header h("rankone", c);
    h.add("model", std::to_string(fnv1a(j.dump())));
    write_json(c, "rankone_solution.json", h, solve_secular(m));
    out << "solved model of dimension " << m.dim() << '\n';
  }
  if (o.demo || !o.model_file.empty()) return;

  std::mt19937_64 rng(c.seed);
  std::uniform_int_distribution<std::size_t> dim(2, 64);
  double worst = 0.0;
  nlohmann::json cases = nlohmann::json::array();
  for (std::size_t i = 0; i < o.models; ++i) {
    const FiniteModel m = random_model(rng, dim(rng));
    const double d = oracle_delta(m);
    worst = std::max(worst, d);
    cases.push_back({{"dim", m.dim()}, {"delta", d}});
  }
  Header h("rankone", c);
  h.add("models", std::to_string(o.models));
  write_json(c, "rankone.json", h, {{"models", o.models}, {"max_delta", worst}, {"cases", cases}});
  out << "models: " << o.models << ", max oracle delta " << fmt17(worst) << '\n';
}

// ---------------------------------------------------------------------------

/// Parses argv and runs one command. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Point scatterer on a flat torus: spectra, eigenfunctions and sieves"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML file with RunConfig keys");

  RunConfig c;
  app.add_option("--lattice", c.lattice, "p/q for a^4 = p/q, or irrational:<a^2>")->capture_default_str();
  app.add_option("--phi", c.phi, "extension phase in (-pi, pi)")->capture_default_str();
  app.add_option("--X", c.X, "spectral cutoff")->capture_default_str();
  app.add_option("--delta", c.delta, "strip exponent")->capture_default_str();
  app.add_option("--eps-gap", c.epsilon_gap, "gap filter exponent")->capture_default_str();
  app.add_option("--theta", c.theta, "lattice point exponent")->capture_default_str();
  app.add_option("--tail-tol", c.tail_tol, "tail tolerance")->capture_default_str();
  app.add_option("--seed", c.seed, "seed for randomized sweeps")->capture_default_str();
  app.add_option("--out", c.output_dir, "output directory")->capture_default_str();

  auto* norms = app.add_subcommand("norms", "norm table and gap report");
  SpecfunOptions sf;
  auto* specfun = app.add_subcommand("specfun", "spectral function on a grid");
  specfun->add_option("--lo", sf.lo)->capture_default_str();
  specfun->add_option("--hi", sf.hi)->capture_default_str();
  specfun->add_option("--samples", sf.samples)->capture_default_str();
  auto* spectrum = app.add_subcommand("spectrum", "perturbed eigenvalues up to X");
  MatrixOptions mo;
  auto* matrix = app.add_subcommand("matrix", "matrix elements <e_zeta g, g> over the spectrum");
  matrix->add_option("--zeta", mo.zetas, "m,n (repeatable)")->capture_default_str();
  matrix->add_option("--L", mo.L, "annulus half-width; full expansion when absent");
  matrix->add_option("--L-exponent", mo.L_exponent, "annulus half-width lambda^e");
  EquidistOptions eo;
  auto* equi = app.add_subcommand("equidist", "dyadic-window decay of matrix elements");
  equi->add_option("--zeta", eo.zeta, "m,n")->capture_default_str();
  equi->add_option("--min-window", eo.min_window, "lower end of the first window")->capture_default_str();
  SieveOptions so;
  auto* sieve = app.add_subcommand("sieve", "density-one sieves");
  sieve->add_option("--filter", so.filter, "g, zeta or J")->capture_default_str();
  sieve->add_option("--zeta", so.zeta, "m,n")->capture_default_str();
  sieve->add_option("--J", so.J, "radius for the J intersection")->capture_default_str();
  RankoneOptions ro;
  auto* rankone = app.add_subcommand("rankone", "rank-one secular solver and oracle suite");
  rankone->add_flag("--demo", ro.demo, "print the 2x2 example");
  rankone->add_option("--model", ro.model_file, "JSON model {eps, v_coeffs, alpha}");
  rankone->add_option("--models", ro.models, "number of random oracle models")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (norms->parsed()) cmd_norms(c, out);
    if (specfun->parsed()) cmd_specfun(c, sf, out);
    if (spectrum->parsed()) cmd_spectrum(c, out);
    if (matrix->parsed()) cmd_matrix(c, mo, out);
    if (equi->parsed()) cmd_equidist(c, eo, out);
    if (sieve->parsed()) cmd_sieve(c, so, out);
    if (rankone->parsed()) cmd_rankone(c, ro, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return 3;
  }
  return 0;
}

}  // namespace scatterer::cli
