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

// Rank-one perturbation H = H0 + alpha v v^T of a diagonal operator.
//
// The eigenvalues of H outside Spec(H0) are the roots of the secular equation
//
//   f(E) = sum_n v_n^2 / (E - eps_n) - 1/alpha = 0.
//
// Degenerate levels of H0 are merged into one pole carrying the summed weight;
// the part of each level orthogonal to v keeps its eigenvalue and is reported
// as untouched. Roots are bracketed between consecutive poles and refined by
// bisection in coordinates centred on the nearer pole, which keeps the
// distances E - eps_n accurate close to the poles.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "scatterer/errors.hpp"

namespace scatterer {

struct FiniteModel {
  std::vector<double> eps;
  std::vector<double> v_coeffs;
  double alpha = 1.0;

  std::size_t dim() const noexcept { return eps.size(); }

  void validate() const {
    if (eps.empty()) throw DomainError("model must have at least one level");
    if (v_coeffs.size() != eps.size()) throw DomainError("eps and v_coeffs differ in length");
    for (std::size_t i = 0; i < eps.size(); ++i) {
      if (!std::isfinite(eps[i]) || !std::isfinite(v_coeffs[i])) throw DomainError("model entries must be finite");
      if (i > 0 && eps[i] < eps[i - 1]) throw DomainError("eps must be ascending");
    }
    if (!(std::isfinite(alpha) && alpha != 0.0)) throw DomainError("alpha must be finite and nonzero");
    if (std::none_of(v_coeffs.begin(), v_coeffs.end(), [](double v) { return v != 0.0; })) {
      throw DomainError("v_coeffs must have a nonzero entry");
    }
  }
};

struct SecularSolution {
  std::vector<double> new_eigenvalues;
  std::vector<std::vector<double>> eigenvectors;
  std::vector<std::size_t> untouched;
};

/// sum_n v_n^2/(E - eps_n) - 1/alpha.
inline double secular_eval(const FiniteModel& model, double E) {
  double sum = 0.0;
  for (std::size_t n = 0; n < model.dim(); ++n) {
    const double v = model.v_coeffs[n];
    if (v == 0.0) continue;
    const double d = E - model.eps[n];
    if (std::abs(d) <= 1e-300) {
      throw PoleError("secular_eval: E coincides with eps[" + std::to_string(n) + "]", model.eps[n], n);
    }
    sum += v * v / d;
  }
  return sum - 1.0 / model.alpha;
}

namespace detail {

struct SecularPole {
  double position;
  double weight;
};

// f(origin + tau) using exact pole offsets relative to the origin pole.
inline double shifted_secular(const std::vector<SecularPole>& poles, std::size_t origin, double tau,
                              double inv_alpha) {
  double sum = 0.0;
  const double o = poles[origin].position;
  for (const auto& p : poles) sum += p.weight / ((o - p.position) + tau);
  return sum - inv_alpha;
}

// Bisect a decreasing function of tau on (lo, hi) until the bracket is exhausted.
template <class Fn>
double bisect_decreasing(Fn&& f, double lo, double hi) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline SecularSolution solve_secular(const FiniteModel& model) {
  model.validate();
  const std::size_t D = model.dim();
  const double inv_alpha = 1.0 / model.alpha;

  std::vector<detail::SecularPole> poles;
  SecularSolution sol;
  for (std::size_t i = 0; i < D;) {
    std::size_t j = i;
    double w = 0.0;
    std::size_t first_coupled = D;
    while (j < D && model.eps[j] == model.eps[i]) {
      const double v = model.v_coeffs[j];
      if (v != 0.0 && first_coupled == D) first_coupled = j;
      w += v * v;
      ++j;
    }
    for (std::size_t k = i; k < j; ++k) {
      if (k != first_coupled) sol.untouched.push_back(k);
    }
    if (w > 0.0) poles.push_back({model.eps[i], w});
    i = j;
  }

  const auto solve_at = [&](std::size_t origin, double lo, double hi) {
    const double tau = detail::bisect_decreasing(
        [&](double t) { return detail::shifted_secular(poles, origin, t, inv_alpha); }, lo, hi);
    const double o = poles[origin].position;
    std::vector<double> u(D);
    double nrm = 0.0;
    for (std::size_t n = 0; n < D; ++n) {
      const double v = model.v_coeffs[n];
      u[n] = v == 0.0 ? 0.0 : v / ((o - model.eps[n]) + tau);
      nrm += u[n] * u[n];
    }
    nrm = std::sqrt(nrm);
    for (auto& x : u) x /= nrm;
    sol.new_eigenvalues.push_back(o + tau);
    sol.eigenvectors.push_back(std::move(u));
  };

  double wtot = 0.0;
  for (const auto& p : poles) wtot += p.weight;
  const auto exterior = [&](std::size_t origin, double dir) {
    double hi = std::abs(model.alpha) * wtot;
    while (dir * detail::shifted_secular(poles, origin, dir * hi, inv_alpha) > 0.0 && std::isfinite(hi)) hi *= 2.0;
    if (dir > 0.0) {
      solve_at(origin, 0.0, hi);
    } else {
      solve_at(origin, -hi, 0.0);
    }
  };

  if (model.alpha < 0.0) exterior(0, -1.0);
  for (std::size_t j = 0; j + 1 < poles.size(); ++j) {
    const double mid = 0.5 * (poles[j].position + poles[j + 1].position);
    const double fmid = detail::shifted_secular(poles, j, mid - poles[j].position, inv_alpha);
    if (fmid > 0.0) {
      solve_at(j + 1, mid - poles[j + 1].position, 0.0);
    } else {
      solve_at(j, 0.0, mid - poles[j].position);
    }
  }
  if (model.alpha > 0.0) exterior(poles.size() - 1, 1.0);
  return sol;
}

/// Roots together with the eigenvalues of the untouched levels, ascending.
inline std::vector<double> full_spectrum(const FiniteModel& model, const SecularSolution& sol) {
  std::vector<double> out = sol.new_eigenvalues;
  for (std::size_t n : sol.untouched) out.push_back(model.eps[n]);
  std::sort(out.begin(), out.end());
  return out;
}

inline constexpr std::size_t kDenseOracleMaxDim = 1024;

inline std::vector<double> dense_oracle(const FiniteModel& model) {
  model.validate();
  const auto D = static_cast<Eigen::Index>(model.dim());
  if (model.dim() > kDenseOracleMaxDim) throw CapacityError("dense_oracle: dimension exceeds 1024");
  const Eigen::Map<const Eigen::VectorXd> v(model.v_coeffs.data(), D);
  Eigen::MatrixXd H = model.alpha * v * v.transpose();
  for (Eigen::Index i = 0; i < D; ++i) H(i, i) += model.eps[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("dense_oracle: eigensolver failed", 3);
  const Eigen::VectorXd ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

/// ||(H0 + alpha v v^T - E) u|| for a returned pair.
inline double eigen_residual(const FiniteModel& model, double E, const std::vector<double>& u) {
  double vu = 0.0;
  for (std::size_t n = 0; n < model.dim(); ++n) vu += model.v_coeffs[n] * u[n];
  double r2 = 0.0;
  for (std::size_t n = 0; n < model.dim(); ++n) {
    const double r = (model.eps[n] - E) * u[n] + model.alpha * model.v_coeffs[n] * vu;
    r2 += r * r;
  }
  return std::sqrt(r2);
}

/// Largest deviation between the secular spectrum and the dense one.
inline double oracle_delta(const FiniteModel& model) {
  const auto a = full_spectrum(model, solve_secular(model));
  const auto b = dense_oracle(model);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Random model of dimension D with repeated levels and some decoupled ones.
inline FiniteModel random_model(std::mt19937_64& rng, std::size_t D) {
  std::uniform_real_distribution<double> level(-10.0, 10.0);
  std::normal_distribution<double> coupling(0.0, 1.0);
  std::uniform_real_distribution<double> strength(0.1, 5.0);
  std::bernoulli_distribution repeat(0.2), decouple(0.1), sign(0.5);
  FiniteModel m;
  for (std::size_t i = 0; i < D; ++i) {
    m.eps.push_back(i > 0 && repeat(rng) ? m.eps.back() : level(rng));
    m.v_coeffs.push_back(decouple(rng) ? 0.0 : coupling(rng));
  }
  std::sort(m.eps.begin(), m.eps.end());
  if (std::none_of(m.v_coeffs.begin(), m.v_coeffs.end(), [](double v) { return v != 0.0; })) m.v_coeffs[0] = 1.0;
  m.alpha = (sign(rng) ? 1.0 : -1.0) * strength(rng);
  return m;
}

inline void to_json(nlohmann::json& j, const FiniteModel& m) {
  j = nlohmann::json{{"eps", m.eps}, {"v_coeffs", m.v_coeffs}, {"alpha", m.alpha}};
}

inline void from_json(const nlohmann::json& j, FiniteModel& m) {
  j.at("eps").get_to(m.eps);
  j.at("v_coeffs").get_to(m.v_coeffs);
  j.at("alpha").get_to(m.alpha);
  m.validate();
}

inline void to_json(nlohmann::json& j, const SecularSolution& s) {
  j = nlohmann::json{
      {"new_eigenvalues", s.new_eigenvalues}, {"eigenvectors", s.eigenvectors}, {"untouched", s.untouched}};
}

inline void from_json(const nlohmann::json& j, SecularSolution& s) {
  j.at("new_eigenvalues").get_to(s.new_eigenvalues);
  j.at("eigenvectors").get_to(s.eigenvectors);
  j.at("untouched").get_to(s.untouched);
}

}  // namespace scatterer
