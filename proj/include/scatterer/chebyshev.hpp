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

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace scatterer {

/// Chebyshev interpolant of a smooth function on [lo, hi].
class Chebyshev {
 public:
  Chebyshev() = default;

  template <class Fn>
  Chebyshev(double lo, double hi, std::size_t n, Fn&& f) : lo_(lo), hi_(hi), c_(n, 0.0) {
    std::vector<double> fx(n);
    for (std::size_t j = 0; j < n; ++j) fx[j] = f(node(j));
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        s += fx[j] * std::cos(std::numbers::pi * static_cast<double>(k) * (j + 0.5) / static_cast<double>(n));
      }
      c_[k] = 2.0 * s / static_cast<double>(n);
    }
    if (n > 0) c_[0] *= 0.5;
  }

  double node(std::size_t j) const {
    const double t = std::cos(std::numbers::pi * (j + 0.5) / static_cast<double>(c_.size()));
    return 0.5 * (lo_ + hi_) + 0.5 * (hi_ - lo_) * t;
  }

  double operator()(double x) const {
    const double t = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = c_.size(); k-- > 1;) {
      const double b0 = 2.0 * t * b1 - b2 + c_[k];
      b2 = b1;
      b1 = b0;
    }
    return t * b1 - b2 + (c_.empty() ? 0.0 : c_[0]);
  }

  const std::vector<double>& coefficients() const noexcept { return c_; }

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<double> c_;
};

}  // namespace scatterer
