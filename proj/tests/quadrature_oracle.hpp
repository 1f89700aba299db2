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

// Trapezoidal quadrature of the integral of e_zeta |g|^2 over the torus, with
// g sampled on an N x N grid by FFT from its Fourier coefficients in the box
// |m|, |n| <= (N - 1) / 2.

#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "scatterer/greens.hpp"

namespace scatterer::testing {

inline std::complex<double> quadrature_matrix_element(const GreensContext& ctx, const LatticeVector& zeta,
                                                      std::size_t N) {
  const auto Ni = static_cast<std::int64_t>(N);
  const std::int64_t K = (Ni - 1) / 2;
  fftw_complex* buf = fftw_alloc_complex(N * N);
  for (std::size_t i = 0; i < N * N; ++i) buf[i][0] = buf[i][1] = 0.0;
  for (std::int64_t m = -K; m <= K; ++m) {
    for (std::int64_t n = -K; n <= K; ++n) {
      const std::complex<double> c =
          ctx.coeff(m, n) * std::polar(1.0, -ctx.pairing(m, n, ctx.x0));
      const std::size_t idx = static_cast<std::size_t>(((m % Ni + Ni) % Ni) * Ni + (n % Ni + Ni) % Ni);
      buf[idx][0] = c.real();
      buf[idx][1] = c.imag();
    }
  }
  fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(N), static_cast<int>(N), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  std::complex<double> num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const double* v = buf[i * N + j];
      const double w = v[0] * v[0] + v[1] * v[1];
      const auto r = (zeta.m * static_cast<std::int64_t>(i) + zeta.n * static_cast<std::int64_t>(j)) % Ni;
      num += w * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(N));
      den += w;
    }
  }
  fftw_destroy_plan(plan);
  fftw_free(buf);
  return num / den;
}

}  // namespace scatterer::testing
