// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Small dense reference routines used only as test oracles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "koodos/tensor.hpp"

namespace oracle {

using koodos::Tensor;

/// Numerical rank by Gaussian elimination with full pivoting.
inline std::size_t rank(Tensor a, double rel_tol = 1e-10) {
  const std::size_t m = a.rows(), n = a.cols();
  double scale = 0;
  for (double v : a.values()) scale = std::max(scale, std::abs(v));
  if (scale == 0) return 0;
  std::size_t r = 0;
  for (; r < std::min(m, n); ++r) {
    std::size_t pi = r, pj = r;
    double best = 0;
    for (std::size_t i = r; i < m; ++i)
      for (std::size_t j = r; j < n; ++j)
        if (std::abs(a(i, j)) > best) best = std::abs(a(i, j)), pi = i, pj = j;
    if (best <= rel_tol * scale) break;
    for (std::size_t j = 0; j < n; ++j) std::swap(a(r, j), a(pi, j));
    for (std::size_t i = 0; i < m; ++i) std::swap(a(i, r), a(i, pj));
    for (std::size_t i = r + 1; i < m; ++i) {
      const double f = a(i, r) / a(r, r);
      for (std::size_t j = r; j < n; ++j) a(i, j) -= f * a(r, j);
    }
  }
  return r;
}

/// Determinant by LU with partial pivoting.
inline double determinant(Tensor a) {
  const std::size_t n = a.rows();
  double det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t i = c + 1; i < n; ++i)
      if (std::abs(a(i, c)) > std::abs(a(p, c))) p = i;
    if (a(p, c) == 0) return 0;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(p, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      const double f = a(i, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
    }
  }
  return det;
}

/// Characteristic polynomial coefficients c[0..n] of det(λI − A), c[n] = 1,
/// by the Faddeev–LeVerrier recursion.
inline std::vector<double> characteristic_polynomial(const Tensor& a) {
  const std::size_t n = a.rows();
  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  Tensor m(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    Tensor next = koodos::matmul(a, m);
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
    m = next;
    const Tensor am = koodos::matmul(a, m);
    double tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
    c[n - k] = -tr / static_cast<double>(k);
  }
  return c;
}

/// All roots of a monic polynomial by Aberth–Ehrlich iteration.
inline std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& c,
                                                          int iterations = 500) {
  using C = std::complex<double>;
  const std::size_t n = c.size() - 1;
  double bound = 0;
  for (std::size_t i = 0; i < n; ++i) bound = std::max(bound, std::abs(c[i]));
  bound += 1;
  std::vector<C> z(n);
  for (std::size_t i = 0; i < n; ++i)
    z[i] = std::polar(bound * 0.7, 2 * M_PI * (static_cast<double>(i) + 0.25) / static_cast<double>(n));
  auto eval = [&](C x, C& dp) {
    C p = c[n];
    dp = 0;
    for (std::size_t i = n; i-- > 0;) {
      dp = dp * x + p;
      p = p * x + c[i];
    }
    return p;
  };
  for (int it = 0; it < iterations; ++it) {
    double moved = 0;
    for (std::size_t i = 0; i < n; ++i) {
      C dp;
      const C p = eval(z[i], dp);
      if (p == C(0)) continue;
      const C ratio = p / dp;
      C s = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) s += 1.0 / (z[i] - z[j]);
      const C w = ratio / (1.0 - ratio * s);
      z[i] -= w;
      moved = std::max(moved, std::abs(w));
    }
    if (moved < 1e-15 * bound) break;
  }
  return z;
}

}  // namespace oracle
