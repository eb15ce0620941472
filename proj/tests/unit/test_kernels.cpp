// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

// Every compiled SIMD table must agree with the scalar reference on shapes
// that exercise full tiles, edge tiles and the k-blocking boundary.

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "koodos/kernels.hpp"

using namespace koodos::simd;

namespace {

std::vector<const KernelTable*> vector_tables() {
  std::vector<const KernelTable*> out;
  for (const KernelTable* t : {avx2_kernels(), avx512_kernels()})
    if (t && cpu_supports(t->level)) out.push_back(t);
  return out;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  return m;
}

struct Shape {
  std::size_t m, n, k;
};

const Shape kShapes[] = {{1, 1, 1},   {3, 5, 7},    {4, 16, 8},   {4, 8, 3},   {17, 33, 9},
                         {9, 40, 300}, {64, 64, 64}, {5, 1185, 32}, {2, 3, 0}, {31, 7, 513}};

}  // namespace

TEST_CASE("simd gemm variants match the scalar reference") {
  std::mt19937_64 rng(7);
  const auto& ref = scalar_kernels();
  for (const KernelTable* t : vector_tables()) {
    CAPTURE(level_name(t->level));
    for (const Shape& s : kShapes) {
      CAPTURE(s.m);
      CAPTURE(s.n);
      CAPTURE(s.k);
      const auto a = random_vec(s.m * s.k, rng);
      const auto b = random_vec(s.k * s.n, rng);
      const auto bt = random_vec(s.n * s.k, rng);
      const auto at = random_vec(s.k * s.m, rng);
      for (bool acc : {false, true}) {
        auto c0 = random_vec(s.m * s.n, rng);
        auto c1 = c0;
        ref.gemm_nn(s.m, s.n, s.k, a.data(), b.data(), c0.data(), acc);
        t->gemm_nn(s.m, s.n, s.k, a.data(), b.data(), c1.data(), acc);
        CHECK(max_rel_err(c0, c1) < 1e-12);

        c1 = c0;
        auto c2 = c0;
        ref.gemm_tn(s.m, s.n, s.k, at.data(), b.data(), c1.data(), acc);
        t->gemm_tn(s.m, s.n, s.k, at.data(), b.data(), c2.data(), acc);
        CHECK(max_rel_err(c1, c2) < 1e-12);

        c1 = c0;
        c2 = c0;
        ref.gemm_nt(s.m, s.n, s.k, a.data(), bt.data(), c1.data(), acc);
        t->gemm_nt(s.m, s.n, s.k, a.data(), bt.data(), c2.data(), acc);
        CHECK(max_rel_err(c1, c2) < 1e-12);
      }
    }
  }
}

TEST_CASE("simd dot and axpy match the scalar reference") {
  std::mt19937_64 rng(11);
  const auto& ref = scalar_kernels();
  for (const KernelTable* t : vector_tables()) {
    for (std::size_t n : {0u, 1u, 3u, 8u, 15u, 16u, 17u, 1000u}) {
      const auto x = random_vec(n, rng);
      const auto y = random_vec(n, rng);
      CHECK(std::abs(ref.dot(n, x.data(), y.data()) - t->dot(n, x.data(), y.data())) < 1e-12);
      auto y0 = y;
      auto y1 = y;
      ref.axpy(n, 0.37, x.data(), y0.data());
      t->axpy(n, 0.37, x.data(), y1.data());
      CHECK(max_rel_err(y0, y1) < 1e-15);  // fused vs. separate rounding
    }
  }
}

TEST_CASE("scalar gemm computes a hand-checked product") {
  // [1 2; 3 4] · [5 6; 7 8] = [19 22; 43 50]
  const double a[] = {1, 2, 3, 4};
  const double b[] = {5, 6, 7, 8};
  double c[4];
  scalar_kernels().gemm_nn(2, 2, 2, a, b, c, false);
  CHECK(c[0] == 19);
  CHECK(c[1] == 22);
  CHECK(c[2] == 43);
  CHECK(c[3] == 50);
}

TEST_CASE("active table is one of the compiled tables") {
  const KernelTable& t = active();
  CHECK(cpu_supports(t.level));
  MESSAGE("active SIMD level: " << level_name(t.level));
}
