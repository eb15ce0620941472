// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

// Built with -mavx2 -mfma; only reached after a cpuid check.

#include "koodos/kernels.hpp"

#if defined(KOODOS_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>
#include <vector>

namespace koodos::simd {
namespace {

struct V {
  using reg = __m256d;
  static constexpr std::size_t W = 4;
  static reg zero() { return _mm256_setzero_pd(); }
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg set1(double x) { return _mm256_set1_pd(x); }
  static reg fma(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static double hsum(reg v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
  }
};

#include "gemm_blocked.inl"

constexpr KernelTable kAvx2{Level::Avx2, gemm_nn, gemm_tn, gemm_nt, dot, axpy};

}  // namespace

const KernelTable* avx2_kernels() { return &kAvx2; }

}  // namespace koodos::simd

#else

namespace koodos::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace koodos::simd

#endif
