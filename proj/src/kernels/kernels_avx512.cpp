// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

// Built with -mavx512f; only reached after a cpuid check.

#include "koodos/kernels.hpp"

#if defined(KOODOS_HAVE_AVX512)

#include <immintrin.h>

#include <algorithm>
#include <vector>

namespace koodos::simd {
namespace {

struct V {
  using reg = __m512d;
  static constexpr std::size_t W = 8;
  static reg zero() { return _mm512_setzero_pd(); }
  static reg load(const double* p) { return _mm512_loadu_pd(p); }
  static void store(double* p, reg v) { _mm512_storeu_pd(p, v); }
  static reg set1(double x) { return _mm512_set1_pd(x); }
  static reg fma(reg a, reg b, reg c) { return _mm512_fmadd_pd(a, b, c); }
  static reg add(reg a, reg b) { return _mm512_add_pd(a, b); }
  static double hsum(reg v) { return _mm512_reduce_add_pd(v); }
};

#include "gemm_blocked.inl"

constexpr KernelTable kAvx512{Level::Avx512, gemm_nn, gemm_tn, gemm_nt, dot, axpy};

}  // namespace

const KernelTable* avx512_kernels() { return &kAvx512; }

}  // namespace koodos::simd

#else

namespace koodos::simd {
const KernelTable* avx512_kernels() { return nullptr; }
}  // namespace koodos::simd

#endif
