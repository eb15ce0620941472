// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense double-precision inner loops behind the autodiff engine.
//
// Every kernel has a portable scalar reference and, where the build and the
// CPU allow it, an AVX2+FMA and an AVX-512F variant. The active table is
// picked once per process from cpuid; KOODOS_SIMD=scalar|avx2|avx512 forces
// a specific level (falling back to scalar if the CPU lacks it). Variants
// agree to rounding, not bitwise, so a given process always uses one table.

#include <cstddef>
#include <string_view>

namespace koodos::simd {

enum class Level { Scalar, Avx2, Avx512 };

std::string_view level_name(Level level);

/// All matrices are dense row-major with the leading dimension equal to the
/// column count. `accumulate` adds into C instead of overwriting it.
struct KernelTable {
  Level level;
  // C(m×n) (+)= A(m×k) · B(k×n)
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c, bool accumulate);
  // C(m×n) (+)= A(k×m)ᵀ · B(k×n)
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c, bool accumulate);
  // C(m×n) (+)= A(m×k) · B(n×k)ᵀ
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c, bool accumulate);
  double (*dot)(std::size_t n, const double* x, const double* y);
  // y += alpha·x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
};

const KernelTable& scalar_kernels();
/// nullptr when the variant was not compiled in.
const KernelTable* avx2_kernels();
const KernelTable* avx512_kernels();

bool cpu_supports(Level level);

/// Table chosen at first use; stable for the life of the process.
const KernelTable& active();

}  // namespace koodos::simd
