// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

// Register-blocked GEMM body shared by the vector variants. The including
// translation unit defines a `V` traits struct (width W, zero, load, store,
// set1, fma) compiled with the matching target flags, then includes this
// file inside its own anonymous namespace.
//
// A is addressed through (row stride, col stride) so the same micro-kernel
// serves A·B and Aᵀ·B. B and C are row-major with ld = n.

constexpr std::size_t kRows = 4;
constexpr std::size_t kCols = 2 * V::W;
constexpr std::size_t kDepth = 256;

inline void micro_full(std::size_t kc, const double* a, std::size_t ars, std::size_t acs,
                       const double* b, std::size_t n, double* c, bool load_c) {
  typename V::reg acc[kRows][2];
  for (std::size_t r = 0; r < kRows; ++r) {
    if (load_c) {
      acc[r][0] = V::load(c + r * n);
      acc[r][1] = V::load(c + r * n + V::W);
    } else {
      acc[r][0] = V::zero();
      acc[r][1] = V::zero();
    }
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const typename V::reg b0 = V::load(b + p * n);
    const typename V::reg b1 = V::load(b + p * n + V::W);
    for (std::size_t r = 0; r < kRows; ++r) {
      const typename V::reg av = V::set1(a[r * ars + p * acs]);
      acc[r][0] = V::fma(av, b0, acc[r][0]);
      acc[r][1] = V::fma(av, b1, acc[r][1]);
    }
  }
  for (std::size_t r = 0; r < kRows; ++r) {
    V::store(c + r * n, acc[r][0]);
    V::store(c + r * n + V::W, acc[r][1]);
  }
}

// Edge tiles (fewer rows and/or columns): one vector lane group at a time,
// scalar for the final columns.
inline void micro_edge(std::size_t rows, std::size_t cols, std::size_t kc, const double* a,
                       std::size_t ars, std::size_t acs, const double* b, std::size_t n, double* c,
                       bool load_c) {
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t j = 0;
    for (; j + V::W <= cols; j += V::W) {
      typename V::reg acc = load_c ? V::load(c + r * n + j) : V::zero();
      for (std::size_t p = 0; p < kc; ++p)
        acc = V::fma(V::set1(a[r * ars + p * acs]), V::load(b + p * n + j), acc);
      V::store(c + r * n + j, acc);
    }
    for (; j < cols; ++j) {
      double s = load_c ? c[r * n + j] : 0.0;
      for (std::size_t p = 0; p < kc; ++p) s += a[r * ars + p * acs] * b[p * n + j];
      c[r * n + j] = s;
    }
  }
}

inline void gemm_strided_a(std::size_t m, std::size_t n, std::size_t k, const double* a,
                           std::size_t ars, std::size_t acs, const double* b, double* c,
                           bool accumulate) {
  if (k == 0) {
    if (!accumulate) std::fill(c, c + m * n, 0.0);
    return;
  }
  for (std::size_t p0 = 0; p0 < k; p0 += kDepth) {
    const std::size_t kc = std::min(kDepth, k - p0);
    const bool load_c = accumulate || p0 > 0;
    for (std::size_t j0 = 0; j0 < n; j0 += kCols) {
      const std::size_t cols = std::min(kCols, n - j0);
      for (std::size_t i0 = 0; i0 < m; i0 += kRows) {
        const std::size_t rows = std::min(kRows, m - i0);
        const double* ablk = a + i0 * ars + p0 * acs;
        const double* bblk = b + p0 * n + j0;
        double* cblk = c + i0 * n + j0;
        if (rows == kRows && cols == kCols)
          micro_full(kc, ablk, ars, acs, bblk, n, cblk, load_c);
        else
          micro_edge(rows, cols, kc, ablk, ars, acs, bblk, n, cblk, load_c);
      }
    }
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  gemm_strided_a(m, n, k, a, k, 1, b, c, accumulate);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  gemm_strided_a(m, n, k, a, 1, m, b, c, accumulate);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  // Pack Bᵀ (k×n) once; the packing is O(nk) against O(mnk) work.
  thread_local std::vector<double> packed;
  packed.resize(k * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < k; ++p) packed[p * n + j] = b[j * k + p];
  gemm_strided_a(m, n, k, a, k, 1, packed.data(), c, accumulate);
}

double dot(std::size_t n, const double* x, const double* y) {
  typename V::reg acc0 = V::zero();
  typename V::reg acc1 = V::zero();
  std::size_t i = 0;
  for (; i + 2 * V::W <= n; i += 2 * V::W) {
    acc0 = V::fma(V::load(x + i), V::load(y + i), acc0);
    acc1 = V::fma(V::load(x + i + V::W), V::load(y + i + V::W), acc1);
  }
  double s = V::hsum(V::add(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const typename V::reg av = V::set1(alpha);
  std::size_t i = 0;
  for (; i + V::W <= n; i += V::W) V::store(y + i, V::fma(av, V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}
