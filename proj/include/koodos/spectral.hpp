// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "koodos/tensor.hpp"

namespace koodos::spectral {

/// All eigenvalues of a real square matrix: Householder reduction to upper
/// Hessenberg form followed by Francis double-shift QR. Complex values come
/// in exactly conjugate pairs. The result is sorted by real part, then
/// imaginary part, both descending.
/// Throws ConvergenceError after max_sweeps_per_dim·n QR sweeps.
std::vector<std::complex<double>> eigenvalues(const Tensor& m, std::size_t max_sweeps_per_dim = 100);

enum class Stability { Stable, Unstable, Marginal };
std::string to_string(Stability s);

struct SpectralReport {
  std::vector<std::complex<double>> eigenvalues;
  Stability classification = Stability::Marginal;
  double max_real = 0.0;
};

/// Stable iff every Re λ < −tol, unstable iff some Re λ > tol, marginal
/// otherwise.
SpectralReport assess_stability(const Tensor& m, double tol = 1e-8);

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Eigenvalues are
/// descending; column k of `vectors` belongs to values[k].
struct SymmetricEigen {
  std::vector<double> values;
  Tensor vectors;
};
SymmetricEigen symmetric_eigen(const Tensor& s);

struct PcaResult {
  Tensor mean;                         // 1×D
  Tensor components;                   // dims×D, unit rows
  Tensor projections;                  // N×dims
  std::vector<double> variances;       // per component, sample variance
  std::vector<double> explained_ratio; // variance / total variance (0 if total is 0)
};

/// Mean-centred PCA of the rows of `points`. Uses the D×D covariance when
/// N ≥ D and the N×N Gram matrix otherwise. Each component is signed so its
/// largest-magnitude loading is positive.
PcaResult pca_project(const Tensor& points, std::size_t dims = 2);

/// `re,im` rows.
void write_spectrum_csv(const std::filesystem::path& file,
                        const std::vector<std::complex<double>>& eigenvalues);
/// `t,c1,...,ck` rows.
void write_trajectory_csv(const std::filesystem::path& file, const std::vector<double>& times,
                          const Tensor& projections);

}  // namespace koodos::spectral
