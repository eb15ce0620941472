// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "koodos/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "koodos/error.hpp"

namespace koodos::spectral {

namespace {

double sign_of(double magnitude, double s) { return s >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude); }

void to_hessenberg(Tensor& a) {
  const std::size_t n = a.rows();
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (a(k + 1, k) > 0) alpha = -alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = a(i, k);
      if (i == k + 1) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 == 0.0) continue;
    // A ← H A H with H = I − 2 v vᵀ / vᵀv.
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
      s = 2.0 * s / vnorm2;
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      s = 2.0 * s / vnorm2;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * v[j];
    }
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
}

// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr
// structure, eigenvalues only).
std::vector<std::complex<double>> hessenberg_qr(Tensor& a, std::size_t max_sweeps, double input_norm) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
  auto A = [&](int i, int j) -> double& { return a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); };
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(A(i, j));
  const double eps = std::numeric_limits<double>::epsilon();
  std::size_t sweeps = 0;
  int nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l > 0; --l) {
        double s = std::abs(A(l - 1, l - 1)) + std::abs(A(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(A(l, l - 1)) <= eps * s) {
          A(l, l - 1) = 0.0;
          break;
        }
      }
      double x = A(nn, nn);
      if (l == nn) {
        wr[static_cast<std::size_t>(nn)] = x + t;
        wi[static_cast<std::size_t>(nn)] = 0.0;
        --nn;
      } else {
        double y = A(nn - 1, nn - 1);
        double w = A(nn, nn - 1) * A(nn - 1, nn);
        if (l == nn - 1) {
          const double p = 0.5 * (y - x);
          const double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          const auto u = static_cast<std::size_t>(nn);
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[u - 1] = wr[u] = x + z;
            if (z != 0.0) wr[u] = x - w / z;
            wi[u - 1] = wi[u] = 0.0;
          } else {
            wr[u - 1] = wr[u] = x + p;
            wi[u - 1] = z;
            wi[u] = -z;
          }
          nn -= 2;
        } else {
          if (++sweeps > max_sweeps) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "eigenvalues: QR iteration did not converge after %zu sweeps (matrix 1-norm %.6g)",
                          max_sweeps, input_norm);
            throw ConvergenceError(buf);
          }
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            t += x;
            for (int i = 0; i <= nn; ++i) A(i, i) -= x;
            const double s = std::abs(A(nn, nn - 1)) + std::abs(A(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          double p = 0, q = 0, r = 0, z = 0;
          for (; m >= l; --m) {
            z = A(m, m);
            r = x - z;
            const double s0 = y - z;
            p = (r * s0 - w) / A(m + 1, m) + A(m, m + 1);
            q = A(m + 1, m + 1) - z - r - s0;
            r = A(m + 2, m + 1);
            const double s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(A(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(A(m - 1, m - 1)) + std::abs(z) + std::abs(A(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m; i < nn - 1; ++i) {
            A(i + 2, i) = 0.0;
            if (i != m) A(i + 2, i - 1) = 0.0;
          }
          for (int k = m; k < nn; ++k) {
            if (k != m) {
              p = A(k, k - 1);
              q = A(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = A(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) A(k, k - 1) = -A(k, k - 1);
            } else {
              A(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = A(k, j) + q * A(k + 1, j);
              if (k + 1 != nn) {
                p += r * A(k + 2, j);
                A(k + 2, j) -= p * z;
              }
              A(k + 1, j) -= p * y;
              A(k, j) -= p * x;
            }
            const int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              p = x * A(i, k) + y * A(i, k + 1);
              if (k + 1 != nn) {
                p += z * A(i, k + 2);
                A(i, k + 2) -= p * r;
              }
              A(i, k + 1) -= p * q;
              A(i, k) -= p;
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {wr[i], wi[i]};
  return out;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Tensor& m, std::size_t max_sweeps_per_dim) {
  if (m.rows() != m.cols()) throw ShapeError("eigenvalues: matrix " + m.shape_str() + " is not square");
  m.require_finite("eigenvalues");
  if (m.rows() == 0) return {};
  Tensor a = m;
  to_hessenberg(a);
  auto ev = hessenberg_qr(a, max_sweeps_per_dim * m.rows(), norm_1(m));
  std::sort(ev.begin(), ev.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return ev;
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Marginal: return "marginal";
  }
  return "marginal";
}

SpectralReport assess_stability(const Tensor& m, double tol) {
  SpectralReport r;
  r.eigenvalues = eigenvalues(m);
  r.max_real = -std::numeric_limits<double>::infinity();
  for (const auto& l : r.eigenvalues) r.max_real = std::max(r.max_real, l.real());
  if (r.max_real > tol)
    r.classification = Stability::Unstable;
  else if (r.max_real < -tol)
    r.classification = Stability::Stable;
  else
    r.classification = Stability::Marginal;
  return r;
}

SymmetricEigen symmetric_eigen(const Tensor& s) {
  if (s.rows() != s.cols()) throw ShapeError("symmetric_eigen: matrix " + s.shape_str() + " is not square");
  const std::size_t n = s.rows();
  Tensor a = s;
  Tensor v = Tensor::identity(n);
  const double scale = std::max(frobenius_norm(a), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-15 * scale) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = sign_of(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out;
  out.vectors = Tensor(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values.push_back(a(order[k], order[k]));
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

PcaResult pca_project(const Tensor& points, std::size_t dims) {
  const std::size_t n = points.rows(), d = points.cols();
  if (n == 0) throw InvalidArgument("pca_project: no points");
  if (dims == 0 || dims > d)
    throw InvalidArgument("pca_project: dims must lie in [1, " + std::to_string(d) + "]");
  points.require_finite("pca_project");
  PcaResult r;
  r.mean = Tensor(1, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) r.mean[j] += points(i, j);
  for (std::size_t j = 0; j < d; ++j) r.mean[j] /= static_cast<double>(n);
  Tensor x = points;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) -= r.mean[j];
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;

  double total = 0.0;
  for (double v : x.values()) total += v * v;
  total /= denom;

  r.components = Tensor(dims, d);
  r.variances.assign(dims, 0.0);
  if (n >= d) {
    Tensor cov = matmul(x.transposed(), x);
    for (double& v : cov.values()) v /= denom;
    const SymmetricEigen e = symmetric_eigen(cov);
    for (std::size_t k = 0; k < dims; ++k) {
      r.variances[k] = std::max(0.0, e.values[k]);
      for (std::size_t j = 0; j < d; ++j) r.components(k, j) = e.vectors(j, k);
    }
  } else {
    Tensor gram = matmul(x, x.transposed());
    for (double& v : gram.values()) v /= denom;
    const SymmetricEigen e = symmetric_eigen(gram);
    for (std::size_t k = 0; k < dims && k < n; ++k) {
      const double lambda = std::max(0.0, e.values[k]);
      r.variances[k] = lambda;
      if (lambda <= 1e-300) continue;
      // v = Xᵀu / ‖Xᵀu‖.
      double norm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x(i, j) * e.vectors(i, k);
        r.components(k, j) = s;
        norm2 += s * s;
      }
      const double norm = std::sqrt(norm2);
      for (std::size_t j = 0; j < d; ++j) r.components(k, j) /= norm;
    }
  }
  for (std::size_t k = 0; k < dims; ++k) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d; ++j)
      if (std::abs(r.components(k, j)) > std::abs(r.components(k, arg))) arg = j;
    if (r.components(k, arg) < 0)
      for (std::size_t j = 0; j < d; ++j) r.components(k, j) = -r.components(k, j);
  }
  r.projections = matmul(x, r.components.transposed());
  r.explained_ratio.assign(dims, 0.0);
  if (total > 0.0)
    for (std::size_t k = 0; k < dims; ++k) r.explained_ratio[k] = r.variances[k] / total;
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_spectrum_csv(const std::filesystem::path& file,
                        const std::vector<std::complex<double>>& eigenvalues) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "re,im\n";
  for (const auto& l : eigenvalues) out << fmt(l.real()) << ',' << fmt(l.imag()) << '\n';
  if (!out) throw IoError("failed writing " + file.string());
}

void write_trajectory_csv(const std::filesystem::path& file, const std::vector<double>& times,
                          const Tensor& projections) {
  if (times.size() != projections.rows())
    throw ShapeError("trajectory export: " + std::to_string(times.size()) + " times for " +
                     std::to_string(projections.rows()) + " points");
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << 't';
  for (std::size_t k = 0; k < projections.cols(); ++k) out << ",c" << k + 1;
  out << '\n';
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << fmt(times[i]);
    for (std::size_t k = 0; k < projections.cols(); ++k) out << ',' << fmt(projections(i, k));
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + file.string());
}

}  // namespace koodos::spectral
