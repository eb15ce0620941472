// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "koodos/odeflow.hpp"

#include <cmath>

#include "koodos/error.hpp"

namespace koodos::ode {

std::string to_string(Method m) { return m == Method::Expm ? "expm" : "rk4"; }

Method method_from_string(const std::string& s) {
  if (s == "expm") return Method::Expm;
  if (s == "rk4") return Method::Rk4;
  throw InvalidArgument("unknown integration method '" + s + "'");
}

void IntegrationConfig::validate() const {
  if (!(steps_per_unit >= 1.0)) throw InvalidArgument("steps_per_unit must be >= 1");
  if (!(expm_tolerance > 0.0)) throw InvalidArgument("expm tolerance must be positive");
}

namespace {

constexpr int kMaxTaylorTerms = 40;

void require_square(const Tensor& a, const char* what) {
  if (a.rows() != a.cols()) throw ShapeError(std::string(what) + ": matrix " + a.shape_str() + " is not square");
  a.require_finite(what);
}

}  // namespace

ad::Var expm(ad::Var a, double tolerance) {
  require_square(a.value(), "expm");
  if (!(tolerance > 0.0)) throw InvalidArgument("expm tolerance must be positive");
  ad::Graph& g = *a.graph();
  const std::size_t n = a.rows();

  // Scale so that ‖A/2^s‖₁ ≤ 1/2; the Taylor tail then shrinks factorially.
  int squarings = 0;
  double norm = norm_1(a.value());
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const ad::Var b = squarings ? ad::scale(a, std::ldexp(1.0, -squarings)) : a;

  const ad::Var identity = g.constant(Tensor::identity(n));
  ad::Var total = identity;
  ad::Var term = identity;
  for (int k = 1; k <= kMaxTaylorTerms; ++k) {
    term = ad::scale(ad::matmul(term, b), 1.0 / k);
    total = ad::add(total, term);
    if (norm_1(term.value()) <= tolerance * norm_1(total.value())) break;
  }
  for (int s = 0; s < squarings; ++s) total = ad::matmul(total, total);
  return total;
}

Tensor expm(const Tensor& a, double tolerance) {
  ad::Graph g;
  return expm(g.constant(a), tolerance).value();
}

std::size_t rk4_steps(double dt, double steps_per_unit) {
  if (dt == 0.0) return 0;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(dt) * steps_per_unit)));
}

ad::Var integrate_field(const Field& field, ad::Var x0, double t0, double t1,
                        const IntegrationConfig& cfg) {
  cfg.validate();
  const std::size_t steps = rk4_steps(t1 - t0, cfg.steps_per_unit);
  if (steps == 0) return x0;
  const double h = (t1 - t0) / static_cast<double>(steps);
  auto eval = [&](ad::Var x, double t) {
    ad::Var d = field(x, t);
    if (d.rows() != x.rows() || d.cols() != x.cols())
      throw ShapeError("integrate_field: field returned " + d.value().shape_str() + " for state " +
                       x.value().shape_str());
    return d;
  };
  ad::Var x = x0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = t0 + h * static_cast<double>(s);
    const ad::Var k1 = eval(x, t);
    const ad::Var k2 = eval(ad::add(x, ad::scale(k1, h / 2)), t + h / 2);
    const ad::Var k3 = eval(ad::add(x, ad::scale(k2, h / 2)), t + h / 2);
    const ad::Var k4 = eval(ad::add(x, ad::scale(k3, h)), t + h);
    const ad::Var incr = ad::add(ad::add(k1, k4), ad::scale(ad::add(k2, k3), 2.0));
    x = ad::add(x, ad::scale(incr, h / 6));
  }
  return x;
}

Tensor integrate_field(const PlainField& field, const Tensor& x0, double t0, double t1,
                       const IntegrationConfig& cfg) {
  ad::Graph g;
  const Field wrapped = [&](ad::Var x, double t) { return g.constant(field(x.value(), t)); };
  return integrate_field(wrapped, g.constant(x0), t0, t1, cfg).value();
}

ad::Var integrate_linear(ad::Var k, ad::Var z0, double t0, double t1, const IntegrationConfig& cfg) {
  require_square(k.value(), "integrate_linear");
  if (z0.cols() != k.rows())
    throw ShapeError("integrate_linear: state " + z0.value().shape_str() + " does not match operator " +
                     k.value().shape_str());
  cfg.validate();
  if (t1 == t0) return z0;
  if (cfg.method == Method::Expm) {
    const ad::Var flow = expm(ad::scale(k, t1 - t0), cfg.expm_tolerance);
    return ad::matmul(z0, ad::transpose(flow));
  }
  const ad::Var kt = ad::transpose(k);
  return integrate_field([&](ad::Var z, double) { return ad::matmul(z, kt); }, z0, t0, t1, cfg);
}

Tensor integrate_linear(const Tensor& k, const Tensor& z0, double t0, double t1,
                        const IntegrationConfig& cfg) {
  ad::Graph g;
  return integrate_linear(g.constant(k), g.constant(z0), t0, t1, cfg).value();
}

}  // namespace koodos::ode
