// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "gradcheck.hpp"
#include "koodos/error.hpp"
#include "koodos/odeflow.hpp"

using koodos::Tensor;
namespace ad = koodos::ad;
namespace ode = koodos::ode;

namespace {

// Generator of a clockwise quarter turn over one time unit: ż = z·Kᵀ.
Tensor rotation_generator() { return Tensor::from({{0, M_PI / 2}, {-M_PI / 2, 0}}); }

Tensor random_skew(std::size_t n, std::mt19937_64& rng) {
  const Tensor b = gradcheck::random_tensor(n, n, rng);
  Tensor k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k(i, j) = b(i, j) - b(j, i);
  return k;
}

}  // namespace

TEST_CASE("expm of zero and of a diagonal matrix") {
  CHECK(ode::expm(Tensor(3, 3)) == Tensor::identity(3));
  const Tensor e = ode::expm(Tensor::from({{1.0, 0.0}, {0.0, -2.0}}));
  CHECK(e(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(e(0, 1) == 0.0);
}

TEST_CASE("expm of a rotation generator is the rotation matrix") {
  for (double angle : {0.3, 1.0, 4.0, 25.0}) {
    const Tensor e = ode::expm(Tensor::from({{0, -angle}, {angle, 0}}));
    const Tensor r = Tensor::from({{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}});
    CHECK(koodos::max_abs_diff(e, r) < 1e-12 * std::max(1.0, angle));
  }
}

TEST_CASE("quarter turn maps (1,0) to (0,-1)") {
  const Tensor z1 = ode::integrate_linear(rotation_generator(), Tensor::from({{1, 0}}), 0.0, 1.0);
  CHECK(std::abs(z1(0, 0)) < 1e-9);
  CHECK(std::abs(z1(0, 1) + 1.0) < 1e-9);
}

TEST_CASE("zero-length interval returns the initial state") {
  const Tensor z0 = Tensor::from({{0.25, -3.0}});
  for (auto m : {ode::Method::Expm, ode::Method::Rk4})
    CHECK(ode::integrate_linear(rotation_generator(), z0, 2.0, 2.0, {.method = m}) == z0);
  CHECK(ode::rk4_steps(0.0, 5.0) == 0);
  CHECK(ode::rk4_steps(-1.01, 5.0) == 6);
}

TEST_CASE("skew generators conserve the norm") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 5; ++rep) {
    const Tensor k = random_skew(6, rng);
    const Tensor z0 = gradcheck::random_tensor(4, 6, rng);
    const Tensor z1 = ode::integrate_linear(k, z0, 0.0, 2.5);
    for (std::size_t r = 0; r < 4; ++r) {
      double n0 = 0, n1 = 0;
      for (std::size_t c = 0; c < 6; ++c) n0 += z0(r, c) * z0(r, c), n1 += z1(r, c) * z1(r, c);
      CHECK(std::abs(std::sqrt(n1) - std::sqrt(n0)) < 1e-9 * std::sqrt(n0));
    }
  }
}

TEST_CASE("flows invert and compose") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 5; ++rep) {
    const Tensor k = gradcheck::random_tensor(5, 5, rng, -0.5, 0.5);
    const Tensor z0 = gradcheck::random_tensor(1, 5, rng);
    const Tensor there = ode::integrate_linear(k, z0, 0.2, 1.7);
    const Tensor back = ode::integrate_linear(k, there, 1.7, 0.2);
    CHECK(koodos::max_abs_diff(back, z0) < 1e-9);
    const Tensor mid = ode::integrate_linear(k, z0, 0.2, 0.9);
    const Tensor composed = ode::integrate_linear(k, mid, 0.9, 1.7);
    CHECK(koodos::max_abs_diff(composed, there) < 1e-9);
  }
}

TEST_CASE("RK4 on exponential growth") {
  const ode::PlainField f = [](const Tensor& x, double) { return x; };
  const Tensor x0 = Tensor::from({{1.0}});
  // One RK4 step multiplies by the degree-4 Taylor polynomial of e^h.
  const double h = 0.2;
  const double amp = 1 + h + h * h / 2 + h * h * h / 6 + h * h * h * h / 24;
  const double five = ode::integrate_field(f, x0, 0.0, 1.0, {.method = ode::Method::Rk4}).item();
  CHECK(five == doctest::Approx(std::pow(amp, 5)).epsilon(1e-14));
  CHECK(std::abs(five - std::exp(1.0)) < 5e-5);
  const double fine =
      ode::integrate_field(f, x0, 0.0, 1.0, {.method = ode::Method::Rk4, .steps_per_unit = 40}).item();
  CHECK(std::abs(fine - std::exp(1.0)) < 1e-6);
}

TEST_CASE("RK4 converges at fourth order") {
  const Tensor k = Tensor::from({{0.0, 1.0}, {-1.0, -0.3}});
  const Tensor z0 = Tensor::from({{1.0, 0.5}});
  const Tensor exact = ode::integrate_linear(k, z0, 0.0, 2.0);
  auto err = [&](double spu) {
    return koodos::max_abs_diff(
        ode::integrate_linear(k, z0, 0.0, 2.0, {.method = ode::Method::Rk4, .steps_per_unit = spu}), exact);
  };
  const double ratio = err(4) / err(8);
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("gradients flow through expm and RK4") {
  std::mt19937_64 rng(17);
  for (auto m : {ode::Method::Expm, ode::Method::Rk4}) {
    const std::vector<Tensor> leaves = {gradcheck::random_tensor(4, 4, rng, -0.6, 0.6),
                                        gradcheck::random_tensor(2, 4, rng)};
    const std::uint64_t wseed = rng();
    const auto r = gradcheck::check(leaves, [&](ad::Graph& g, const std::vector<ad::Var>& v) {
      std::mt19937_64 wr(wseed);
      const ad::Var z = ode::integrate_linear(v[0], v[1], 0.0, 1.3, {.method = m});
      return ad::sum(ad::mul(z, g.constant(gradcheck::random_tensor(2, 4, wr))));
    });
    CHECK_MESSAGE(r.max_rel_err < 1e-4, ode::to_string(m));
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(ode::integrate_linear(Tensor(2, 3), Tensor(1, 2), 0, 1), koodos::ShapeError);
  CHECK_THROWS_AS(ode::method_from_string("euler"), koodos::InvalidArgument);
  const ode::PlainField bad = [](const Tensor&, double) { return Tensor(1, 3); };
  CHECK_THROWS_AS(ode::integrate_field(bad, Tensor(1, 2), 0, 1), koodos::ShapeError);
}
