// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "gradcheck.hpp"
#include "koodos/error.hpp"
#include "koodos/nets.hpp"
#include "linalg_oracle.hpp"

using koodos::Tensor;
namespace ad = koodos::ad;
namespace nets = koodos::nets;

TEST_CASE("parameter count of the default predictive network") {
  const nets::MlpSpec spec{{2, 50, 50, 50, 1}, nets::TaskKind::BinaryClassification};
  // 2·50+50 + 50·50+50 + 50·50+50 + 50·1+1 = 150 + 2550 + 2550 + 51
  CHECK(nets::ParamLayout::for_spec(spec).parameter_count == 5301);
}

TEST_CASE("flatten and unflatten are exact inverses") {
  std::mt19937_64 rng(3);
  const nets::MlpSpec spec{{2, 7, 5, 1}, nets::TaskKind::BinaryClassification};
  const nets::Dense model = nets::init_predictive(spec, rng);
  const nets::FlatParams flat = nets::flatten(model, spec);
  CHECK(flat.size() == flat.layout.parameter_count);
  CHECK(nets::unflatten(flat) == model);
  const nets::FlatParams again = nets::flatten(nets::unflatten(flat), spec);
  CHECK(again.theta == flat.theta);
}

TEST_CASE("all-zero parameters predict one half") {
  const nets::MlpSpec spec{{2, 4, 1}, nets::TaskKind::BinaryClassification};
  const auto p = nets::FlatParams::from_row(Tensor(1, nets::ParamLayout::for_spec(spec).parameter_count), spec);
  const Tensor out = nets::predict(p, Tensor::from({{1.5, -2.0}, {0.0, 3.0}}));
  CHECK(out == Tensor(2, 1, 0.5));
}

TEST_CASE("hand-set single hidden unit") {
  // h = relu(x0 − x1 + 0.5), y = 2h − 1 for a regression head.
  const nets::MlpSpec spec{{2, 1, 1}, nets::TaskKind::Regression};
  const Tensor theta = Tensor::from({{1.0, -1.0, 0.5, 2.0, -1.0}});
  const auto p = nets::FlatParams::from_row(theta, spec);
  const Tensor out = nets::predict(p, Tensor::from({{1.0, 0.0}, {0.0, 2.0}}));
  CHECK(out(0, 0) == 2.0);
  CHECK(out(1, 0) == -1.0);
}

TEST_CASE("graph forward matches the plain forward and is differentiable") {
  std::mt19937_64 rng(11);
  const nets::MlpSpec spec{{2, 6, 4, 1}, nets::TaskKind::BinaryClassification};
  const nets::FlatParams flat = nets::flatten(nets::init_predictive(spec, rng), spec);
  const Tensor x = gradcheck::random_tensor(9, 2, rng, -2, 2);
  ad::Graph g;
  const ad::Var logits = nets::forward_logits(spec, flat.layout, g.constant(flat.theta), g.constant(x));
  const Tensor prob = nets::predict(flat, x);
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(1.0 / (1.0 + std::exp(-logits.value()[i])) == doctest::Approx(prob[i]).epsilon(1e-14));

  Tensor y(9, 1);
  for (double& v : y.values()) v = static_cast<double>(rng() % 2);
  const auto r = gradcheck::check({flat.theta}, [&](ad::Graph& gg, const std::vector<ad::Var>& v) {
    return ad::bce_logits_loss(nets::forward_logits(spec, flat.layout, v[0], gg.constant(x)),
                               gg.constant(y));
  });
  CHECK(r.max_rel_err < 1e-4);
}

TEST_CASE("autoencoder shapes") {
  std::mt19937_64 rng(1);
  const nets::AutoencoderSpec spec{40, {16, 8}};
  const nets::Autoencoder ae = nets::init_autoencoder(spec, rng);
  CHECK(ae.encoder.spec.widths == std::vector<std::size_t>{40, 16, 8});
  CHECK(ae.decoder.spec.widths == std::vector<std::size_t>{8, 16, 40});
  const Tensor z = nets::encode(ae, gradcheck::random_tensor(3, 40, rng));
  CHECK(z.rows() == 3);
  CHECK(z.cols() == 8);
  CHECK(nets::decode(ae, z).cols() == 40);

  const nets::Autoencoder id = nets::identity_autoencoder(5);
  const Tensor t = Tensor::from({{1, -2, 3, -4, 5}});
  CHECK(nets::decode(id, nets::encode(id, t)) == t);
}

TEST_CASE("skew operator is exactly antisymmetric") {
  std::mt19937_64 rng(9);
  nets::OperatorSpec op = nets::init_operator(nets::OperatorKind::Skew, 6, 0, rng);
  op.matrices[0] = gradcheck::random_tensor(6, 6, rng);
  const Tensor k = nets::materialize_operator(op);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK(k(i, j) == -k(j, i));

  op = nets::init_operator(nets::OperatorKind::Skew, 2, 0, rng);
  op.matrices[0] = Tensor::from({{0, 1}, {0, 0}});
  const Tensor k2 = nets::materialize_operator(op);
  // λ² − tr·λ + det = λ² + 1, roots ±i.
  CHECK(k2(0, 0) + k2(1, 1) == 0.0);
  CHECK(oracle::determinant(k2) == 1.0);
}

TEST_CASE("low-rank operator has the configured numerical rank") {
  std::mt19937_64 rng(4);
  const nets::OperatorSpec op = nets::init_operator(nets::OperatorKind::LowRank, 10, 3, rng);
  CHECK(oracle::rank(nets::materialize_operator(op)) == 3);
  CHECK_THROWS_AS(nets::init_operator(nets::OperatorKind::LowRank, 4, 5, rng), koodos::InvalidArgument);
}

TEST_CASE("freshly initialised dynamics networks are zero fields") {
  std::mt19937_64 rng(2);
  const auto h = nets::init_direct_dynamics(7, {16, 16}, rng);
  const Tensor theta = gradcheck::random_tensor(1, 7, rng);
  CHECK(nets::direct_dynamics(h, theta, 0.3) == Tensor(1, 7));

  const nets::OperatorSpec op = nets::init_operator(nets::OperatorKind::MlpDynamics, 5, 0, rng);
  ad::Graph g;
  const nets::OperatorVars vars = nets::bind(g, op, false);
  const ad::Var z = g.constant(gradcheck::random_tensor(3, 5, rng));
  CHECK(nets::latent_field(vars, ad::Var{}, z).value() == Tensor(3, 5));
}

TEST_CASE("name round trips and rejects unknown names") {
  for (auto k : {nets::OperatorKind::Full, nets::OperatorKind::Skew, nets::OperatorKind::LowRank,
                 nets::OperatorKind::MlpDynamics})
    CHECK(nets::operator_kind_from_string(nets::to_string(k)) == k);
  CHECK(nets::task_from_string("regression") == nets::TaskKind::Regression);
  CHECK_THROWS_AS(nets::task_from_string("ranking"), koodos::InvalidArgument);
}
