// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "koodos/tensor.hpp"

namespace koodos {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment accumulators for one parameter group.
struct AdamState {
  AdamHyper hyper;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;

  AdamState() = default;
  explicit AdamState(AdamHyper h) : hyper(h) {}
};

/// One bias-corrected Adam update of `params` in place. Moments are created
/// on the first call; afterwards their shapes must keep matching.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state);
/// Same update for parameters scattered across several owners.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state);

}  // namespace koodos
