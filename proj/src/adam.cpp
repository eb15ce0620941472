// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "koodos/adam.hpp"

#include <cmath>
#include <string>

#include "koodos/error.hpp"

namespace koodos {

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state) {
  const AdamHyper& h = state.hyper;
  if (!(h.lr > 0.0)) throw InvalidArgument("adam: learning rate must be positive");
  if (params.size() != grads.size())
    throw ShapeError("adam: " + std::to_string(params.size()) + " parameters but " +
                     std::to_string(grads.size()) + " gradients");
  if (state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.emplace_back(p->rows(), p->cols());
      state.v.emplace_back(p->rows(), p->cols());
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam: parameter count changed between steps");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Tensor& g = *grads[k];
    if (g.rows() != params[k]->rows() || g.cols() != params[k]->cols() ||
        state.m[k].size() != params[k]->size())
      throw ShapeError("adam: gradient " + g.shape_str() + " does not match parameter " +
                       params[k]->shape_str());
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    double* p = params[k]->data();
    double* m = state.m[k].data();
    double* v = state.v[k].data();
    const double* g = grads[k]->data();
    for (std::size_t i = 0; i < params[k]->size(); ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      p[i] -= h.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + h.eps);
    }
  }
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state) {
  std::vector<Tensor*> ps;
  std::vector<const Tensor*> gs;
  for (Tensor& p : params) ps.push_back(&p);
  for (const Tensor& g : grads) gs.push_back(&g);
  adam_step(std::span<Tensor* const>(ps), std::span<const Tensor* const>(gs), state);
}

}  // namespace koodos
