// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Integration of latent and parameter flows. States are stored as rows, so
// a batch of m states of dimension n is an m×n tensor and the linear flow
// maps Z to Z·exp(K·Δt)ᵀ. Backward time (t1 < t0) is allowed everywhere.
//
// Graph versions are differentiable by construction: they are built from
// ordinary graph operations, so gradients are exact for the discretization
// that produced the forward value.

#include <functional>
#include <string>

#include "koodos/autodiff.hpp"
#include "koodos/tensor.hpp"

namespace koodos::ode {

enum class Method { Expm, Rk4 };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct IntegrationConfig {
  Method method = Method::Expm;
  double steps_per_unit = 5.0;    // RK4
  double expm_tolerance = 1e-12;  // Taylor truncation, relative to the partial sum

  void validate() const;
};

/// Matrix exponential by scaling and squaring around a truncated Taylor core.
Tensor expm(const Tensor& a, double tolerance = 1e-12);
ad::Var expm(ad::Var a, double tolerance = 1e-12);

/// Number of uniform RK4 steps covering |Δt|; zero for Δt = 0.
std::size_t rk4_steps(double dt, double steps_per_unit);

/// z(t1) for dz/dt = K z, starting from the rows of z0 at t0.
Tensor integrate_linear(const Tensor& k, const Tensor& z0, double t0, double t1,
                        const IntegrationConfig& cfg = {});
ad::Var integrate_linear(ad::Var k, ad::Var z0, double t0, double t1,
                         const IntegrationConfig& cfg = {});

using Field = std::function<ad::Var(ad::Var state, double t)>;
using PlainField = std::function<Tensor(const Tensor& state, double t)>;

/// Classical RK4 with ceil(|Δt|·steps_per_unit) uniform steps of Δt/steps.
ad::Var integrate_field(const Field& field, ad::Var x0, double t0, double t1,
                        const IntegrationConfig& cfg = {});
Tensor integrate_field(const PlainField& field, const Tensor& x0, double t0, double t1,
                       const IntegrationConfig& cfg = {});

}  // namespace koodos::ode
