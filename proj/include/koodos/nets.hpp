// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Networks: the per-domain predictive MLP g(·; θ) with its flat parameter
// layout, the parameter autoencoder (encoder φ / decoder φ⁻¹), Koopman
// operator parameterizations, and the direct parameter-dynamics network
// used when the Koopman space is bypassed.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "koodos/autodiff.hpp"
#include "koodos/tensor.hpp"

namespace koodos::nets {

enum class Activation { Relu, Sigmoid, Tanh, Identity };
enum class TaskKind { BinaryClassification, Regression };

std::string to_string(Activation a);
std::string to_string(TaskKind t);
Activation activation_from_string(const std::string& s);
TaskKind task_from_string(const std::string& s);

/// A stack of affine layers. widths = (input, hidden..., output).
struct DenseSpec {
  std::vector<std::size_t> widths;
  Activation hidden = Activation::Relu;
  Activation output = Activation::Identity;

  void validate() const;  // ≥ 1 layer, positive widths
  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t layer_count() const { return widths.size() - 1; }
  friend bool operator==(const DenseSpec&, const DenseSpec&) = default;
};

/// Weight is in×out so a batch X (N×in) maps to X·W + b.
struct Layer {
  Tensor weight;
  Tensor bias;  // 1×out
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct Dense {
  DenseSpec spec;
  std::vector<Layer> layers;
  friend bool operator==(const Dense&, const Dense&) = default;
};

/// Glorot-uniform weights, zero biases.
Dense glorot_dense(const DenseSpec& spec, std::mt19937_64& rng);
Tensor apply_activation(Activation a, Tensor x);
/// Plain forward pass (no graph).
Tensor forward(const Dense& net, const Tensor& x);

/// Graph leaves for a Dense network.
struct DenseVars {
  const DenseSpec* spec = nullptr;
  std::vector<ad::Var> weights;
  std::vector<ad::Var> biases;
};
DenseVars bind(ad::Graph& g, const Dense& net, bool trainable);
ad::Var forward(const DenseVars& vars, ad::Var x);
/// Every Var of `vars`, weights and biases interleaved layer by layer.
std::vector<ad::Var> all_vars(const DenseVars& vars);
std::vector<Tensor*> all_tensors(Dense& net);

// ---------------------------------------------------------------------------
// Predictive model

/// The predictive model: ReLU hidden layers, sigmoid output for binary
/// classification and identity output for regression.
struct MlpSpec {
  std::vector<std::size_t> widths;  // (input, hidden..., output), ≥ 1 hidden
  TaskKind task = TaskKind::BinaryClassification;

  void validate() const;
  Activation output_activation() const {
    return task == TaskKind::BinaryClassification ? Activation::Sigmoid : Activation::Identity;
  }
  DenseSpec dense() const { return {widths, Activation::Relu, output_activation()}; }
  std::size_t input_width() const { return widths.front(); }
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

enum class ParamKind { Weight, Bias };

struct LayoutEntry {
  std::size_t layer;
  ParamKind kind;
  std::size_t rows;
  std::size_t cols;
  std::size_t offset;
  friend bool operator==(const LayoutEntry&, const LayoutEntry&) = default;
};

/// Layer-major order: W₀, b₀, W₁, b₁, ...
struct ParamLayout {
  std::vector<LayoutEntry> entries;
  std::size_t parameter_count = 0;
  static ParamLayout for_spec(const MlpSpec& spec);
  friend bool operator==(const ParamLayout&, const ParamLayout&) = default;
};

struct FlatParams {
  Tensor theta;  // 1×P
  MlpSpec spec;
  ParamLayout layout;

  /// Wraps a 1×P row; throws ShapeError when P does not match the layout.
  static FlatParams from_row(Tensor theta, const MlpSpec& spec);
  std::size_t size() const { return theta.size(); }
};

Dense init_predictive(const MlpSpec& spec, std::mt19937_64& rng);
FlatParams flatten(const Dense& model, const MlpSpec& spec);
Dense unflatten(const FlatParams& flat);

/// Outputs after the output activation: probabilities for binary tasks.
Tensor predict(const FlatParams& params, const Tensor& x);
/// Graph forward of one parameter row (1×P) on a batch; returns the output
/// layer before its activation.
ad::Var forward_logits(const MlpSpec& spec, const ParamLayout& layout, ad::Var theta_row, ad::Var x);

// ---------------------------------------------------------------------------
// Autoencoder

/// widths lists the encoder layer sizes after the P-dimensional input; the
/// last entry is the latent dimension n. The decoder mirrors it.
struct AutoencoderSpec {
  std::size_t param_count = 0;
  std::vector<std::size_t> widths{1024, 512, 128, 32};

  void validate() const;
  std::size_t latent_dim() const { return widths.back(); }
  DenseSpec encoder() const;
  DenseSpec decoder() const;
  friend bool operator==(const AutoencoderSpec&, const AutoencoderSpec&) = default;
};

struct Autoencoder {
  AutoencoderSpec spec;
  Dense encoder;
  Dense decoder;
};

Autoencoder init_autoencoder(const AutoencoderSpec& spec, std::mt19937_64& rng);
/// Square single-layer autoencoder with identity weights (test fixture).
Autoencoder identity_autoencoder(std::size_t param_count);
/// z = φ(θ) for each row.
Tensor encode(const Autoencoder& ae, const Tensor& theta_rows);
Tensor encode(const Autoencoder& ae, const FlatParams& theta);
Tensor decode(const Autoencoder& ae, const Tensor& z_rows);
FlatParams decode(const Autoencoder& ae, const Tensor& z, const MlpSpec& spec);

// ---------------------------------------------------------------------------
// Koopman operator

enum class OperatorKind { Full, Skew, LowRank, MlpDynamics };
std::string to_string(OperatorKind k);
OperatorKind operator_kind_from_string(const std::string& s);

/// Trainable parameterization of the latent dynamics:
///   full:         K stored directly (n×n)
///   skew:         K = B − Bᵀ
///   lowrank:      K = U·Vᵀ with U, V n×k
///   mlp-dynamics: dz/dt = net(z), two linear layers with a ReLU; nonlinear,
///                 so it has no matrix form and no spectrum.
struct OperatorSpec {
  OperatorKind kind = OperatorKind::Full;
  std::size_t dim = 32;
  std::size_t rank = 0;  // lowrank only
  std::vector<Tensor> matrices;
  Dense net;  // mlp-dynamics only

  void validate() const;
  bool is_linear() const { return kind != OperatorKind::MlpDynamics; }
};

OperatorSpec init_operator(OperatorKind kind, std::size_t dim, std::size_t rank,
                           std::mt19937_64& rng);
Tensor materialize_operator(const OperatorSpec& op);

struct OperatorVars {
  const OperatorSpec* spec = nullptr;
  std::vector<ad::Var> matrices;
  DenseVars net;
};
OperatorVars bind(ad::Graph& g, const OperatorSpec& op, bool trainable);
/// n×n operator node; throws InvalidArgument for mlp-dynamics.
ad::Var materialize_operator(const OperatorVars& vars);
/// Latent vector field applied to state rows (m×n): rows of (K·zᵀ)ᵀ or net(z).
ad::Var latent_field(const OperatorVars& vars, ad::Var k_matrix, ad::Var z_rows);
std::vector<ad::Var> all_vars(const OperatorVars& vars);
std::vector<Tensor*> all_tensors(OperatorSpec& op);

// ---------------------------------------------------------------------------
// Direct parameter dynamics (Koopman space bypassed)

/// h(θ, t): input is θ concatenated with t, output dθ/dt.
struct DirectDynamics {
  Dense net;
};

DirectDynamics init_direct_dynamics(std::size_t param_count, const std::vector<std::size_t>& hidden,
                                    std::mt19937_64& rng);
Tensor direct_dynamics(const DirectDynamics& h, const Tensor& theta_row, double t);
/// Graph version over state rows (m×P).
ad::Var direct_dynamics(const DenseVars& h, ad::Var theta_rows, double t);

}  // namespace koodos::nets
