// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "koodos/nets.hpp"

#include <cmath>

#include "koodos/error.hpp"
#include "koodos/kernels.hpp"

namespace koodos::nets {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw InvalidArgument("unknown activation '" + s + "'");
}

std::string to_string(TaskKind t) {
  return t == TaskKind::BinaryClassification ? "binary-classification" : "regression";
}

TaskKind task_from_string(const std::string& s) {
  if (s == "binary-classification") return TaskKind::BinaryClassification;
  if (s == "regression") return TaskKind::Regression;
  throw InvalidArgument("unknown task kind '" + s + "' (expected one of: binary-classification, regression)");
}

// ---------------------------------------------------------------------------
// Dense

void DenseSpec::validate() const {
  if (widths.size() < 2) throw InvalidArgument("dense network needs at least one layer");
  for (std::size_t w : widths)
    if (w == 0) throw InvalidArgument("dense network widths must be positive");
}

Dense glorot_dense(const DenseSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  Dense net{spec, {}};
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const std::size_t in = spec.widths[l];
    const std::size_t out = spec.widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Tensor w(in, out);
    for (double& v : w.values()) v = u(rng);
    net.layers.push_back({std::move(w), Tensor(1, out)});
  }
  return net;
}

Tensor apply_activation(Activation a, Tensor x) {
  switch (a) {
    case Activation::Relu:
      for (double& v : x.values()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::Sigmoid:
      for (double& v : x.values()) v = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      break;
    case Activation::Tanh:
      for (double& v : x.values()) v = std::tanh(v);
      break;
    case Activation::Identity: break;
  }
  return x;
}

Tensor forward(const Dense& net, const Tensor& x) {
  if (x.cols() != net.spec.input_width())
    throw ShapeError("forward: input " + x.shape_str() + " does not match network input width " +
                     std::to_string(net.spec.input_width()));
  const auto& K = simd::active();
  Tensor h = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    Tensor next(h.rows(), layer.weight.cols());
    for (std::size_t r = 0; r < h.rows(); ++r)
      std::copy(layer.bias.data(), layer.bias.data() + layer.bias.size(), next.data() + r * next.cols());
    K.gemm_nn(h.rows(), next.cols(), h.cols(), h.data(), layer.weight.data(), next.data(), true);
    const bool last = l + 1 == net.layers.size();
    h = apply_activation(last ? net.spec.output : net.spec.hidden, std::move(next));
  }
  return h;
}

DenseVars bind(ad::Graph& g, const Dense& net, bool trainable) {
  DenseVars vars;
  vars.spec = &net.spec;
  for (const Layer& layer : net.layers) {
    vars.weights.push_back(trainable ? g.param(layer.weight) : g.constant(layer.weight));
    vars.biases.push_back(trainable ? g.param(layer.bias) : g.constant(layer.bias));
  }
  return vars;
}

namespace {

ad::Var activate(Activation a, ad::Var x) {
  switch (a) {
    case Activation::Relu: return ad::relu(x);
    case Activation::Sigmoid: return ad::sigmoid(x);
    case Activation::Tanh: return ad::tanh(x);
    case Activation::Identity: return x;
  }
  return x;
}

}  // namespace

ad::Var forward(const DenseVars& vars, ad::Var x) {
  if (x.cols() != vars.spec->input_width())
    throw ShapeError("forward: input " + x.value().shape_str() +
                     " does not match network input width " +
                     std::to_string(vars.spec->input_width()));
  ad::Var h = x;
  for (std::size_t l = 0; l < vars.weights.size(); ++l) {
    h = ad::add(ad::matmul(h, vars.weights[l]), vars.biases[l]);
    const bool last = l + 1 == vars.weights.size();
    h = activate(last ? vars.spec->output : vars.spec->hidden, h);
  }
  return h;
}

std::vector<ad::Var> all_vars(const DenseVars& vars) {
  std::vector<ad::Var> out;
  for (std::size_t l = 0; l < vars.weights.size(); ++l) {
    out.push_back(vars.weights[l]);
    out.push_back(vars.biases[l]);
  }
  return out;
}

std::vector<Tensor*> all_tensors(Dense& net) {
  std::vector<Tensor*> out;
  for (Layer& layer : net.layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Predictive model

void MlpSpec::validate() const {
  if (widths.size() < 3) throw InvalidArgument("predictive model needs at least one hidden layer");
  for (std::size_t w : widths)
    if (w == 0) throw InvalidArgument("predictive model widths must be positive");
}

ParamLayout ParamLayout::for_spec(const MlpSpec& spec) {
  spec.validate();
  ParamLayout layout;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    const std::size_t in = spec.widths[l];
    const std::size_t out = spec.widths[l + 1];
    layout.entries.push_back({l, ParamKind::Weight, in, out, offset});
    offset += in * out;
    layout.entries.push_back({l, ParamKind::Bias, 1, out, offset});
    offset += out;
  }
  layout.parameter_count = offset;
  return layout;
}

FlatParams FlatParams::from_row(Tensor theta, const MlpSpec& spec) {
  ParamLayout layout = ParamLayout::for_spec(spec);
  if (theta.rows() != 1 || theta.cols() != layout.parameter_count)
    throw ShapeError("parameter vector " + theta.shape_str() + " does not match layout of " +
                     std::to_string(layout.parameter_count) + " parameters");
  return {std::move(theta), spec, std::move(layout)};
}

Dense init_predictive(const MlpSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  return glorot_dense(spec.dense(), rng);
}

FlatParams flatten(const Dense& model, const MlpSpec& spec) {
  ParamLayout layout = ParamLayout::for_spec(spec);
  if (model.layers.size() * 2 != layout.entries.size())
    throw ShapeError("flatten: model has " + std::to_string(model.layers.size()) +
                     " layers, spec expects " + std::to_string(layout.entries.size() / 2));
  Tensor theta(1, layout.parameter_count);
  for (const LayoutEntry& e : layout.entries) {
    const Layer& layer = model.layers[e.layer];
    const Tensor& src = e.kind == ParamKind::Weight ? layer.weight : layer.bias;
    if (src.rows() != e.rows || src.cols() != e.cols)
      throw ShapeError("flatten: layer " + std::to_string(e.layer) + " has shape " +
                       src.shape_str() + ", layout expects (" + std::to_string(e.rows) + "x" +
                       std::to_string(e.cols) + ")");
    std::copy(src.data(), src.data() + src.size(), theta.data() + e.offset);
  }
  return {std::move(theta), spec, std::move(layout)};
}

Dense unflatten(const FlatParams& flat) {
  if (flat.theta.size() != flat.layout.parameter_count)
    throw ShapeError("unflatten: " + std::to_string(flat.theta.size()) +
                     " values but layout describes " + std::to_string(flat.layout.parameter_count));
  Dense model{flat.spec.dense(), {}};
  for (const LayoutEntry& e : flat.layout.entries) {
    const double* src = flat.theta.data() + e.offset;
    Tensor t(e.rows, e.cols, std::vector<double>(src, src + e.rows * e.cols));
    if (e.kind == ParamKind::Weight)
      model.layers.push_back({std::move(t), Tensor()});
    else
      model.layers.back().bias = std::move(t);
  }
  return model;
}

Tensor predict(const FlatParams& params, const Tensor& x) {
  if (x.cols() != params.spec.input_width())
    throw ShapeError("predict: input " + x.shape_str() + " does not match model input width " +
                     std::to_string(params.spec.input_width()));
  return forward(unflatten(params), x);
}

ad::Var forward_logits(const MlpSpec& spec, const ParamLayout& layout, ad::Var theta_row, ad::Var x) {
  if (theta_row.rows() != 1 || theta_row.cols() != layout.parameter_count)
    throw ShapeError("forward_logits: parameter row " + theta_row.value().shape_str() +
                     " does not match layout of " + std::to_string(layout.parameter_count));
  if (x.cols() != spec.input_width())
    throw ShapeError("forward_logits: input " + x.value().shape_str() +
                     " does not match model input width " + std::to_string(spec.input_width()));
  ad::Var h = x;
  const std::size_t layers = layout.entries.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    const LayoutEntry& we = layout.entries[2 * l];
    const LayoutEntry& be = layout.entries[2 * l + 1];
    ad::Var w = ad::flat_slice(theta_row, we.offset, we.rows, we.cols);
    ad::Var b = ad::flat_slice(theta_row, be.offset, 1, be.cols);
    h = ad::add(ad::matmul(h, w), b);
    if (l + 1 < layers) h = ad::relu(h);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Autoencoder

void AutoencoderSpec::validate() const {
  if (param_count == 0) throw InvalidArgument("autoencoder input width must be positive");
  if (widths.empty()) throw InvalidArgument("autoencoder needs at least one encoder layer");
  for (std::size_t w : widths)
    if (w == 0) throw InvalidArgument("autoencoder widths must be positive");
}

DenseSpec AutoencoderSpec::encoder() const {
  DenseSpec s;
  s.widths.push_back(param_count);
  s.widths.insert(s.widths.end(), widths.begin(), widths.end());
  return s;
}

DenseSpec AutoencoderSpec::decoder() const {
  DenseSpec s;
  s.widths.assign(widths.rbegin(), widths.rend());
  s.widths.push_back(param_count);
  return s;
}

Autoencoder init_autoencoder(const AutoencoderSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  Autoencoder ae{spec, {}, {}};
  ae.encoder = glorot_dense(spec.encoder(), rng);
  ae.decoder = glorot_dense(spec.decoder(), rng);
  return ae;
}

Autoencoder identity_autoencoder(std::size_t param_count) {
  AutoencoderSpec spec{param_count, {param_count}};
  Autoencoder ae{spec, {spec.encoder(), {}}, {spec.decoder(), {}}};
  ae.encoder.layers.push_back({Tensor::identity(param_count), Tensor(1, param_count)});
  ae.decoder.layers.push_back({Tensor::identity(param_count), Tensor(1, param_count)});
  return ae;
}

Tensor encode(const Autoencoder& ae, const Tensor& theta_rows) {
  if (theta_rows.cols() != ae.spec.param_count)
    throw ShapeError("encode: parameters " + theta_rows.shape_str() +
                     " do not match autoencoder input width " + std::to_string(ae.spec.param_count));
  return forward(ae.encoder, theta_rows);
}

Tensor encode(const Autoencoder& ae, const FlatParams& theta) { return encode(ae, theta.theta); }

Tensor decode(const Autoencoder& ae, const Tensor& z_rows) {
  if (z_rows.cols() != ae.spec.latent_dim())
    throw ShapeError("decode: latent " + z_rows.shape_str() + " does not match latent dimension " +
                     std::to_string(ae.spec.latent_dim()));
  return forward(ae.decoder, z_rows);
}

FlatParams decode(const Autoencoder& ae, const Tensor& z, const MlpSpec& spec) {
  if (z.rows() != 1) throw ShapeError("decode: expected one latent row, got " + z.shape_str());
  return FlatParams::from_row(decode(ae, z), spec);
}

// ---------------------------------------------------------------------------
// Operator

std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::Full: return "full";
    case OperatorKind::Skew: return "skew";
    case OperatorKind::LowRank: return "lowrank";
    case OperatorKind::MlpDynamics: return "mlp-dynamics";
  }
  return "full";
}

OperatorKind operator_kind_from_string(const std::string& s) {
  if (s == "full") return OperatorKind::Full;
  if (s == "skew") return OperatorKind::Skew;
  if (s == "lowrank") return OperatorKind::LowRank;
  if (s == "mlp-dynamics") return OperatorKind::MlpDynamics;
  throw InvalidArgument("unknown operator kind '" + s + "'");
}

void OperatorSpec::validate() const {
  if (dim == 0) throw InvalidArgument("operator dimension must be positive");
  auto square = [&](const Tensor& t) { return t.rows() == dim && t.cols() == dim; };
  switch (kind) {
    case OperatorKind::Full:
    case OperatorKind::Skew:
      if (matrices.size() != 1 || !square(matrices[0]))
        throw ShapeError("operator '" + to_string(kind) + "' needs one " + std::to_string(dim) + "x" +
                         std::to_string(dim) + " matrix");
      break;
    case OperatorKind::LowRank:
      if (rank == 0 || rank > dim) throw InvalidArgument("lowrank operator needs 1 <= rank <= dim");
      if (matrices.size() != 2)
        throw ShapeError("lowrank operator needs matrices U and V");
      for (const Tensor& m : matrices)
        if (m.rows() != dim || m.cols() != rank)
          throw ShapeError("lowrank factor " + m.shape_str() + " should be (" + std::to_string(dim) +
                           "x" + std::to_string(rank) + ")");
      break;
    case OperatorKind::MlpDynamics:
      net.spec.validate();
      if (net.spec.input_width() != dim || net.spec.output_width() != dim)
        throw ShapeError("mlp-dynamics network must map R^n to R^n");
      break;
  }
}

OperatorSpec init_operator(OperatorKind kind, std::size_t dim, std::size_t rank,
                           std::mt19937_64& rng) {
  OperatorSpec op;
  op.kind = kind;
  op.dim = dim;
  switch (kind) {
    case OperatorKind::Full:
    case OperatorKind::Skew:
      op.matrices.emplace_back(dim, dim);
      break;
    case OperatorKind::LowRank: {
      // U = V = 0 is a stationary point of U·Vᵀ, so the factors start small
      // and random.
      op.rank = rank;
      std::uniform_real_distribution<double> u(-0.1, 0.1);
      for (int k = 0; k < 2; ++k) {
        Tensor m(dim, rank);
        for (double& v : m.values()) v = u(rng) / std::sqrt(static_cast<double>(dim));
        op.matrices.push_back(std::move(m));
      }
      break;
    }
    case OperatorKind::MlpDynamics: {
      op.net = glorot_dense(DenseSpec{{dim, dim, dim}, Activation::Relu, Activation::Identity}, rng);
      // Start from a still flow.
      for (double& v : op.net.layers.back().weight.values()) v = 0.0;
      break;
    }
  }
  op.validate();
  return op;
}

Tensor materialize_operator(const OperatorSpec& op) {
  op.validate();
  switch (op.kind) {
    case OperatorKind::Full: return op.matrices[0];
    case OperatorKind::Skew: {
      const Tensor& b = op.matrices[0];
      Tensor k(op.dim, op.dim);
      for (std::size_t i = 0; i < op.dim; ++i)
        for (std::size_t j = 0; j < op.dim; ++j) k(i, j) = b(i, j) - b(j, i);
      return k;
    }
    case OperatorKind::LowRank: return matmul(op.matrices[0], op.matrices[1].transposed());
    case OperatorKind::MlpDynamics: break;
  }
  throw InvalidArgument("mlp-dynamics operator is nonlinear and has no matrix form");
}

OperatorVars bind(ad::Graph& g, const OperatorSpec& op, bool trainable) {
  op.validate();
  OperatorVars vars;
  vars.spec = &op;
  for (const Tensor& m : op.matrices) vars.matrices.push_back(trainable ? g.param(m) : g.constant(m));
  if (op.kind == OperatorKind::MlpDynamics) vars.net = bind(g, op.net, trainable);
  return vars;
}

ad::Var materialize_operator(const OperatorVars& vars) {
  switch (vars.spec->kind) {
    case OperatorKind::Full: return vars.matrices[0];
    case OperatorKind::Skew: return ad::sub(vars.matrices[0], ad::transpose(vars.matrices[0]));
    case OperatorKind::LowRank:
      return ad::matmul(vars.matrices[0], ad::transpose(vars.matrices[1]));
    case OperatorKind::MlpDynamics: break;
  }
  throw InvalidArgument("mlp-dynamics operator is nonlinear and has no matrix form");
}

ad::Var latent_field(const OperatorVars& vars, ad::Var k_matrix, ad::Var z_rows) {
  if (vars.spec->kind == OperatorKind::MlpDynamics) return forward(vars.net, z_rows);
  return ad::matmul(z_rows, ad::transpose(k_matrix));
}

std::vector<ad::Var> all_vars(const OperatorVars& vars) {
  std::vector<ad::Var> out = vars.matrices;
  if (vars.spec->kind == OperatorKind::MlpDynamics) {
    const auto net = all_vars(vars.net);
    out.insert(out.end(), net.begin(), net.end());
  }
  return out;
}

std::vector<Tensor*> all_tensors(OperatorSpec& op) {
  std::vector<Tensor*> out;
  for (Tensor& m : op.matrices) out.push_back(&m);
  if (op.kind == OperatorKind::MlpDynamics) {
    const auto net = all_tensors(op.net);
    out.insert(out.end(), net.begin(), net.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Direct dynamics

DirectDynamics init_direct_dynamics(std::size_t param_count, const std::vector<std::size_t>& hidden,
                                    std::mt19937_64& rng) {
  DenseSpec spec;
  spec.widths.push_back(param_count + 1);
  spec.widths.insert(spec.widths.end(), hidden.begin(), hidden.end());
  spec.widths.push_back(param_count);
  spec.hidden = Activation::Tanh;
  DirectDynamics h{glorot_dense(spec, rng)};
  // Start from a still flow; the last layer learns the drift.
  for (double& v : h.net.layers.back().weight.values()) v = 0.0;
  return h;
}

Tensor direct_dynamics(const DirectDynamics& h, const Tensor& theta_row, double t) {
  const std::size_t p = h.net.spec.output_width();
  if (h.net.spec.input_width() != p + 1)
    throw ShapeError("direct dynamics network input width must be P+1");
  if (theta_row.cols() != p)
    throw ShapeError("direct dynamics: parameters " + theta_row.shape_str() + " but network expects P=" +
                     std::to_string(p));
  Tensor in(theta_row.rows(), p + 1);
  for (std::size_t r = 0; r < theta_row.rows(); ++r) {
    std::copy(theta_row.data() + r * p, theta_row.data() + (r + 1) * p, in.data() + r * (p + 1));
    in(r, p) = t;
  }
  return forward(h.net, in);
}

ad::Var direct_dynamics(const DenseVars& h, ad::Var theta_rows, double t) {
  const std::size_t p = h.spec->output_width();
  if (h.spec->input_width() != p + 1 || theta_rows.cols() != p)
    throw ShapeError("direct dynamics: parameters " + theta_rows.value().shape_str() +
                     " do not match network of P=" + std::to_string(p));
  ad::Var tcol = theta_rows.graph()->constant(Tensor(theta_rows.rows(), 1, t));
  const ad::Var parts[] = {theta_rows, tcol};
  return forward(h, ad::concat_cols(parts));
}

}  // namespace koodos::nets
