// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "koodos/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "koodos/error.hpp"
#include "koodos/kernels.hpp"

namespace koodos::ad {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::Relu: return "relu";
    case Op::Sigmoid: return "sigmoid";
    case Op::Tanh: return "tanh";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::SliceRows: return "slice_rows";
    case Op::SliceCols: return "slice_cols";
    case Op::ConcatRows: return "concat_rows";
    case Op::ConcatCols: return "concat_cols";
    case Op::FlatSlice: return "flat_slice";
    case Op::Transpose: return "transpose";
    case Op::GatherRows: return "gather_rows";
    case Op::RowNorms: return "row_norms";
    case Op::MseLoss: return "mse_loss";
    case Op::BceLoss: return "bce_loss";
    case Op::BceLogitsLoss: return "bce_logits_loss";
    case Op::SoftmaxCeLoss: return "softmax_cross_entropy_loss";
    case Op::SquaredL2Distance: return "squared_l2_distance";
  }
  return "unknown";
}

const Tensor& Var::value() const {
  if (!graph_) throw InvalidArgument("value() on an unbound Var");
  return graph_->value(*this);
}

// ---------------------------------------------------------------------------
// Graph

struct GraphAccess {
  using Aux = Graph::Aux;
  static Var push(Graph& g, Op op, std::vector<std::uint32_t> in, Tensor value, Aux aux) {
    return g.push(op, std::move(in), std::move(value), std::move(aux));
  }
  static Var push(Graph& g, Op op, std::vector<std::uint32_t> in, Tensor value) {
    return g.push(op, std::move(in), std::move(value), Aux{});
  }
};

Var Graph::leaf(Tensor value, bool trainable) {
  value.require_finite("graph leaf");
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.requires_grad = trainable;
  n.trainable = trainable;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::param(Tensor value) { return leaf(std::move(value), true); }
Var Graph::constant(Tensor value) { return leaf(std::move(value), false); }

Var Graph::push(Op op, std::vector<std::uint32_t> inputs, Tensor value, Aux aux) {
  if (!value.all_finite())
    throw NumericError(std::string(op_name(op)) + ": produced a non-finite value " +
                       value.shape_str());
  Node n;
  n.op = op;
  n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                [&](std::uint32_t i) { return nodes_[i].requires_grad; });
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  n.aux = std::move(aux);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

const Tensor& Graph::value(Var v) const {
  if (v.graph() != this || v.id() >= nodes_.size())
    throw InvalidArgument("Var does not belong to this graph");
  return nodes_[v.id()].value;
}

Op Graph::op(Var v) const {
  if (v.graph() != this || v.id() >= nodes_.size())
    throw InvalidArgument("Var does not belong to this graph");
  return nodes_[v.id()].op;
}

const Tensor& Gradients::of(Var leaf) const {
  if (!has(leaf))
    throw InvalidArgument("no gradient for node " + std::to_string(leaf.id()) +
                          ": not a trainable leaf of the differentiated graph (detached)");
  return grads_[leaf.id()];
}

bool Gradients::has(Var leaf) const {
  return leaf.graph() == graph_ && leaf.id() < present_.size() && present_[leaf.id()];
}

namespace {

Tensor& slot(std::vector<Tensor>& grads, std::uint32_t id, const Tensor& like) {
  Tensor& g = grads[id];
  if (g.empty() && !like.empty()) g = Tensor(like.rows(), like.cols());
  return g;
}

void add_into(Tensor& dst, const Tensor& src, double factor = 1.0) {
  simd::active().axpy(src.size(), factor, src.data(), dst.data());
}

}  // namespace

Gradients Graph::backward(Var loss) const {
  const Tensor& lv = value(loss);
  if (!lv.is_scalar())
    throw ShapeError("backward requires a scalar (1x1) loss, got " + lv.shape_str());
  std::vector<Tensor> grads(nodes_.size());
  grads[loss.id()] = Tensor(1, 1, 1.0);
  for (std::int64_t id = loss.id(); id >= 0; --id) {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.op == Op::Leaf || !node.requires_grad || grads[id].empty()) continue;
    backprop_node(node, grads[id], grads);
    // Interior gradients are no longer needed once propagated.
    grads[id] = Tensor();
  }
  Gradients out;
  out.graph_ = this;
  out.grads_.resize(nodes_.size());
  out.present_.assign(nodes_.size(), false);
  for (std::size_t id = 0; id <= loss.id(); ++id) {
    const Node& node = nodes_[id];
    if (node.op != Op::Leaf || !node.trainable) continue;
    out.present_[id] = true;
    out.grads_[id] = grads[id].empty() ? Tensor(node.value.rows(), node.value.cols())
                                       : std::move(grads[id]);
  }
  return out;
}

void Graph::backprop_node(const Node& node, const Tensor& g, std::vector<Tensor>& grads) const {
  const auto& in = node.inputs;
  auto needs = [&](std::size_t k) { return nodes_[in[k]].requires_grad; };
  auto val = [&](std::size_t k) -> const Tensor& { return nodes_[in[k]].value; };
  auto grad = [&](std::size_t k) -> Tensor& { return slot(grads, in[k], val(k)); };
  const auto& K = simd::active();

  switch (node.op) {
    case Op::Leaf: break;
    case Op::MatMul: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      if (needs(0)) K.gemm_nt(a.rows(), a.cols(), b.cols(), g.data(), b.data(), grad(0).data(), true);
      if (needs(1)) K.gemm_tn(b.rows(), b.cols(), a.rows(), a.data(), g.data(), grad(1).data(), true);
      break;
    }
    case Op::Add:
    case Op::Sub: {
      const double sign = node.op == Op::Add ? 1.0 : -1.0;
      if (needs(0)) add_into(grad(0), g);
      if (needs(1)) {
        Tensor& gb = grad(1);
        if (val(1).rows() == g.rows()) {
          add_into(gb, g, sign);
        } else {
          for (std::size_t r = 0; r < g.rows(); ++r)
            K.axpy(g.cols(), sign, g.data() + r * g.cols(), gb.data());
        }
      }
      break;
    }
    case Op::Mul: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      if (needs(0)) {
        Tensor& ga = grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
      }
      if (needs(1)) {
        Tensor& gb = grad(1);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
      }
      break;
    }
    case Op::Scale:
      if (needs(0)) add_into(grad(0), g, node.aux.scalar);
      break;
    case Op::Relu: {
      const Tensor& a = val(0);
      Tensor& ga = grad(0);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (a[i] > 0.0) ga[i] += g[i];
      break;
    }
    case Op::Sigmoid: {
      const Tensor& y = node.value;
      Tensor& ga = grad(0);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
      break;
    }
    case Op::Tanh: {
      const Tensor& y = node.value;
      Tensor& ga = grad(0);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case Op::Sum:
    case Op::Mean: {
      Tensor& ga = grad(0);
      const double v = node.op == Op::Sum ? g[0] : g[0] / static_cast<double>(ga.size());
      for (double& x : ga.values()) x += v;
      break;
    }
    case Op::SliceRows: {
      Tensor& ga = grad(0);
      const std::size_t off = node.aux.a * ga.cols();
      K.axpy(g.size(), 1.0, g.data(), ga.data() + off);
      break;
    }
    case Op::SliceCols: {
      Tensor& ga = grad(0);
      const std::size_t c0 = node.aux.a;
      for (std::size_t r = 0; r < g.rows(); ++r)
        K.axpy(g.cols(), 1.0, g.data() + r * g.cols(), ga.data() + r * ga.cols() + c0);
      break;
    }
    case Op::ConcatRows: {
      std::size_t off = 0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        const std::size_t n = val(k).size();
        if (needs(k)) K.axpy(n, 1.0, g.data() + off, grad(k).data());
        off += n;
      }
      break;
    }
    case Op::ConcatCols: {
      std::size_t c0 = 0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        const std::size_t w = val(k).cols();
        if (needs(k)) {
          Tensor& gk = grad(k);
          for (std::size_t r = 0; r < g.rows(); ++r)
            K.axpy(w, 1.0, g.data() + r * g.cols() + c0, gk.data() + r * w);
        }
        c0 += w;
      }
      break;
    }
    case Op::FlatSlice:
      K.axpy(g.size(), 1.0, g.data(), grad(0).data() + node.aux.a);
      break;
    case Op::Transpose: {
      Tensor& ga = grad(0);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
      break;
    }
    case Op::GatherRows: {
      Tensor& ga = grad(0);
      const std::size_t w = ga.cols();
      for (std::size_t k = 0; k < node.aux.index.size(); ++k)
        K.axpy(w, 1.0, g.data() + k * w, ga.data() + node.aux.index[k] * w);
      break;
    }
    case Op::RowNorms: {
      const Tensor& a = val(0);
      Tensor& ga = grad(0);
      for (std::size_t r = 0; r < a.rows(); ++r) {
        const double n = node.value[r];
        if (n > 0.0) K.axpy(a.cols(), g[r] / n, a.data() + r * a.cols(), ga.data() + r * a.cols());
      }
      break;
    }
    case Op::MseLoss: {
      const Tensor& p = val(0);
      const Tensor& t = val(1);
      const double f = 2.0 * g[0] / static_cast<double>(p.size());
      if (needs(0)) {
        Tensor& gp = grad(0);
        for (std::size_t i = 0; i < p.size(); ++i) gp[i] += f * (p[i] - t[i]);
      }
      if (needs(1)) {
        Tensor& gt = grad(1);
        for (std::size_t i = 0; i < p.size(); ++i) gt[i] -= f * (p[i] - t[i]);
      }
      break;
    }
    case Op::BceLoss: {
      const Tensor& p = val(0);
      const Tensor& y = val(1);
      const double f = g[0] / static_cast<double>(p.size());
      constexpr double eps = 1e-12;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = std::clamp(p[i], eps, 1.0 - eps);
        if (needs(0)) grad(0)[i] += f * (-y[i] / pc + (1.0 - y[i]) / (1.0 - pc));
        if (needs(1)) grad(1)[i] += -f * (std::log(pc) - std::log1p(-pc));
      }
      break;
    }
    case Op::BceLogitsLoss: {
      const Tensor& x = val(0);
      const Tensor& y = val(1);
      const double f = g[0] / static_cast<double>(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = x[i] >= 0 ? 1.0 / (1.0 + std::exp(-x[i]))
                                   : std::exp(x[i]) / (1.0 + std::exp(x[i]));
        if (needs(0)) grad(0)[i] += f * (s - y[i]);
        if (needs(1)) grad(1)[i] += -f * x[i];
      }
      break;
    }
    case Op::SoftmaxCeLoss: {
      const Tensor& x = val(0);
      const Tensor& y = val(1);
      const double f = g[0] / static_cast<double>(x.rows());
      const std::size_t c = x.cols();
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double* xr = x.data() + r * c;
        const double* yr = y.data() + r * c;
        const double mx = *std::max_element(xr, xr + c);
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) z += std::exp(xr[j] - mx);
        const double lse = mx + std::log(z);
        double ysum = 0.0;
        for (std::size_t j = 0; j < c; ++j) ysum += yr[j];
        for (std::size_t j = 0; j < c; ++j) {
          if (needs(0)) grad(0)(r, j) += f * (ysum * std::exp(xr[j] - lse) - yr[j]);
          if (needs(1)) grad(1)(r, j) += f * (lse - xr[j]);
        }
      }
      break;
    }
    case Op::SquaredL2Distance: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = 2.0 * g[0] * (a[i] - b[i]);
        if (needs(0)) grad(0)[i] += d;
        if (needs(1)) grad(1)[i] -= d;
      }
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Operations

namespace {

Graph& graph_of(Var a) {
  if (!a.valid()) throw InvalidArgument("operation on an unbound Var");
  return *a.graph();
}

Graph& graph_of(Var a, Var b, std::string_view op) {
  Graph& g = graph_of(a);
  if (b.graph() != &g) throw InvalidArgument(std::string(op) + ": operands belong to different graphs");
  return g;
}

[[noreturn]] void shape_mismatch(std::string_view op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

void require_same_shape(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_mismatch(op, a, b);
}

template <typename F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

Var add_sub(Var a, Var b, bool subtract) {
  const std::string_view name = subtract ? "sub" : "add";
  Graph& g = graph_of(a, b, name);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const bool broadcast = y.rows() == 1 && x.rows() != 1 && y.cols() == x.cols();
  if (!broadcast) require_same_shape(name, x, y);
  Tensor out = x;
  const double sign = subtract ? -1.0 : 1.0;
  const auto& K = simd::active();
  if (broadcast) {
    for (std::size_t r = 0; r < x.rows(); ++r) K.axpy(x.cols(), sign, y.data(), out.data() + r * x.cols());
  } else {
    K.axpy(x.size(), sign, y.data(), out.data());
  }
  return GraphAccess::push(g, subtract ? Op::Sub : Op::Add, {a.id(), b.id()}, std::move(out));
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b, "matmul");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.cols() != y.rows()) shape_mismatch("matmul", x, y);
  return GraphAccess::push(g, Op::MatMul, {a.id(), b.id()}, koodos::matmul(x, y));
}

Var add(Var a, Var b) { return add_sub(a, b, false); }
Var sub(Var a, Var b) { return add_sub(a, b, true); }

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b, "mul");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same_shape("mul", x, y);
  Tensor out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return GraphAccess::push(g, Op::Mul, {a.id(), b.id()}, std::move(out));
}

Var scale(Var a, double factor) {
  Graph& g = graph_of(a);
  GraphAccess::Aux aux;
  aux.scalar = factor;
  return GraphAccess::push(g, Op::Scale, {a.id()}, map(a.value(), [=](double v) { return v * factor; }),
                           std::move(aux));
}

Var relu(Var a) {
  return GraphAccess::push(graph_of(a), Op::Relu, {a.id()},
                           map(a.value(), [](double v) { return v > 0.0 ? v : 0.0; }));
}

Var sigmoid(Var a) {
  return GraphAccess::push(graph_of(a), Op::Sigmoid, {a.id()}, map(a.value(), stable_sigmoid));
}

Var tanh(Var a) {
  return GraphAccess::push(graph_of(a), Op::Tanh, {a.id()},
                           map(a.value(), [](double v) { return std::tanh(v); }));
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return GraphAccess::push(graph_of(a), Op::Sum, {a.id()}, Tensor(1, 1, s));
}

Var mean(Var a) {
  const Tensor& x = a.value();
  if (x.empty()) throw ShapeError("mean of an empty tensor");
  double s = 0.0;
  for (double v : x.values()) s += v;
  return GraphAccess::push(graph_of(a), Op::Mean, {a.id()},
                           Tensor(1, 1, s / static_cast<double>(x.size())));
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  if (begin > end || end > x.rows())
    throw ShapeError("slice_rows [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of range for " + x.shape_str());
  Tensor out(end - begin, x.cols());
  std::copy(x.data() + begin * x.cols(), x.data() + end * x.cols(), out.data());
  GraphAccess::Aux aux;
  aux.a = begin;
  return GraphAccess::push(graph_of(a), Op::SliceRows, {a.id()}, std::move(out), std::move(aux));
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  if (begin > end || end > x.cols())
    throw ShapeError("slice_cols [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of range for " + x.shape_str());
  Tensor out(x.rows(), end - begin);
  for (std::size_t r = 0; r < x.rows(); ++r)
    std::copy(x.data() + r * x.cols() + begin, x.data() + r * x.cols() + end,
              out.data() + r * out.cols());
  GraphAccess::Aux aux;
  aux.a = begin;
  return GraphAccess::push(graph_of(a), Op::SliceCols, {a.id()}, std::move(out), std::move(aux));
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows of zero tensors");
  Graph& g = graph_of(parts.front());
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  std::vector<std::uint32_t> ids;
  for (const Var& p : parts) {
    graph_of(parts.front(), p, "concat_rows");
    if (p.cols() != cols) shape_mismatch("concat_rows", parts.front().value(), p.value());
    rows += p.rows();
    ids.push_back(p.id());
  }
  Tensor out(rows, cols);
  std::size_t off = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.data() + off);
    off += p.value().size();
  }
  return GraphAccess::push(g, Op::ConcatRows, std::move(ids), std::move(out));
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols of zero tensors");
  Graph& g = graph_of(parts.front());
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  std::vector<std::uint32_t> ids;
  for (const Var& p : parts) {
    graph_of(parts.front(), p, "concat_cols");
    if (p.rows() != rows) shape_mismatch("concat_cols", parts.front().value(), p.value());
    cols += p.cols();
    ids.push_back(p.id());
  }
  Tensor out(rows, cols);
  std::size_t c0 = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(v.data() + r * v.cols(), v.data() + (r + 1) * v.cols(), out.data() + r * cols + c0);
    c0 += v.cols();
  }
  return GraphAccess::push(g, Op::ConcatCols, std::move(ids), std::move(out));
}

Var flat_slice(Var a, std::size_t offset, std::size_t rows, std::size_t cols) {
  const Tensor& x = a.value();
  if (offset + rows * cols > x.size())
    throw ShapeError("flat_slice of " + std::to_string(rows * cols) + " entries at offset " +
                     std::to_string(offset) + " exceeds " + x.shape_str());
  Tensor out(rows, cols);
  std::copy(x.data() + offset, x.data() + offset + rows * cols, out.data());
  GraphAccess::Aux aux;
  aux.a = offset;
  return GraphAccess::push(graph_of(a), Op::FlatSlice, {a.id()}, std::move(out), std::move(aux));
}

Var transpose(Var a) {
  return GraphAccess::push(graph_of(a), Op::Transpose, {a.id()}, a.value().transposed());
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const Tensor& x = a.value();
  Tensor out(rows.size(), x.cols());
  GraphAccess::Aux aux;
  aux.index.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= x.rows())
      throw ShapeError("gather_rows index " + std::to_string(rows[k]) + " out of range for " +
                       x.shape_str());
    std::copy(x.data() + rows[k] * x.cols(), x.data() + (rows[k] + 1) * x.cols(),
              out.data() + k * x.cols());
    aux.index.push_back(static_cast<std::uint32_t>(rows[k]));
  }
  return GraphAccess::push(graph_of(a), Op::GatherRows, {a.id()}, std::move(out), std::move(aux));
}

Var row_norms(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), 1);
  const auto& K = simd::active();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* p = x.data() + r * x.cols();
    out[r] = std::sqrt(K.dot(x.cols(), p, p));
  }
  return GraphAccess::push(graph_of(a), Op::RowNorms, {a.id()}, std::move(out));
}

Var mse_loss(Var prediction, Var target) {
  Graph& g = graph_of(prediction, target, "mse_loss");
  const Tensor& p = prediction.value();
  const Tensor& t = target.value();
  require_same_shape("mse_loss", p, t);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  return GraphAccess::push(g, Op::MseLoss, {prediction.id(), target.id()},
                           Tensor(1, 1, s / static_cast<double>(p.size())));
}

Var bce_loss(Var probability, Var target) {
  Graph& g = graph_of(probability, target, "bce_loss");
  const Tensor& p = probability.value();
  const Tensor& y = target.value();
  require_same_shape("bce_loss", p, y);
  constexpr double eps = 1e-12;
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p[i], eps, 1.0 - eps);
    s -= y[i] * std::log(pc) + (1.0 - y[i]) * std::log1p(-pc);
  }
  return GraphAccess::push(g, Op::BceLoss, {probability.id(), target.id()},
                           Tensor(1, 1, s / static_cast<double>(p.size())));
}

Var bce_logits_loss(Var logits, Var target) {
  Graph& g = graph_of(logits, target, "bce_logits_loss");
  const Tensor& x = logits.value();
  const Tensor& y = target.value();
  require_same_shape("bce_logits_loss", x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += std::max(x[i], 0.0) - x[i] * y[i] + std::log1p(std::exp(-std::abs(x[i])));
  return GraphAccess::push(g, Op::BceLogitsLoss, {logits.id(), target.id()},
                           Tensor(1, 1, s / static_cast<double>(x.size())));
}

Var softmax_cross_entropy_loss(Var logits, Var target) {
  Graph& g = graph_of(logits, target, "softmax_cross_entropy_loss");
  const Tensor& x = logits.value();
  const Tensor& y = target.value();
  require_same_shape("softmax_cross_entropy_loss", x, y);
  const std::size_t c = x.cols();
  double s = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* xr = x.data() + r * c;
    const double mx = *std::max_element(xr, xr + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(xr[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) s += y(r, j) * (lse - xr[j]);
  }
  return GraphAccess::push(g, Op::SoftmaxCeLoss, {logits.id(), target.id()},
                           Tensor(1, 1, s / static_cast<double>(x.rows())));
}

Var squared_l2_distance(Var a, Var b) {
  Graph& g = graph_of(a, b, "squared_l2_distance");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same_shape("squared_l2_distance", x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return GraphAccess::push(g, Op::SquaredL2Distance, {a.id(), b.id()}, Tensor(1, 1, s));
}

}  // namespace koodos::ad
