// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Tape-style reverse-mode automatic differentiation over 2-D tensors.
//
// A Graph is rebuilt for every training step: leaves are appended first,
// every operation appends one node whose inputs already exist, so node ids
// are a topological order. backward() walks the tape once in reverse.
//
// Broadcasting is limited to adding/subtracting a 1×n row to every row of an
// m×n operand; any other shape disagreement is a ShapeError naming both
// shapes.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "koodos/tensor.hpp"

namespace koodos::ad {

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Add,
  Sub,
  Mul,
  Scale,
  Relu,
  Sigmoid,
  Tanh,
  Sum,
  Mean,
  SliceRows,
  SliceCols,
  ConcatRows,
  ConcatCols,
  FlatSlice,
  Transpose,
  GatherRows,
  RowNorms,
  MseLoss,
  BceLoss,
  BceLogitsLoss,
  SoftmaxCeLoss,
  SquaredL2Distance,
};

std::string_view op_name(Op op);

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::uint32_t id() const noexcept { return id_; }
  Graph* graph() const noexcept { return graph_; }
  bool valid() const noexcept { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, std::uint32_t id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Gradients of a scalar loss with respect to the trainable leaves.
class Gradients {
 public:
  /// Throws InvalidArgument for leaves that were not marked trainable or do
  /// not belong to the differentiated graph.
  const Tensor& of(Var leaf) const;
  bool has(Var leaf) const;

 private:
  friend class Graph;
  const Graph* graph_ = nullptr;
  std::vector<Tensor> grads_;
  std::vector<bool> present_;
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Trainable leaf: receives a gradient.
  Var param(Tensor value);
  /// Non-trainable leaf.
  Var constant(Tensor value);

  /// Reverse sweep from a 1×1 node.
  Gradients backward(Var loss) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  const Tensor& value(Var v) const;
  Op op(Var v) const;

 private:
  friend struct GraphAccess;

  struct Aux {
    std::size_t a = 0;
    std::size_t b = 0;
    double scalar = 0.0;
    std::vector<std::uint32_t> index;
  };
  struct Node {
    Op op = Op::Leaf;
    std::vector<std::uint32_t> inputs;
    Tensor value;
    Aux aux;
    bool requires_grad = false;
    bool trainable = false;
  };

  Var push(Op op, std::vector<std::uint32_t> inputs, Tensor value, Aux aux);
  Var leaf(Tensor value, bool trainable);
  void backprop_node(const Node& node, const Tensor& g, std::vector<Tensor>& grads) const;

  std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
/// a + b; b may be a 1×n row broadcast over the rows of a.
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product; shapes must match exactly.
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var sum(Var a);
Var mean(Var a);
/// Rows [begin, end).
Var slice_rows(Var a, std::size_t begin, std::size_t end);
/// Columns [begin, end).
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
/// rows×cols view of the row-major entries [offset, offset + rows·cols).
Var flat_slice(Var a, std::size_t offset, std::size_t rows, std::size_t cols);
inline Var reshape(Var a, std::size_t rows, std::size_t cols) {
  return flat_slice(a, 0, rows, cols);
}
Var transpose(Var a);
Var gather_rows(Var a, std::span<const std::size_t> rows);
/// m×1 column of Euclidean row norms. The gradient at a zero row is taken
/// as zero.
Var row_norms(Var a);

/// Mean squared error over all entries.
Var mse_loss(Var prediction, Var target);
/// Mean binary cross entropy of probabilities; log arguments are clamped at
/// 1e-12.
Var bce_loss(Var probability, Var target);
/// Mean binary cross entropy evaluated from logits (numerically stable).
Var bce_logits_loss(Var logits, Var target);
/// Row-wise softmax cross entropy against target distributions (one-hot
/// rows for class labels), averaged over rows.
Var softmax_cross_entropy_loss(Var logits, Var target);
/// Σ (a − b)² as a 1×1 node.
Var squared_l2_distance(Var a, Var b);

}  // namespace koodos::ad
