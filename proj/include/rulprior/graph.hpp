// ----------------------------------------------------------------------------
// Copyright 2026 The rulprior Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rulprior/tensor.hpp"

namespace rulprior::nn {

/// A trainable tensor together with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.fill(0.0); }
};

struct NodeId {
  std::size_t index = 0;
};

/// Tape for reverse-mode differentiation over rank-2 tensors.
///
/// Nodes are appended in evaluation order, so the tape is already a
/// topological order and backward() simply walks it in reverse. The tape
/// never writes to a Parameter; after backward(), accumulate_into() adds the
/// parameter's gradient, so several tapes (one per window of a mini-batch)
/// can feed the same parameters.
class Graph {
 public:
  /// With requires_grad = false parameters enter as constants (inference).
  explicit Graph(bool requires_grad = true) : requires_grad_(requires_grad) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  NodeId constant(Tensor value);
  /// Leaf whose gradient is kept (useful for differentiating w.r.t. inputs).
  NodeId variable(Tensor value);
  NodeId parameter(const Parameter& p);

  const Tensor& value(NodeId id) const { return nodes_[id.index].value; }
  /// Valid after backward(); zero-filled for nodes that received nothing.
  const Tensor& grad(NodeId id) const { return nodes_[id.index].grad; }
  std::size_t size() const noexcept { return nodes_.size(); }
  /// Smallest |input| seen by relu() on this tape (+inf if none).
  double relu_margin() const noexcept { return relu_margin_; }

  /// Seeds d(loss)/d(loss) = seed and propagates. loss must be 1x1.
  void backward(NodeId loss, double seed = 1.0);

  /// Adds d(loss)/d(p), summed over every use of p on this tape, to p.grad.
  void accumulate_into(Parameter& p) const;

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  /// a[n,m] + row[1,m] broadcast over rows.
  NodeId add_row(NodeId a, NodeId row);
  NodeId scale(NodeId a, double factor);
  NodeId relu(NodeId a);
  NodeId transpose(NodeId a);
  NodeId softmax_rows(NodeId a);
  /// Normalizes each row to zero mean and unit variance, then applies
  /// gain[1,d] and bias[1,d].
  NodeId layer_norm(NodeId x, NodeId gain, NodeId bias, double eps = 1e-5);
  NodeId slice_cols(NodeId a, std::size_t begin, std::size_t count);
  NodeId concat_cols(std::span<const NodeId> parts);
  NodeId reshape(NodeId a, std::size_t rows, std::size_t cols);
  NodeId gather_rows(NodeId a, std::span<const std::size_t> indices);
  NodeId mean_rows(NodeId a);
  NodeId sum(NodeId a);
  NodeId sum_squares(NodeId a);
  NodeId stop_gradient(NodeId a);
  /// Forward value of quantized, gradient routed unchanged to continuous.
  NodeId straight_through(NodeId continuous, NodeId quantized);

 private:
  using Backprop = std::function<void(Graph&, const Tensor& out_grad)>;

  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    const Parameter* param = nullptr;
    Backprop backprop;
  };

  NodeId push(Tensor value, bool needs_grad, Backprop backprop);
  bool needs(NodeId id) const { return nodes_[id.index].needs_grad; }
  Tensor& grad_ref(NodeId id) { return nodes_[id.index].grad; }

  bool requires_grad_ = true;
  double relu_margin_ = std::numeric_limits<double>::infinity();
  std::vector<Node> nodes_;
};

}  // namespace rulprior::nn
