// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "maple/diffcore/tensor.hpp"

namespace maple::diff {

template <typename T>
class Graph;

/// Handle to a value recorded on a Graph. Cheap to copy; only valid while the
/// owning graph is alive.
template <typename T>
struct Var {
  Graph<T>* graph = nullptr;
  std::uint32_t id = 0;

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
};

/// Tape of executed operations. Nodes are appended in execution order, so the
/// recording order is already a topological order and backward walks it in
/// reverse. One graph belongs to one thread; independent graphs share nothing.
template <typename T>
class Graph {
 public:
  /// Accumulates gradient contributions from a node into its inputs. Receives
  /// the node's output gradient and its forward output.
  using BackwardFn = std::function<void(Graph&, std::span<const T>, const Tensor<T>&)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Owned value that never receives a gradient.
  Var<T> constant(Tensor<T> value);
  /// Owned value that may receive a gradient.
  Var<T> variable(Tensor<T> value, bool requires_grad = true);
  /// Borrowed leaf. `value` must outlive the graph and must not change while
  /// the graph is in use.
  Var<T> leaf(const Tensor<T>& value, bool requires_grad);

  /// Appends an operation result. `backward` is dropped when no input
  /// requires a gradient.
  Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn backward);
  Var<T> record(Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn backward);

  const Tensor<T>& value(Var<T> v) const;
  bool requires_grad(Var<T> v) const { return nodes_[v.id].requires_grad; }

  /// Reverse accumulation from a scalar. Clears previous gradients first, so
  /// repeated calls produce identical results.
  void backward(Var<T> loss);

  /// Gradient of the last backward() loss with respect to `v`. Zeros when `v`
  /// did not participate.
  Tensor<T> grad(Var<T> v) const;

  /// Mutable gradient buffer of `v`, allocated as zeros on first use. Used by
  /// backward functions.
  std::span<T> grad_buffer(Var<T> v);

  std::size_t size() const noexcept { return nodes_.size(); }

  /// Scalar multiply-accumulate operations executed by matmul-like ops in
  /// forward passes recorded on this graph.
  std::uint64_t mac_count() const noexcept { return macs_; }
  void add_macs(std::uint64_t n) noexcept { macs_ += n; }

 private:
  struct Node {
    Tensor<T> owned;
    const Tensor<T>* borrowed = nullptr;
    std::vector<T> grad;
    BackwardFn backward;
    bool requires_grad = false;
    bool is_leaf = false;
  };

  void check_owner(Var<T> v) const;

  // deque keeps node references stable while the tape grows.
  std::deque<Node> nodes_;
  std::uint64_t macs_ = 0;
};

template <typename T>
const Tensor<T>& Var<T>::value() const {
  return graph->value(*this);
}

template <typename T>
bool Var<T>::requires_grad() const {
  return graph->requires_grad(*this);
}

}  // namespace maple::diff
