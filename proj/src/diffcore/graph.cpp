// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/diffcore/graph.hpp"

#include <algorithm>
#include <cmath>

namespace maple {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::contract: return "contract";
    case ErrorCode::vocabulary: return "vocabulary";
    case ErrorCode::format: return "format";
    case ErrorCode::version: return "version";
    case ErrorCode::insufficiency: return "insufficiency";
    case ErrorCode::invariant_violation: return "invariant_violation";
    case ErrorCode::training: return "training";
    case ErrorCode::oracle: return "oracle";
    case ErrorCode::io: return "io";
    case ErrorCode::undefined_metric: return "undefined_metric";
  }
  return "unknown";
}

namespace diff {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
bool all_finite(const Tensor<T>& t) {
  return std::all_of(t.data().begin(), t.data().end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("max_abs_diff shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
  T worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

template <typename T>
void Graph<T>::check_owner(Var<T> v) const {
  if (v.graph != this || v.id >= nodes_.size()) {
    throw ContractError("variable does not belong to this graph");
  }
}

template <typename T>
Var<T> Graph<T>::constant(Tensor<T> value) {
  return variable(std::move(value), false);
}

template <typename T>
Var<T> Graph<T>::variable(Tensor<T> value, bool requires_grad) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = requires_grad;
  n.is_leaf = true;
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var<T> Graph<T>::leaf(const Tensor<T>& value, bool requires_grad) {
  Node& n = nodes_.emplace_back();
  n.borrowed = &value;
  n.requires_grad = requires_grad;
  n.is_leaf = true;
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var<T> Graph<T>::record(Tensor<T> value, std::initializer_list<Var<T>> inputs,
                        BackwardFn backward) {
  bool needs = false;
  for (const auto& in : inputs) {
    check_owner(in);
    needs = needs || nodes_[in.id].requires_grad;
  }
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var<T> Graph<T>::record(Tensor<T> value, const std::vector<Var<T>>& inputs,
                        BackwardFn backward) {
  bool needs = false;
  for (const auto& in : inputs) {
    check_owner(in);
    needs = needs || nodes_[in.id].requires_grad;
  }
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var<T> v) const {
  check_owner(v);
  const Node& n = nodes_[v.id];
  return n.borrowed ? *n.borrowed : n.owned;
}

template <typename T>
std::span<T> Graph<T>::grad_buffer(Var<T> v) {
  check_owner(v);
  Node& n = nodes_[v.id];
  if (n.grad.empty()) n.grad.assign(value(v).size(), T(0));
  return n.grad;
}

template <typename T>
void Graph<T>::backward(Var<T> loss) {
  check_owner(loss);
  if (value(loss).size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        shape_string(value(loss).shape()));
  }
  for (auto& n : nodes_) n.grad.clear();
  grad_buffer(loss)[0] = T(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, std::span<const T>(n.grad), n.owned);
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (n.is_leaf && n.requires_grad && n.grad.empty()) {
      n.grad.assign(value({this, static_cast<std::uint32_t>(i)}).size(), T(0));
    }
  }
}

template <typename T>
Tensor<T> Graph<T>::grad(Var<T> v) const {
  check_owner(v);
  const Node& n = nodes_[v.id];
  const auto& val = value(v);
  if (n.grad.empty()) return Tensor<T>(val.shape(), T(0));
  return Tensor<T>(val.shape(), n.grad);
}

template class Graph<float>;
template class Graph<double>;
template bool all_finite(const Tensor<float>&);
template bool all_finite(const Tensor<double>&);
template float max_abs_diff(const Tensor<float>&, const Tensor<float>&);
template double max_abs_diff(const Tensor<double>&, const Tensor<double>&);

}  // namespace diff
}  // namespace maple
