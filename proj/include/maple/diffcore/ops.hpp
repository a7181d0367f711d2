// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "maple/diffcore/graph.hpp"

// Differentiable primitives. Matrices are rank-2 row-major tensors whose
// leading axis is the token axis; rank-1 tensors of length d act as a single
// row where a row is expected.
namespace maple::diff {

/// C = A·B for A[m×k], B[k×n].
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b);

template <typename T>
Var<T> transpose(Var<T> a);

/// Elementwise sum of equally shaped tensors.
template <typename T>
Var<T> add(Var<T> a, Var<T> b);

/// Adds a row vector of length n to every row of a[m×n].
template <typename T>
Var<T> add_row(Var<T> a, Var<T> row);

/// Elementwise (Hadamard) product.
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);

template <typename T>
Var<T> scale(Var<T> a, T factor);

/// GELU, tanh approximation.
template <typename T>
Var<T> gelu(Var<T> a);

/// Sum of all elements as a rank-0 tensor.
template <typename T>
Var<T> sum(Var<T> a);

/// Mean of all elements as a rank-0 tensor.
template <typename T>
Var<T> mean(Var<T> a);

/// Rows `ids` of table[V×d], giving [n×d].
template <typename T>
Var<T> embedding(Var<T> table, std::span<const std::uint32_t> ids);

/// Concatenation along the token (leading) axis.
template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts);

/// Rows [begin, end) of a matrix.
template <typename T>
Var<T> slice_rows(Var<T> a, std::size_t begin, std::size_t end);

/// Per-row normalization to zero mean and unit variance, then gain and bias.
template <typename T>
Var<T> layernorm(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5));

/// Row-wise softmax of x / temperature, max-subtracted.
template <typename T>
Var<T> softmax(Var<T> x, T temperature = T(1));

/// Scaled dot-product attention of already projected q, k, v [T×d], split into
/// `heads` column groups and concatenated back to [T×d]. `causal` masks keys
/// that come after the query position.
template <typename T>
Var<T> attention(Var<T> q, Var<T> k, Var<T> v, std::size_t heads, bool causal = false);

/// Each row scaled to unit Euclidean norm.
template <typename T>
Var<T> l2_normalize(Var<T> x, T eps = T(1e-12));

/// Mean over rows of −log softmax(logits)[label].
template <typename T>
Var<T> cross_entropy(Var<T> logits, std::span<const std::uint32_t> labels);

}  // namespace maple::diff
