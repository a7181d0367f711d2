// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maple/diffcore/tensor.hpp"
#include "maple/eval/benchmark.hpp"

namespace maple::eval {

struct EmbeddingTable {
  std::vector<std::uint32_t> sample_ids;
  std::vector<std::uint32_t> class_ids;
  diff::Tensor<double> values;  // [n × d_vl]
  diff::Tensor<double> pca;     // [n × 2], empty unless requested
};

/// Centered coordinates on the two leading principal axes, from an exact
/// eigendecomposition of the d×d covariance. Each axis is signed so that its
/// largest-magnitude component is positive. ContractError for fewer than 2
/// rows or columns.
diff::Tensor<double> pca_2d(const diff::Tensor<double>& x);

/// Between-class over within-class variance (traces of the scatter matrices).
double separability(const diff::Tensor<double>& x, const std::vector<std::uint32_t>& labels);

EmbeddingTable export_embeddings(const PromptedPredictor& predictor, const data::Dataset& dataset,
                                 const std::vector<std::size_t>& indices, bool with_pca);

/// Header "sample_id,class_id,e0,...,e{d-1}[,pc1,pc2]", then one row per sample.
std::string embeddings_csv(const EmbeddingTable& table);

}  // namespace maple::eval
