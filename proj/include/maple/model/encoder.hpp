// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "maple/diffcore/ops.hpp"
#include "maple/model/backbone.hpp"

namespace maple::model {

using diff::Graph;
using diff::Var;

template <typename T>
struct BoundBlock {
  Var<T> ln1_gain, ln1_bias, wq, bq, wk, bk, wv, bv, wo, bo, ln2_gain, ln2_bias, w1, b1, w2, b2;
};

/// Backbone weights registered as leaves of one graph. With `requires_grad`
/// false (prompt tuning, evaluation) no backbone gradient is ever formed.
template <typename T>
class BoundBackbone {
 public:
  BoundBackbone(Graph<T>& graph, const BackboneParams<T>& params, bool requires_grad);
  /// Binds caller-made vars, one per tensor in BackboneParams::visit order.
  /// The temperature entry is accepted and ignored.
  BoundBackbone(Graph<T>& graph, const BackboneParams<T>& params, const std::vector<Var<T>>& vars);

  Graph<T>& graph() const { return *graph_; }
  const BackboneParams<T>& params() const { return *params_; }
  const ModelConfig& config() const { return params_->config; }
  /// Bound weights in BackboneParams::visit order, temperature excluded.
  std::vector<Var<T>> leaves() const;

  Var<T> patch_proj, class_token, vision_pos, vision_ln_gain, vision_ln_bias, image_proj;
  Var<T> token_embedding, text_pos, text_ln_gain, text_ln_bias, text_proj;
  std::vector<BoundBlock<T>> vision_blocks, text_blocks;

 private:
  std::vector<Var<T>*> slots();

  Graph<T>* graph_;
  const BackboneParams<T>* params_;
};

/// Fresh prompt tokens for the inputs of the first blocks. Entry i is
/// injected before block i+1; blocks past the schedule see whatever the
/// previous block produced, including its prompt outputs. Rows of every entry
/// must match across layers.
template <typename T>
struct PromptSchedule {
  std::vector<Var<T>> layers;

  bool empty() const { return layers.empty(); }
  std::size_t depth() const { return layers.size(); }
  std::size_t length() const { return layers.empty() ? 0 : layers.front().value().rows(); }
};

/// Token counts entering each block, for shape instrumentation.
struct EncodeTrace {
  std::vector<std::size_t> tokens_per_block;
};

/// Pre-norm block: x + MHA(LN(x)), then + MLP(LN(x)).
template <typename T>
Var<T> transformer_block(const BoundBlock<T>& block, Var<T> x, std::size_t heads, bool causal);

/// [M × patch_dim] rows in raster order; each row holds one patch as
/// (row, column, channel) triples.
template <typename T>
Tensor<T> patchify(const Tensor<T>& image, std::size_t patch_size);

/// Image → unit vector in the joint space. Vision prompts are appended after
/// the class and patch tokens; positions apply to class and patches only.
template <typename T>
Var<T> encode_image(const BoundBackbone<T>& backbone, const Tensor<T>& image,
                    const PromptSchedule<T>* prompts = nullptr, EncodeTrace* trace = nullptr);

/// Token ids (≤ N, right-padded) → unit vector in the joint space. Language
/// prompts are prepended before the word tokens; attention is causal and the
/// readout is the last non-pad word.
template <typename T>
Var<T> encode_text(const BoundBackbone<T>& backbone, std::span<const std::uint32_t> tokens,
                   const PromptSchedule<T>* prompts = nullptr, EncodeTrace* trace = nullptr);

/// Softmax over cos(x, z_i)/τ for x [1×d_vl] and class matrix [C×d_vl].
template <typename T>
Var<T> zero_shot_probs(Var<T> image_embedding, Var<T> class_embeddings, T tau);

/// Cosine logits scaled by 1/τ, [B×C].
template <typename T>
Var<T> similarity_logits(Var<T> image_embeddings, Var<T> class_embeddings, T tau);

/// Tensor-level zero-shot head. Rows must be unit norm.
template <typename T>
Tensor<T> zero_shot_logits(const Tensor<T>& image_embedding, const Tensor<T>& class_embeddings, T tau);

/// Symmetric InfoNCE over the B×B similarity matrix, matched pairs on the
/// diagonal: mean of image→text and text→image cross-entropies.
template <typename T>
Var<T> contrastive_loss(Var<T> image_embeddings, Var<T> text_embeddings, T tau);

}  // namespace maple::model
