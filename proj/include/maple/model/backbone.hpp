// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maple/diffcore/tensor.hpp"
#include "maple/model/config.hpp"

namespace maple::model {

using diff::Tensor;

/// Weights of one pre-norm transformer block.
template <typename T>
struct BlockParams {
  Tensor<T> ln1_gain, ln1_bias;
  Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor<T> ln2_gain, ln2_bias;
  Tensor<T> w1, b1, w2, b2;

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + "ln1.gain", ln1_gain);
    f(prefix + "ln1.bias", ln1_bias);
    f(prefix + "attn.wq", wq);
    f(prefix + "attn.bq", bq);
    f(prefix + "attn.wk", wk);
    f(prefix + "attn.bk", bk);
    f(prefix + "attn.wv", wv);
    f(prefix + "attn.bv", bv);
    f(prefix + "attn.wo", wo);
    f(prefix + "attn.bo", bo);
    f(prefix + "ln2.gain", ln2_gain);
    f(prefix + "ln2.bias", ln2_bias);
    f(prefix + "mlp.w1", w1);
    f(prefix + "mlp.b1", b1);
    f(prefix + "mlp.w2", w2);
    f(prefix + "mlp.b2", b2);
  }
};

/// Every weight of the dual encoder. During prompt tuning the whole record is
/// frozen; nothing here is ever updated by the prompt optimizer.
template <typename T>
struct BackboneParams {
  ModelConfig config;

  // Vision branch.
  Tensor<T> patch_proj;   // [patch_dim × d_v]
  Tensor<T> class_token;  // [1 × d_v], c_0
  Tensor<T> vision_pos;   // [(M+1) × d_v]
  std::vector<BlockParams<T>> vision_blocks;
  Tensor<T> vision_ln_gain, vision_ln_bias;
  Tensor<T> image_proj;   // [d_v × d_vl]

  // Text branch.
  Tensor<T> token_embedding;  // [vocab × d_l]
  Tensor<T> text_pos;         // [N × d_l]
  std::vector<BlockParams<T>> text_blocks;
  Tensor<T> text_ln_gain, text_ln_bias;
  Tensor<T> text_proj;        // [d_l × d_vl]

  Tensor<T> temperature;  // rank 0, τ

  T tau() const { return temperature[0]; }

  /// Calls f(name, tensor) for every tensor in a fixed order.
  template <typename F>
  void visit(F&& f) {
    f("vision.patch_proj", patch_proj);
    f("vision.class_token", class_token);
    f("vision.pos", vision_pos);
    for (std::size_t i = 0; i < vision_blocks.size(); ++i)
      vision_blocks[i].visit("vision.block" + std::to_string(i) + ".", f);
    f("vision.ln_post.gain", vision_ln_gain);
    f("vision.ln_post.bias", vision_ln_bias);
    f("vision.proj", image_proj);
    f("text.token_embedding", token_embedding);
    f("text.pos", text_pos);
    for (std::size_t i = 0; i < text_blocks.size(); ++i)
      text_blocks[i].visit("text.block" + std::to_string(i) + ".", f);
    f("text.ln_final.gain", text_ln_gain);
    f("text.ln_final.bias", text_ln_bias);
    f("text.proj", text_proj);
    f("logit_temperature", temperature);
  }

  template <typename F>
  void visit(F&& f) const {
    const_cast<BackboneParams*>(this)->visit(
        [&f](const std::string& name, Tensor<T>& t) { f(name, static_cast<const Tensor<T>&>(t)); });
  }

  /// Random initialization. Linear maps draw from N(0, 1/fan_in), embeddings
  /// from N(0, 0.02²), norms start at unit gain and zero bias.
  static BackboneParams init(const ModelConfig& config, std::uint64_t seed, T tau = T(0.01));

  template <typename U>
  BackboneParams<U> cast() const;

  std::size_t scalar_count() const;
};

/// FNV-1a over tensor names, shapes and raw element bytes.
template <typename T>
std::uint64_t fingerprint(const BackboneParams<T>& params);

}  // namespace maple::model
