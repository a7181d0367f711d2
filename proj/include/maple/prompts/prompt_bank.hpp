// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maple/diffcore/tensor.hpp"
#include "maple/model/config.hpp"
#include "maple/prompts/prompt_config.hpp"

namespace maple::prompts {

using diff::Tensor;

/// The trainable state of prompt tuning. Which vectors are populated depends
/// on the variant; every tensor present is trainable.
///
/// For the coupled variants the coupled branch's prompts are never stored:
/// they are recomputed from the source sets on every forward pass.
template <typename T>
struct PromptBank {
  PromptConfig config;
  std::size_t text_width = 0;    // d_l
  std::size_t vision_width = 0;  // d_v

  std::vector<Tensor<T>> language;  // P_k, [b × d_l]
  std::vector<Tensor<T>> vision;    // P̃_k, [b × d_v]
  // Coupling maps F_k, one per depth: [d_src × d_dst] and [d_dst].
  std::vector<Tensor<T>> coupling_weight, coupling_bias;
  // Progressive maps G_k for k = 1..J-1, on the source width.
  std::vector<Tensor<T>> progressive_weight, progressive_bias;

  template <typename F>
  void visit(F&& f) {
    auto each = [&f](const std::string& stem, std::vector<Tensor<T>>& ts, std::size_t first) {
      for (std::size_t i = 0; i < ts.size(); ++i) f(stem + std::to_string(i + first), ts[i]);
    };
    each("prompt.language.", language, 0);
    each("prompt.vision.", vision, 0);
    for (std::size_t i = 0; i < coupling_weight.size(); ++i) {
      f("prompt.coupling." + std::to_string(i) + ".weight", coupling_weight[i]);
      f("prompt.coupling." + std::to_string(i) + ".bias", coupling_bias[i]);
    }
    for (std::size_t i = 0; i < progressive_weight.size(); ++i) {
      f("prompt.progressive." + std::to_string(i + 1) + ".weight", progressive_weight[i]);
      f("prompt.progressive." + std::to_string(i + 1) + ".bias", progressive_bias[i]);
    }
  }

  template <typename F>
  void visit(F&& f) const {
    const_cast<PromptBank*>(this)->visit(
        [&f](const std::string& name, Tensor<T>& t) { f(name, static_cast<const Tensor<T>&>(t)); });
  }

  /// Trainable scalar census.
  std::size_t scalar_count() const;

  /// Allocates zero-filled tensors for every field the variant needs.
  static PromptBank zeros(const PromptConfig& config, const model::ModelConfig& model);

  template <typename U>
  PromptBank<U> cast() const;
};

/// Initializes a bank. Template modes copy the embeddings of
/// template_ids[offset, offset+b) into P_0 (every P_k for template_all_layers);
/// everything else, coupling weights included, draws from N(0, 0.02²), and
/// map offsets start at zero. When the template is shorter than b the
/// remaining rows are random and a warning is appended to `warnings`.
template <typename T>
PromptBank<T> init_prompts(const PromptConfig& config, const model::ModelConfig& model,
                           const Tensor<T>& embed_table, std::span<const std::uint32_t> template_ids,
                           std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

template <typename T>
bool bitwise_equal(const PromptBank<T>& a, const PromptBank<T>& b);

}  // namespace maple::prompts
