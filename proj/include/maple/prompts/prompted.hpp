// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "maple/model/encoder.hpp"
#include "maple/prompts/prompt_bank.hpp"

namespace maple::prompts {

using diff::Graph;
using diff::Var;
using model::BoundBackbone;
using model::EncodeTrace;
using model::PromptSchedule;

/// A prompt bank registered on one graph, with the derived prompt sets
/// (progressive composition, coupling) built on demand.
template <typename T>
class BoundPrompts {
 public:
  BoundPrompts(Graph<T>& graph, const PromptBank<T>& bank, bool requires_grad);
  /// Binds caller-made vars, one per tensor in PromptBank::visit order.
  BoundPrompts(Graph<T>& graph, const PromptBank<T>& bank, const std::vector<Var<T>>& vars);

  const PromptConfig& config() const { return bank_->config; }

  /// Effective source set k: P_k for plain maple, P_k + G_k(effective
  /// P_{k-1}) for maple_progressive. Sources are language sets for
  /// lang_to_vision coupling, vision sets otherwise.
  Var<T> progressive_compose(std::size_t k) const;

  /// Coupled prompts F_k(effective source k), [b × d_dst].
  Var<T> couple(std::size_t k) const;

  PromptSchedule<T> text_schedule() const;
  PromptSchedule<T> vision_schedule() const;

  std::vector<Var<T>> language, vision, coupling_weight, coupling_bias, progressive_weight, progressive_bias;

 private:
  const std::vector<Var<T>>& sources() const;
  template <typename Make>
  void bind(Make&& make);

  Graph<T>* graph_;
  const PromptBank<T>* bank_;
  mutable std::vector<Var<T>> composed_;
  mutable std::vector<Var<T>> coupled_;
};

template <typename T>
Var<T> encode_text_prompted(const BoundBackbone<T>& backbone, const BoundPrompts<T>& prompts,
                            std::span<const std::uint32_t> tokens, EncodeTrace* trace = nullptr);

template <typename T>
Var<T> encode_image_prompted(const BoundBackbone<T>& backbone, const BoundPrompts<T>& prompts,
                             const diff::Tensor<T>& image, EncodeTrace* trace = nullptr);

/// Prompted text embeddings of every class caption, stacked to [C × d_vl].
template <typename T>
Var<T> encode_classes(const BoundBackbone<T>& backbone, const BoundPrompts<T>& prompts,
                      const std::vector<std::vector<std::uint32_t>>& class_tokens);

/// Class probabilities [1 × C] for one image.
template <typename T>
Var<T> classify(const BoundBackbone<T>& backbone, const BoundPrompts<T>& prompts, const diff::Tensor<T>& image,
                const std::vector<std::vector<std::uint32_t>>& class_tokens, T tau);

}  // namespace maple::prompts
