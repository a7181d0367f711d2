// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/prompts/prompted.hpp"

#include "maple/error.hpp"

namespace maple::prompts {

template <typename T>
template <typename Make>
void BoundPrompts<T>::bind(Make&& make) {
  auto each = [&](const std::vector<Tensor<T>>& in, std::vector<Var<T>>& out) {
    for (const auto& t : in) out.push_back(make(t));
  };
  // Same order as PromptBank::visit.
  each(bank_->language, language);
  each(bank_->vision, vision);
  for (std::size_t i = 0; i < bank_->coupling_weight.size(); ++i) {
    coupling_weight.push_back(make(bank_->coupling_weight[i]));
    coupling_bias.push_back(make(bank_->coupling_bias[i]));
  }
  for (std::size_t i = 0; i < bank_->progressive_weight.size(); ++i) {
    progressive_weight.push_back(make(bank_->progressive_weight[i]));
    progressive_bias.push_back(make(bank_->progressive_bias[i]));
  }
}

template <typename T>
BoundPrompts<T>::BoundPrompts(Graph<T>& g, const PromptBank<T>& bank, bool rg) : graph_(&g), bank_(&bank) {
  bind([&](const Tensor<T>& t) { return g.leaf(t, rg); });
}

template <typename T>
BoundPrompts<T>::BoundPrompts(Graph<T>& g, const PromptBank<T>& bank, const std::vector<Var<T>>& vars)
    : graph_(&g), bank_(&bank) {
  std::size_t i = 0;
  bind([&](const Tensor<T>& t) {
    if (i >= vars.size()) throw ContractError("too few prompt vars for the bank");
    if (vars[i].value().shape() != t.shape()) throw DimensionError("prompt var shape mismatch at " + std::to_string(i));
    return vars[i++];
  });
  if (i != vars.size()) throw ContractError("too many prompt vars for the bank");
}

template <typename T>
const std::vector<Var<T>>& BoundPrompts<T>::sources() const {
  return config().direction == CouplingDirection::lang_to_vision ? language : vision;
}

template <typename T>
Var<T> BoundPrompts<T>::progressive_compose(std::size_t k) const {
  if (!config().uses_coupling()) {
    throw ContractError("progressive composition needs a coupled variant, got " +
                        std::string(to_string(config().variant)));
  }
  const auto& src = sources();
  if (k >= src.size()) {
    throw ContractError("prompt set " + std::to_string(k) + " out of range for depth " + std::to_string(src.size()));
  }
  if (!config().is_progressive()) return src[k];
  if (composed_.empty()) composed_.push_back(src[0]);
  while (composed_.size() <= k) {
    const std::size_t i = composed_.size();
    auto carried = diff::add_row(diff::matmul(composed_.back(), progressive_weight[i - 1]), progressive_bias[i - 1]);
    composed_.push_back(diff::add(src[i], carried));
  }
  return composed_[k];
}

template <typename T>
Var<T> BoundPrompts<T>::couple(std::size_t k) const {
  if (!config().uses_coupling()) {
    throw ContractError("variant " + std::string(to_string(config().variant)) + " has no coupling maps");
  }
  if (k >= coupling_weight.size()) {
    throw ContractError("coupling index " + std::to_string(k) + " out of range for depth " +
                        std::to_string(coupling_weight.size()));
  }
  if (coupled_.size() <= k) coupled_.resize(coupling_weight.size());
  if (coupled_[k].graph == nullptr) {
    coupled_[k] = diff::add_row(diff::matmul(progressive_compose(k), coupling_weight[k]), coupling_bias[k]);
  }
  return coupled_[k];
}

template <typename T>
PromptSchedule<T> BoundPrompts<T>::text_schedule() const {
  PromptSchedule<T> s;
  const auto& c = config();
  if (!c.prompts_text()) return s;
  if (!c.uses_coupling()) {
    s.layers = language;
    return s;
  }
  for (std::size_t k = 0; k < c.set_count(); ++k) {
    s.layers.push_back(c.direction == CouplingDirection::lang_to_vision ? progressive_compose(k) : couple(k));
  }
  return s;
}

template <typename T>
PromptSchedule<T> BoundPrompts<T>::vision_schedule() const {
  PromptSchedule<T> s;
  const auto& c = config();
  if (!c.prompts_vision()) return s;
  if (!c.uses_coupling()) {
    s.layers = vision;
    return s;
  }
  for (std::size_t k = 0; k < c.set_count(); ++k) {
    s.layers.push_back(c.direction == CouplingDirection::lang_to_vision ? couple(k) : progressive_compose(k));
  }
  return s;
}

template <typename T>
Var<T> encode_text_prompted(const BoundBackbone<T>& bb, const BoundPrompts<T>& prompts,
                            std::span<const std::uint32_t> tokens, EncodeTrace* trace) {
  const auto schedule = prompts.text_schedule();
  return model::encode_text(bb, tokens, schedule.empty() ? nullptr : &schedule, trace);
}

template <typename T>
Var<T> encode_image_prompted(const BoundBackbone<T>& bb, const BoundPrompts<T>& prompts, const diff::Tensor<T>& image,
                             EncodeTrace* trace) {
  const auto schedule = prompts.vision_schedule();
  return model::encode_image(bb, image, schedule.empty() ? nullptr : &schedule, trace);
}

template <typename T>
Var<T> encode_classes(const BoundBackbone<T>& bb, const BoundPrompts<T>& prompts,
                      const std::vector<std::vector<std::uint32_t>>& class_tokens) {
  if (class_tokens.empty()) throw ContractError("no classes to encode");
  const auto schedule = prompts.text_schedule();
  const auto* s = schedule.empty() ? nullptr : &schedule;
  std::vector<Var<T>> rows;
  rows.reserve(class_tokens.size());
  for (const auto& t : class_tokens) rows.push_back(model::encode_text(bb, std::span<const std::uint32_t>(t), s));
  return diff::concat_rows(rows);
}

template <typename T>
Var<T> classify(const BoundBackbone<T>& bb, const BoundPrompts<T>& prompts, const diff::Tensor<T>& image,
                const std::vector<std::vector<std::uint32_t>>& class_tokens, T tau) {
  auto x = encode_image_prompted(bb, prompts, image);
  return model::zero_shot_probs(x, encode_classes(bb, prompts, class_tokens), tau);
}

#define MAPLE_INSTANTIATE_PROMPTED(T)                                                                        \
  template class BoundPrompts<T>;                                                                            \
  template Var<T> encode_text_prompted(const BoundBackbone<T>&, const BoundPrompts<T>&,                      \
                                       std::span<const std::uint32_t>, EncodeTrace*);                        \
  template Var<T> encode_image_prompted(const BoundBackbone<T>&, const BoundPrompts<T>&, const diff::Tensor<T>&, \
                                        EncodeTrace*);                                                       \
  template Var<T> encode_classes(const BoundBackbone<T>&, const BoundPrompts<T>&,                            \
                                 const std::vector<std::vector<std::uint32_t>>&);                            \
  template Var<T> classify(const BoundBackbone<T>&, const BoundPrompts<T>&, const diff::Tensor<T>&,          \
                           const std::vector<std::vector<std::uint32_t>>&, T);

MAPLE_INSTANTIATE_PROMPTED(float)
MAPLE_INSTANTIATE_PROMPTED(double)

}  // namespace maple::prompts
