// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/prompts/prompt_bank.hpp"

#include <random>

#include "maple/error.hpp"

namespace maple::prompts {

template <typename T>
std::size_t PromptBank<T>::scalar_count() const {
  std::size_t n = 0;
  visit([&](const std::string&, const Tensor<T>& t) { n += t.size(); });
  return n;
}

template <typename T>
PromptBank<T> PromptBank<T>::zeros(const PromptConfig& config, const model::ModelConfig& model) {
  config.validate(model);
  PromptBank bank;
  bank.config = config;
  bank.text_width = model.text_width;
  bank.vision_width = model.vision_width;
  if (config.variant == Variant::none) return bank;

  const std::size_t b = config.length, dl = model.text_width, dv = model.vision_width;
  const std::size_t sets = config.set_count();
  const bool l2v = config.direction == CouplingDirection::lang_to_vision;
  bool store_language = false, store_vision = false;
  switch (config.variant) {
    case Variant::text_shallow:
    case Variant::text_deep:
      store_language = true;
      break;
    case Variant::vision_deep:
      store_vision = true;
      break;
    case Variant::independent_vl:
      store_language = store_vision = true;
      break;
    default:
      store_language = l2v;
      store_vision = !l2v;
      break;
  }
  for (std::size_t k = 0; k < sets; ++k) {
    if (store_language) bank.language.emplace_back(diff::Shape{b, dl});
    if (store_vision) bank.vision.emplace_back(diff::Shape{b, dv});
  }
  if (config.uses_coupling()) {
    const std::size_t src = l2v ? dl : dv, dst = l2v ? dv : dl;
    for (std::size_t k = 0; k < sets; ++k) {
      bank.coupling_weight.emplace_back(diff::Shape{src, dst});
      bank.coupling_bias.emplace_back(diff::Shape{dst});
    }
    if (config.is_progressive()) {
      for (std::size_t k = 1; k < sets; ++k) {
        bank.progressive_weight.emplace_back(diff::Shape{src, src});
        bank.progressive_bias.emplace_back(diff::Shape{src});
      }
    }
  }
  return bank;
}

template <typename T>
template <typename U>
PromptBank<U> PromptBank<T>::cast() const {
  PromptBank<U> out;
  out.config = config;
  out.text_width = text_width;
  out.vision_width = vision_width;
  auto conv = [](const std::vector<Tensor<T>>& in, std::vector<Tensor<U>>& o) {
    for (const auto& t : in) o.push_back(t.template cast<U>());
  };
  conv(language, out.language);
  conv(vision, out.vision);
  conv(coupling_weight, out.coupling_weight);
  conv(coupling_bias, out.coupling_bias);
  conv(progressive_weight, out.progressive_weight);
  conv(progressive_bias, out.progressive_bias);
  return out;
}

template <typename T>
PromptBank<T> init_prompts(const PromptConfig& config, const model::ModelConfig& model, const Tensor<T>& embed_table,
                           std::span<const std::uint32_t> template_ids, std::uint64_t seed,
                           std::vector<std::string>* warnings) {
  auto bank = PromptBank<T>::zeros(config, model);
  if (embed_table.rank() != 2 || embed_table.cols() != model.text_width) {
    throw DimensionError("embedding table " + diff::shape_string(embed_table.shape()) +
                         " does not match text width " + std::to_string(model.text_width));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.02);
  auto draw = [&](T* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<T>(dist(rng));
  };

  const bool templated = config.init != InitMode::random_all;
  const std::size_t d = model.text_width;
  bool short_template = false;
  for (std::size_t k = 0; k < bank.language.size(); ++k) {
    auto& set = bank.language[k];
    const bool copy = templated && (k == 0 || config.init == InitMode::template_all_layers);
    for (std::size_t r = 0; r < set.rows(); ++r) {
      T* row = set.data().data() + r * d;
      const std::size_t pos = config.template_offset + r;
      if (copy && pos < template_ids.size()) {
        const auto id = template_ids[pos];
        if (id >= embed_table.rows()) {
          throw VocabularyError("template token id " + std::to_string(id) + " outside embedding table of " +
                                std::to_string(embed_table.rows()) + " rows");
        }
        for (std::size_t j = 0; j < d; ++j) row[j] = embed_table[id * d + j];
      } else {
        if (copy) short_template = true;
        draw(row, d);
      }
    }
  }
  if (short_template && warnings) {
    warnings->push_back("template has " + std::to_string(template_ids.size()) + " tokens but offset " +
                        std::to_string(config.template_offset) + " + b=" + std::to_string(config.length) +
                        " were requested; remaining prompt rows are random");
  }
  for (auto& t : bank.vision) draw(t.data().data(), t.size());
  for (auto& t : bank.coupling_weight) draw(t.data().data(), t.size());
  for (auto& t : bank.progressive_weight) draw(t.data().data(), t.size());
  return bank;
}

template <typename T>
bool bitwise_equal(const PromptBank<T>& a, const PromptBank<T>& b) {
  std::vector<const Tensor<T>*> ta, tb;
  std::vector<std::string> na, nb;
  a.visit([&](const std::string& n, const Tensor<T>& t) {
    na.push_back(n);
    ta.push_back(&t);
  });
  b.visit([&](const std::string& n, const Tensor<T>& t) {
    nb.push_back(n);
    tb.push_back(&t);
  });
  if (na != nb) return false;
  for (std::size_t i = 0; i < ta.size(); ++i)
    if (!diff::bitwise_equal(*ta[i], *tb[i])) return false;
  return true;
}

template struct PromptBank<float>;
template struct PromptBank<double>;
template PromptBank<double> PromptBank<float>::cast<double>() const;
template PromptBank<float> PromptBank<double>::cast<float>() const;
template PromptBank<float> init_prompts(const PromptConfig&, const model::ModelConfig&, const Tensor<float>&,
                                        std::span<const std::uint32_t>, std::uint64_t, std::vector<std::string>*);
template PromptBank<double> init_prompts(const PromptConfig&, const model::ModelConfig&, const Tensor<double>&,
                                         std::span<const std::uint32_t>, std::uint64_t, std::vector<std::string>*);
template bool bitwise_equal(const PromptBank<float>&, const PromptBank<float>&);
template bool bitwise_equal(const PromptBank<double>&, const PromptBank<double>&);

}  // namespace maple::prompts
