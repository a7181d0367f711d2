// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/eval/gradcheck.hpp"

#include <random>

#include "maple/error.hpp"
#include "maple/prompts/prompted.hpp"

namespace maple::eval {

using diff::Graph;
using diff::Tensor;
using diff::Var;

model::ModelConfig gradcheck_model(std::string_view size) {
  if (size != "tiny") throw ConfigError("unknown gradcheck size '" + std::string(size) + "' (tiny)");
  model::ModelConfig c;
  c.layers = 2;
  c.vision_width = c.text_width = c.embed_dim = 8;
  c.image_size = 4;
  c.patch_size = 2;
  c.context_length = 4;
  c.vision_heads = c.text_heads = 2;
  c.vocab_size = 7;
  c.mlp_ratio = 2;
  return c;
}

namespace {

const std::vector<std::vector<std::uint32_t>> kClasses{{4, 5}, {5, 6}, {6}};

template <typename T>
Var<T> loss(const model::BoundBackbone<T>& bb, const prompts::BoundPrompts<T>& bp,
            const std::vector<Tensor<T>>& images, T tau) {
  static const std::vector<std::uint32_t> labels{0, 2};
  std::vector<Var<T>> rows;
  for (const auto& im : images) rows.push_back(prompts::encode_image_prompted(bb, bp, im));
  auto logits = model::similarity_logits(diff::concat_rows(rows), prompts::encode_classes(bb, bp, kClasses), tau);
  return diff::cross_entropy(logits, std::span<const std::uint32_t>(labels));
}

}  // namespace

PromptGradcheck prompt_gradcheck(const model::ModelConfig& m, const prompts::PromptConfig& config,
                                 std::uint64_t seed) {
  m.validate();
  config.validate(m);
  if (config.variant == prompts::Variant::none) throw ConfigError("gradcheck needs a variant with prompts");
  if (m.vocab_size < 7 || m.context_length < 2) throw ConfigError("gradcheck model needs vocab >= 7, context >= 2");
  const auto params64 = model::BackboneParams<double>::init(m, seed);
  const auto params32 = params64.cast<float>();
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> n(0.0, 0.5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Tensor<double>> images64(2, Tensor<double>({m.image_size, m.image_size, 3}));
  for (auto& im : images64)
    for (auto& v : im.data()) v = u(rng);
  std::vector<Tensor<float>> images32{images64[0].cast<float>(), images64[1].cast<float>()};

  auto bank64 = prompts::PromptBank<double>::zeros(config, m);
  bank64.visit([&](const std::string&, Tensor<double>& t) {
    for (auto& v : t.data()) v = n(rng);
  });
  const auto bank32 = bank64.cast<float>();
  std::vector<Tensor<double>> inputs;
  bank64.visit([&](const std::string&, const Tensor<double>& t) { inputs.push_back(t); });
  std::vector<Tensor<float>> inputs32;
  for (const auto& t : inputs) inputs32.push_back(t.cast<float>());

  diff::ScalarFn<double> f64 = [&](Graph<double>& g, const std::vector<Var<double>>& vars) {
    model::BoundBackbone<double> bb(g, params64, false);
    prompts::BoundPrompts<double> bp(g, bank64, vars);
    return loss<double>(bb, bp, images64, params64.tau());
  };
  diff::ScalarFn<float> f32 = [&](Graph<float>& g, const std::vector<Var<float>>& vars) {
    model::BoundBackbone<float> bb(g, params32, false);
    prompts::BoundPrompts<float> bp(g, bank32, vars);
    return loss<float>(bb, bp, images32, params32.tau());
  };
  PromptGradcheck out;
  out.exact64 = diff::finite_diff_check<double>(f64, inputs, 1e-5);
  out.mixed32 = diff::finite_diff_check_mixed(f32, f64, inputs32, 1e-5);
  out.scalars = bank64.scalar_count();
  return out;
}

}  // namespace maple::eval
