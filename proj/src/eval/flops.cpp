// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/eval/flops.hpp"

#include <random>

#include "json.hpp"
#include "maple/error.hpp"
#include "maple/prompts/prompted.hpp"

namespace maple::eval {
namespace {

std::uint64_t block_macs(std::uint64_t t, std::uint64_t d, std::uint64_t ratio) {
  return 4 * t * d * d + 2 * t * t * d + 2 * t * d * (ratio * d);
}

}  // namespace

std::string FlopReport::to_json() const {
  nlohmann::ordered_json j;
  j["macs"] = macs;
  j["flops"] = flops();
  auto parts = nlohmann::ordered_json::object();
  for (const auto& [name, n] : breakdown) parts[name] = n;
  j["breakdown"] = parts;
  return j.dump();
}

FlopReport flop_count(const model::ModelConfig& m, const prompts::PromptConfig& p, std::size_t classes) {
  m.validate();
  if (classes == 0) throw ContractError("flop count needs at least one class");
  p.validate(m);
  const std::uint64_t K = m.layers, dv = m.vision_width, dl = m.text_width, de = m.embed_dim;
  const std::uint64_t b = p.variant == prompts::Variant::none ? 0 : p.length;
  const std::uint64_t C = classes;
  // Once injected, prompt tokens stay in the sequence up to the last block.
  const std::uint64_t tv = m.num_patches() + 1 + (p.prompts_vision() ? b : 0);
  const std::uint64_t tl = m.context_length + (p.prompts_text() ? b : 0);

  FlopReport r;
  auto add = [&r](std::string name, std::uint64_t n) {
    r.breakdown.emplace_back(std::move(name), n);
    r.macs += n;
  };
  add("vision.patch_embed", std::uint64_t(m.num_patches()) * m.patch_dim() * dv);
  add("vision.blocks", K * block_macs(tv, dv, m.mlp_ratio));
  add("vision.proj", dv * de);
  add("text.blocks", C * K * block_macs(tl, dl, m.mlp_ratio));
  add("text.proj", C * dl * de);
  std::uint64_t maps = 0;
  if (p.uses_coupling()) {
    const std::uint64_t J = p.depth;
    const bool forward = p.direction == prompts::CouplingDirection::lang_to_vision;
    const std::uint64_t src = forward ? dl : dv;
    maps += J * b * dl * dv;
    if (p.is_progressive()) maps += (J - 1) * b * src * src;
  }
  add("prompt.maps", maps);
  add("logits", C * de);
  return r;
}

std::uint64_t instrumented_macs(const model::ModelConfig& m, const prompts::PromptConfig& p, std::size_t classes,
                                std::uint64_t seed) {
  m.validate();
  if (classes == 0) throw ContractError("flop count needs at least one class");
  auto params = model::BackboneParams<float>::init(m, seed);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> word(1, static_cast<std::uint32_t>(m.vocab_size - 1));
  std::vector<std::vector<std::uint32_t>> texts(classes);
  for (auto& t : texts) {
    t.resize(m.context_length);
    for (auto& w : t) w = word(rng);
  }
  diff::Tensor<float> image({m.image_size, m.image_size, 3});
  std::uniform_real_distribution<float> pixel(0.0f, 1.0f);
  for (auto& v : image.data()) v = pixel(rng);
  const std::vector<std::uint32_t> tmpl;
  auto bank = prompts::init_prompts(p, m, params.token_embedding, std::span<const std::uint32_t>(tmpl), seed);

  diff::Graph<float> g;
  model::BoundBackbone<float> bb(g, params, false);
  prompts::BoundPrompts<float> bp(g, bank, false);
  prompts::classify(bb, bp, image, texts, params.tau());
  return g.mac_count();
}

double overhead_percent(const FlopReport& x, const FlopReport& reference) {
  if (reference.macs == 0) throw ContractError("reference FLOP count is zero");
  return 100.0 * (double(x.macs) - double(reference.macs)) / double(reference.macs);
}

}  // namespace maple::eval
