// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "maple/model/config.hpp"

namespace maple::prompts {

enum class Variant {
  none,               // frozen zero-shot model
  text_shallow,       // one language prompt set at the text input
  text_deep,          // language prompts in the first J text blocks
  vision_deep,        // vision prompts in the first J vision blocks
  independent_vl,     // both, learned without interaction
  maple,              // language prompts, vision prompts produced by coupling maps
  maple_progressive,  // maple with each prompt set conditioned on the previous one
};

enum class InitMode { template_first_layer, template_all_layers, random_all };

enum class CouplingDirection {
  lang_to_vision,  // vision prompts are F_k(P_k)
  vision_to_lang,  // language prompts are F'_k(P̃_k)
};

std::string_view to_string(Variant v);
std::string_view to_string(InitMode m);
std::string_view to_string(CouplingDirection d);
/// Parsers throw ConfigError on unknown names.
Variant parse_variant(std::string_view s);
InitMode parse_init_mode(std::string_view s);
CouplingDirection parse_direction(std::string_view s);

/// Every variant, in a fixed order.
const std::vector<Variant>& all_variants();

struct PromptConfig {
  Variant variant = Variant::maple;
  std::size_t depth = 4;   // J
  std::size_t length = 2;  // b
  InitMode init = InitMode::template_first_layer;
  CouplingDirection direction = CouplingDirection::lang_to_vision;
  /// First template word copied into P_0 by the template init modes.
  std::size_t template_offset = 0;

  bool uses_coupling() const { return variant == Variant::maple || variant == Variant::maple_progressive; }
  bool is_progressive() const { return variant == Variant::maple_progressive; }
  /// Whether the text branch receives prompts.
  bool prompts_text() const;
  /// Whether the vision branch receives prompts.
  bool prompts_vision() const;
  /// Number of text blocks receiving fresh prompts (1 for text_shallow).
  std::size_t text_depth() const;
  /// Number of vision blocks receiving fresh prompts.
  std::size_t vision_depth() const;
  /// Number of prompt sets stored in a bank.
  std::size_t set_count() const;

  /// Throws ConfigError when J or b is outside [1, K] / ≥ 1.
  void validate(const model::ModelConfig& model) const;

  /// Depth used at desk scale for a K-layer model: ⌊0.75·K⌋, at least 1,
  /// which gives J = 9 for K = 12.
  static std::size_t scaled_depth(std::size_t layers);

  /// Preset for a variant on a K-layer model. Language-only and vision-only
  /// deep prompting use J = K with 4 tokens; the joint variants use the scaled
  /// depth with 2 tokens per branch; text_shallow uses J = 1 with 4 tokens.
  static PromptConfig preset(Variant v, std::size_t layers);
};

}  // namespace maple::prompts
