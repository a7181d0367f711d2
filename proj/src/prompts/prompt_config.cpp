// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/prompts/prompt_config.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "maple/error.hpp"

namespace maple::prompts {
namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 7> kVariants{{
    {Variant::none, "none"},
    {Variant::text_shallow, "text_shallow"},
    {Variant::text_deep, "text_deep"},
    {Variant::vision_deep, "vision_deep"},
    {Variant::independent_vl, "independent_vl"},
    {Variant::maple, "maple"},
    {Variant::maple_progressive, "maple_progressive"},
}};

constexpr std::array<std::pair<InitMode, std::string_view>, 3> kInits{{
    {InitMode::template_first_layer, "template_first_layer"},
    {InitMode::template_all_layers, "template_all_layers"},
    {InitMode::random_all, "random_all"},
}};

constexpr std::array<std::pair<CouplingDirection, std::string_view>, 2> kDirections{{
    {CouplingDirection::lang_to_vision, "lang_to_vision"},
    {CouplingDirection::vision_to_lang, "vision_to_lang"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [k, v] : table)
    if (k == e) return v;
  return "?";
}

template <typename E, std::size_t N>
E parse(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s, const char* what) {
  for (const auto& [k, v] : table)
    if (v == s) return k;
  std::string known;
  for (const auto& [k, v] : table) known += (known.empty() ? "" : ", ") + std::string(v);
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "' (expected one of " + known + ")");
}

}  // namespace

std::string_view to_string(Variant v) { return name_of(kVariants, v); }
std::string_view to_string(InitMode m) { return name_of(kInits, m); }
std::string_view to_string(CouplingDirection d) { return name_of(kDirections, d); }
Variant parse_variant(std::string_view s) { return parse(kVariants, s, "variant"); }
InitMode parse_init_mode(std::string_view s) { return parse(kInits, s, "init mode"); }
CouplingDirection parse_direction(std::string_view s) { return parse(kDirections, s, "coupling direction"); }

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> all = [] {
    std::vector<Variant> v;
    for (const auto& [k, name] : kVariants) v.push_back(k);
    return v;
  }();
  return all;
}

bool PromptConfig::prompts_text() const {
  switch (variant) {
    case Variant::text_shallow:
    case Variant::text_deep:
    case Variant::independent_vl:
    case Variant::maple:
    case Variant::maple_progressive:
      return true;
    default:
      return false;
  }
}

bool PromptConfig::prompts_vision() const {
  switch (variant) {
    case Variant::vision_deep:
    case Variant::independent_vl:
    case Variant::maple:
    case Variant::maple_progressive:
      return true;
    default:
      return false;
  }
}

std::size_t PromptConfig::text_depth() const {
  if (!prompts_text()) return 0;
  return variant == Variant::text_shallow ? 1 : depth;
}

std::size_t PromptConfig::vision_depth() const { return prompts_vision() ? depth : 0; }

std::size_t PromptConfig::set_count() const { return variant == Variant::none ? 0 : std::max(text_depth(), vision_depth()); }

void PromptConfig::validate(const model::ModelConfig& model) const {
  if (variant == Variant::none) return;
  if (length == 0) throw ConfigError("prompt length b must be at least 1");
  // text_shallow ignores depth; only the single input set exists.
  if (variant == Variant::text_shallow) return;
  if (depth == 0) throw ConfigError("prompt depth J must be at least 1");
  if (depth > model.layers) {
    throw ConfigError("prompt depth J=" + std::to_string(depth) + " exceeds layer count K=" +
                      std::to_string(model.layers));
  }
}

std::size_t PromptConfig::scaled_depth(std::size_t layers) { return std::max<std::size_t>(1, (3 * layers) / 4); }

PromptConfig PromptConfig::preset(Variant v, std::size_t layers) {
  PromptConfig c;
  c.variant = v;
  switch (v) {
    case Variant::none:
      c.depth = 0;
      c.length = 0;
      break;
    case Variant::text_shallow:
      c.depth = 1;
      c.length = 4;
      break;
    case Variant::text_deep:
    case Variant::vision_deep:
      c.depth = layers;
      c.length = 4;
      break;
    case Variant::independent_vl:
    case Variant::maple:
    case Variant::maple_progressive:
      c.depth = scaled_depth(layers);
      c.length = 2;
      break;
  }
  return c;
}

}  // namespace maple::prompts
