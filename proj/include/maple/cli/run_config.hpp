// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maple/data/dataset.hpp"
#include "maple/eval/benchmark.hpp"
#include "maple/model/config.hpp"
#include "maple/prompts/prompt_config.hpp"
#include "maple/train/train.hpp"

namespace maple::cli {

/// Everything a run depends on, as flat `key = value` lines.
struct RunConfig {
  model::ModelConfig model;  // vocab_size is derived from the class sets

  prompts::Variant variant = prompts::Variant::maple;
  std::optional<std::size_t> depth;   // unset: the variant preset
  std::optional<std::size_t> length;  // unset: the variant preset
  prompts::InitMode init_mode = prompts::InitMode::template_first_layer;
  prompts::CouplingDirection direction = prompts::CouplingDirection::lang_to_vision;
  std::size_t template_offset = 0;

  train::TuneConfig tune;  // tune.seed is taken from `seed`

  std::size_t classes = 20;
  std::size_t base_classes = 12;
  std::size_t shots = 16;
  std::size_t samples_per_class = 40;
  std::uint64_t data_seed = 11;
  std::size_t secondary_classes = 16;

  train::PretrainConfig pretrain;  // pretrain.seed is taken from pretrain_seed
  std::size_t pretrain_samples_per_class = 20;
  std::uint64_t pretrain_data_seed = 7;

  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  eval::SweepAxis sweep_axis = eval::SweepAxis::depth;
  std::vector<data::Shift> shifts;
  std::size_t flop_classes = 1000;
  bool export_pca = true;

  std::string backbone;  // checkpoint path
  std::string prompts;   // checkpoint path

  RunConfig();

  /// The resolved prompt design point (presets filled in).
  prompts::PromptConfig prompt_config() const;
  eval::BenchmarkConfig bench_config() const;

  /// Sets one key from its text form. ConfigError naming the key when the key
  /// is unknown or the value does not parse.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  /// Parses `key = value` lines over the current values. '#' starts a comment.
  /// ConfigError names the line and key.
  void merge(std::string_view text);
  static RunConfig parse(std::string_view text);
  /// Every key, one per line, in the fixed key order.
  std::string serialize() const;

  /// Cross-key checks. ConfigError naming the offending key.
  void validate() const;
};

struct KeyInfo {
  std::string_view name;
  std::string_view unit;
  std::string_view help;
};

const std::vector<KeyInfo>& config_keys();

/// Key table for --help: name, default, unit, description.
std::string key_help();

}  // namespace maple::cli
