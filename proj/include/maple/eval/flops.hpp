// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "maple/model/config.hpp"
#include "maple/prompts/prompt_config.hpp"

namespace maple::eval {

/// Multiply-accumulates of one classification pass: one image, C class texts,
/// prompt maps and the C similarity dot products. One MAC is two FLOPs;
/// norms, softmax and nonlinearities are not counted.
///
/// Per block with T tokens and width d: 4·T·d² for the q/k/v/o projections,
/// 2·T²·d inside attention, 2·T·d·(mlp_ratio·d) for the MLP.
struct FlopReport {
  std::uint64_t macs = 0;
  std::vector<std::pair<std::string, std::uint64_t>> breakdown;  // MACs per component

  std::uint64_t flops() const { return 2 * macs; }
  std::string to_json() const;
};

FlopReport flop_count(const model::ModelConfig& model, const prompts::PromptConfig& prompts, std::size_t classes);

/// MACs counted by the graph while running the same pass on random weights.
/// Only practical for small configs.
std::uint64_t instrumented_macs(const model::ModelConfig& model, const prompts::PromptConfig& prompts,
                                std::size_t classes, std::uint64_t seed = 0);

/// 100·(x − ref)/ref.
double overhead_percent(const FlopReport& x, const FlopReport& reference);

}  // namespace maple::eval
