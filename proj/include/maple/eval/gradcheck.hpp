// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

#include "maple/diffcore/gradcheck.hpp"
#include "maple/model/config.hpp"
#include "maple/prompts/prompt_config.hpp"

namespace maple::eval {

/// "tiny": K=2, d_v=d_l=d_vl=8, 4×4 images in 2×2 patches, context 4, vocab 7.
/// ConfigError for any other name.
model::ModelConfig gradcheck_model(std::string_view size);

struct PromptGradcheck {
  diff::GradCheckReport exact64;  // central differences in 64-bit
  diff::GradCheckReport mixed32;  // 32-bit backward against 64-bit differences
  std::size_t scalars = 0;
};

/// Checks the gradient of the tuning loss (two images, three classes) with
/// respect to every trainable scalar of the bank, at h = 1e-5. The bank is
/// drawn from N(0, 0.5²) so no prompt row is near-constant.
PromptGradcheck prompt_gradcheck(const model::ModelConfig& model, const prompts::PromptConfig& config,
                                 std::uint64_t seed);

}  // namespace maple::eval
