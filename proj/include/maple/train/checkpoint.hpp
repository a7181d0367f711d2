// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "maple/model/backbone.hpp"
#include "maple/prompts/prompt_bank.hpp"

namespace maple::train {

/// Checkpoint file. "MPLT", version u32, tensor count u32; per tensor: name
/// length u16, UTF-8 name, rank u8, dims u32 each, then f32 values, all LE.
///
/// Besides the weights a checkpoint holds, in this order: "meta.model" (the
/// ModelConfig as integers), the backbone tensors, "meta.prompt" and the bank
/// tensors when a bank is present, "meta.config" (the run config text, one
/// byte per element) and "meta.step".
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::optional<model::BackboneParams<float>> backbone;
  std::optional<prompts::PromptBank<float>> prompts;
  std::string config_echo;
  std::uint64_t step = 0;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
/// FormatError on bad magic, truncation or unexpected tensors; VersionError on
/// a version mismatch.
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace maple::train
