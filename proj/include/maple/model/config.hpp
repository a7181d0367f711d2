// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

namespace maple::model {

/// Architecture of the dual encoder. Both branches share the layer count.
struct ModelConfig {
  std::size_t layers = 6;          // K
  std::size_t vision_width = 96;   // d_v
  std::size_t text_width = 64;     // d_l
  std::size_t embed_dim = 64;      // d_vl
  std::size_t image_size = 32;
  std::size_t patch_size = 8;
  std::size_t context_length = 8;  // N
  std::size_t vision_heads = 4;
  std::size_t text_heads = 4;
  std::size_t vocab_size = 0;
  std::size_t mlp_ratio = 4;

  /// M, the number of image patches.
  std::size_t num_patches() const {
    const std::size_t side = image_size / patch_size;
    return side * side;
  }
  /// Flattened length of one patch (patch_size² · 3 channels).
  std::size_t patch_dim() const { return patch_size * patch_size * 3; }

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  /// ViT-B/16 CLIP dimensions, for analytic FLOP accounting.
  static ModelConfig clip_b16();
};

/// Token id reserved for padding in every vocabulary.
inline constexpr std::uint32_t kPadToken = 0;

}  // namespace maple::model
