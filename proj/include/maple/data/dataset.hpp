// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maple/diffcore/tensor.hpp"

namespace maple::data {

using diff::Tensor;

inline constexpr std::size_t kImageSize = 32;
inline constexpr std::string_view kTemplate = "a photo of a";
inline constexpr std::string_view kPadWord = "<pad>";

enum class ShapeFamily { circle, square, triangle, cross, ring, diamond, bar, frame };
enum class Texture { solid, striped, checkered };

std::string_view to_string(ShapeFamily s);
std::string_view to_string(Texture t);

struct ConceptClass {
  std::uint32_t id = 0;
  std::vector<std::string> name;  // e.g. {"red", "circle"}
  ShapeFamily shape = ShapeFamily::circle;
  std::array<float, 3> color{1, 0, 0};
  Texture texture = Texture::solid;
  float size_min = 0.22f;  // half-extent as a fraction of the image side
  float size_max = 0.34f;

  std::string display_name() const;
  /// Throws ParameterError on an empty name or a bad size range.
  void validate() const;
};

/// Nuisance factors of the renderer. Two corpora drawn from the same classes
/// with different styles differ in distribution but not in labels.
struct RenderStyle {
  float position_jitter = 0.18f;  // fraction of the side
  float hue_jitter = 12.0f;       // degrees
  float brightness_jitter = 0.12f;
  float background_level = 0.15f;  // mean background intensity
  float background_noise = 0.04f;
  std::size_t distractors = 0;  // small gray blobs
  bool tinted_background = false;

  static RenderStyle pretraining();
  static RenderStyle benchmark();
};

/// Word-level vocabulary: pad (id 0), the template words, then class words in
/// order of first appearance.
class Vocabulary {
 public:
  static Vocabulary build(const std::vector<std::vector<ConceptClass>>& class_sets);

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  /// VocabularyError for unknown words.
  std::uint32_t id(std::string_view word) const;
  std::vector<std::uint32_t> tokenize(std::string_view text) const;
  std::string detokenize(std::span<const std::uint32_t> ids) const;

  /// "a photo of a <name>".
  std::vector<std::uint32_t> caption(const ConceptClass& c) const;
  /// The class name alone, e.g. "red circle".
  std::vector<std::uint32_t> name_ids(const ConceptClass& c) const;
  std::vector<std::uint32_t> template_ids() const { return tokenize(kTemplate); }

 private:
  std::vector<std::string> words_;
};

struct Sample {
  std::uint32_t id = 0;
  Tensor<float> image;  // [32 × 32 × 3], values in [0, 1]
  std::uint32_t label = 0;
  std::vector<std::uint32_t> caption;
};

struct Dataset {
  std::vector<ConceptClass> classes;
  std::vector<Sample> samples;

  /// Index of the class with the given id; ContractError if absent.
  const ConceptClass& class_by_id(std::uint32_t id) const;
};

/// Deterministic in (class, seed).
Sample render(const ConceptClass& c, const Vocabulary& vocab, std::uint64_t seed,
              const RenderStyle& style = RenderStyle::benchmark());

/// per_class_count samples for each class, grouped by class in class order.
/// Sample ids are positions in the result.
Dataset make_dataset(const std::vector<ConceptClass>& classes, const Vocabulary& vocab, std::size_t per_class_count,
                     std::uint64_t seed, const RenderStyle& style = RenderStyle::benchmark());

struct SplitSpec {
  std::vector<std::uint32_t> base;
  std::vector<std::uint32_t> novel;
  std::size_t shots = 16;
  std::uint64_t seed = 0;
};

/// Sample indices into the source dataset.
struct Split {
  std::vector<std::size_t> base_train;  // exactly `shots` per base class
  std::vector<std::size_t> base_test;   // remaining base samples
  std::vector<std::size_t> novel_test;  // every novel sample
};

/// InsufficiencyError when a base class has fewer than `shots` samples,
/// ContractError when base and novel overlap or name unknown classes.
Split split(const Dataset& dataset, const SplitSpec& spec);

/// First `base_count` classes by id are base, the rest novel.
SplitSpec default_split(const Dataset& dataset, std::size_t base_count, std::size_t shots, std::uint64_t seed);

/// Two class sets with disjoint word vocabularies. The primary set is
/// colors × {circle, square, triangle, cross}, up to 24 classes; the secondary
/// set uses other colors and shapes. Primary ids start at 0, secondary at 100,
/// so the sets can share one pretraining corpus.
std::vector<ConceptClass> primary_classes(std::size_t count);
std::vector<ConceptClass> secondary_classes(std::size_t count);

enum class ShiftKind { gaussian_noise, hue_rotate, sketch, blur };

struct Shift {
  ShiftKind kind = ShiftKind::gaussian_noise;
  double amount = 0.0;  // σ for noise in [0, 1]; θ degrees in [-360, 360]; radius in [0, 8] for blur

  std::string name() const;
  /// Throws ParameterError outside the ranges above.
  void validate() const;
};

ShiftKind parse_shift_kind(std::string_view s);

/// Label- and caption-preserving pixel transform, deterministic in seed.
Sample domain_shift(const Sample& sample, const Shift& shift, std::uint64_t seed);

/// Dataset file. Header: "MPDS", version, sample count, height, width,
/// channels (u32 LE each after the magic). Per sample: class id u32, caption
/// length u32, caption ids u32 each, then height·width·channels f32 pixels.
inline constexpr std::uint32_t kDatasetVersion = 1;
std::string serialize_dataset(const Dataset& dataset);
/// Classes are not stored; the returned dataset has an empty class list.
/// FormatError on bad magic or truncation, VersionError on version mismatch.
Dataset deserialize_dataset(std::string_view bytes);
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace maple::data
