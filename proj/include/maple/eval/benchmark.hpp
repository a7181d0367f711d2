// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maple/data/dataset.hpp"
#include "maple/eval/metrics.hpp"
#include "maple/model/backbone.hpp"
#include "maple/prompts/prompt_bank.hpp"
#include "maple/train/train.hpp"

namespace maple::eval {

/// Anything that labels images given a candidate class list.
class Predictor {
 public:
  virtual ~Predictor() = default;
  /// Predicted class id, one of `classes`, for each sample index.
  virtual std::vector<std::uint32_t> predict(const data::Dataset& dataset, const std::vector<std::size_t>& indices,
                                             const std::vector<std::uint32_t>& classes) const = 0;
};

/// Zero-shot head over the prompted encoders. A bank of variant none gives the
/// unprompted baseline. Ties go to the earlier class.
class PromptedPredictor : public Predictor {
 public:
  PromptedPredictor(const model::BackboneParams<float>& backbone, prompts::PromptBank<float> bank,
                    const data::Vocabulary& vocab);

  std::vector<std::uint32_t> predict(const data::Dataset& dataset, const std::vector<std::size_t>& indices,
                                     const std::vector<std::uint32_t>& classes) const override;

  /// [C × d_vl], rows in `classes` order.
  diff::Tensor<float> class_embeddings(const data::Dataset& dataset, const std::vector<std::uint32_t>& classes) const;
  /// [n × d_vl], rows in `indices` order. Samples are encoded in parallel.
  diff::Tensor<float> image_embeddings(const data::Dataset& dataset, const std::vector<std::size_t>& indices) const;

  const prompts::PromptBank<float>& bank() const { return bank_; }

 private:
  const model::BackboneParams<float>* backbone_;
  prompts::PromptBank<float> bank_;
  const data::Vocabulary* vocab_;
};

struct ArmResult {
  double accuracy = 0.0;  // percent
  std::map<std::uint32_t, double> per_class;
  std::size_t samples = 0;
};

/// ContractError for an empty index list or a label outside `classes`.
ArmResult evaluate_arm(const Predictor& predictor, const data::Dataset& dataset,
                       const std::vector<std::size_t>& indices, const std::vector<std::uint32_t>& classes);

/// Base arm over base_test with the base classes, novel arm over novel_test
/// with the novel classes.
MetricsRecord base_to_novel_eval(const Predictor& predictor, const data::Dataset& dataset,
                                 const data::SplitSpec& spec, const data::Split& split);

struct Target {
  std::string name;
  const data::Dataset* dataset = nullptr;
  std::vector<std::size_t> indices;     // empty: every sample
  std::vector<std::uint32_t> classes;   // empty: every class of the dataset
};

struct CrossDatasetResult {
  std::vector<MetricsRecord> targets;  // single-arm records
  double average = 0.0;
};

CrossDatasetResult cross_dataset_eval(const Predictor& predictor, const std::vector<Target>& targets);

/// One single-arm record for the unshifted samples ("source"), then one per
/// shift, labelled by Shift::name().
std::vector<MetricsRecord> domain_gen_eval(const Predictor& predictor, const data::Dataset& dataset,
                                           const std::vector<std::size_t>& indices,
                                           const std::vector<std::uint32_t>& classes,
                                           const std::vector<data::Shift>& shifts, std::uint64_t seed);

struct BenchmarkConfig {
  std::size_t base_count = 12;
  std::size_t shots = 16;
  train::TuneConfig tune;
};

struct PointResult {
  MetricsRecord metrics;
  prompts::PromptBank<float> bank;
  std::vector<double> epoch_loss;
};

/// Split, initialize, tune and evaluate one configuration. The seed drives the
/// few-shot draw, prompt initialization and batch order. Variant none skips
/// tuning and reports the zero-shot baseline.
PointResult run_base_to_novel(const model::BackboneParams<float>& backbone, const data::Dataset& dataset,
                              const data::Vocabulary& vocab, const prompts::PromptConfig& config,
                              const BenchmarkConfig& bench, std::uint64_t seed, const train::LogFn& log = nullptr,
                              std::vector<std::string>* warnings = nullptr);

enum class SweepAxis { depth, length, init_mode, variant, direction };

SweepAxis parse_sweep_axis(std::string_view s);
std::string_view to_string(SweepAxis a);

struct SweepPoint {
  std::string value;
  prompts::PromptConfig config;
};

/// depth: J = 1..K; length: b in {1, 2, 4, 8}; init_mode: every mode;
/// variant: vision_deep, text_deep, independent_vl, maple; direction: both
/// (ConfigError unless the base variant is coupled).
std::vector<SweepPoint> sweep_points(SweepAxis axis, const prompts::PromptConfig& base, std::size_t layers);

struct SweepRow {
  std::string axis;
  std::string value;
  MetricsRecord mean;
  std::vector<MetricsRecord> per_seed;
};

std::vector<SweepRow> sweep(SweepAxis axis, const prompts::PromptConfig& base,
                            const model::BackboneParams<float>& backbone, const data::Dataset& dataset,
                            const data::Vocabulary& vocab, const BenchmarkConfig& bench,
                            const std::vector<std::uint64_t>& seeds);

/// Header "axis,value,seed,base_acc,novel_acc,hm"; per-seed rows, then a row
/// with seed "mean".
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace maple::eval
