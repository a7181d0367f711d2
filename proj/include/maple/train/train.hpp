// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "maple/data/dataset.hpp"
#include "maple/model/backbone.hpp"
#include "maple/prompts/prompt_bank.hpp"

namespace maple::train {

/// One optimizer step, for JSON-lines logging.
struct StepLog {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};
using LogFn = std::function<void(const StepLog&)>;

struct PretrainConfig {
  std::size_t epochs = 12;
  std::size_t batch_size = 16;
  double learning_rate = 1e-4;
  double train_tau = 0.01;  // contrastive temperature while pretraining
  double final_tau = 0.01;  // stored in the returned params
  // Each caption loses a uniformly drawn number of leading template words,
  // from none to all of them, so bare class names are seen too.
  bool drop_template = true;
  std::uint64_t seed = 0;
};

struct PretrainResult {
  model::BackboneParams<float> params;
  std::vector<double> epoch_loss;
};

/// Contrastive pretraining with Adam. Each batch holds distinct classes, so no
/// caption appears twice among the negatives. ContractError for fewer than 2
/// classes, TrainingError on a non-finite loss.
PretrainResult pretrain(const model::ModelConfig& config, const data::Dataset& dataset, const PretrainConfig& pc,
                        const LogFn& log = nullptr);

/// Text input for one class. Variants with language prompts read the class
/// name alone (the prompts take the template's place); the others read the
/// full caption.
std::vector<std::uint32_t> class_tokens(const prompts::PromptConfig& config, const data::Vocabulary& vocab,
                                        const data::ConceptClass& c);

struct TuneConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 4;
  double learning_rate = 0.0035;
  double momentum = 0.9;
  std::uint64_t seed = 0;

  /// ConfigError for non-positive epochs or batch size, negative lr, or
  /// momentum outside [0, 1).
  void validate() const;
};

struct TuneResult {
  prompts::PromptBank<float> bank;
  std::vector<double> epoch_loss;
  std::size_t steps = 0;
};

/// Prompt tuning: cross-entropy of the prompted zero-shot head over `classes`
/// (class ids of the dataset; labels must be among them). Only the bank is
/// updated. The backbone fingerprint is compared after every epoch and a
/// change raises InvariantViolation.
TuneResult prompt_tune(const model::BackboneParams<float>& backbone, prompts::PromptBank<float> bank,
                       const TuneConfig& tc, const data::Dataset& dataset, const std::vector<std::size_t>& train,
                       const std::vector<std::uint32_t>& classes, const data::Vocabulary& vocab,
                       const LogFn& log = nullptr);

}  // namespace maple::train
