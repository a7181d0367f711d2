// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/train/train.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "maple/error.hpp"
#include "maple/prompts/prompted.hpp"
#include "maple/train/optim.hpp"

namespace maple::train {

using diff::Graph;
using diff::Tensor;
using diff::Var;
using model::BoundBackbone;
using prompts::BoundPrompts;
using prompts::Variant;

namespace {

void check_finite(double loss, std::size_t step) {
  if (!std::isfinite(loss)) throw TrainingError("non-finite loss at step " + std::to_string(step));
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  std::uint64_t x = seed * 0x9e3779b97f4a7c15ull + epoch + 1;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  return x ^ (x >> 27);
}

}  // namespace

PretrainResult pretrain(const model::ModelConfig& config, const data::Dataset& dataset, const PretrainConfig& pc,
                        const LogFn& log) {
  std::unordered_map<std::uint32_t, std::vector<std::size_t>> by_class;
  std::vector<std::uint32_t> class_ids;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto label = dataset.samples[i].label;
    if (!by_class.count(label)) class_ids.push_back(label);
    by_class[label].push_back(i);
  }
  if (class_ids.size() < 2) throw ContractError("pretraining needs at least 2 classes");
  if (pc.epochs == 0 || pc.batch_size < 2) throw ConfigError("pretraining needs epochs >= 1 and batch_size >= 2");
  if (!(pc.train_tau > 0) || !(pc.final_tau > 0)) throw ConfigError("pretraining temperatures must be positive");

  PretrainResult out{model::BackboneParams<float>::init(config, pc.seed, static_cast<float>(pc.train_tau)), {}};
  auto& params = out.params;
  const std::size_t batch = std::min(pc.batch_size, class_ids.size());
  const std::size_t template_words = data::Vocabulary::build({}).tokenize(data::kTemplate).size();
  const std::size_t steps_per_epoch = std::max<std::size_t>(1, dataset.samples.size() / batch);
  Adam adam;
  adam.lr = pc.learning_rate;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < pc.epochs; ++epoch) {
    std::mt19937_64 rng(epoch_seed(pc.seed, epoch));
    std::unordered_map<std::uint32_t, std::size_t> cursor;
    for (auto id : class_ids) std::shuffle(by_class[id].begin(), by_class[id].end(), rng);
    double total = 0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step) {
      auto order = class_ids;
      std::shuffle(order.begin(), order.end(), rng);
      Graph<float> g;
      BoundBackbone<float> bb(g, params, true);
      std::vector<Var<float>> images, texts;
      for (std::size_t b = 0; b < batch; ++b) {
        const auto& pool = by_class[order[b]];
        const auto& sample = dataset.samples[pool[cursor[order[b]]++ % pool.size()]];
        images.push_back(model::encode_image(bb, sample.image));
        std::span<const std::uint32_t> caption(sample.caption);
        if (pc.drop_template) {
          // Drop a random number of leading template words.
          const std::size_t keep_from = std::uniform_int_distribution<std::size_t>(0, template_words)(rng);
          caption = caption.subspan(keep_from);
        }
        texts.push_back(model::encode_text(bb, caption));
      }
      auto loss = model::contrastive_loss(diff::concat_rows(images), diff::concat_rows(texts),
                                          static_cast<float>(pc.train_tau));
      const double value = loss.value()[0];
      check_finite(value, step);
      g.backward(loss);
      adam.begin_step();
      const auto leaves = bb.leaves();
      std::size_t k = 0;
      params.visit([&](const std::string& name, Tensor<float>& t) {
        if (name == "logit_temperature") return;
        const auto grad = g.grad(leaves[k]);
        adam.update(k, t.data(), grad.data());
        ++k;
      });
      total += value;
      if (log) log({step, epoch, value, pc.learning_rate});
    }
    out.epoch_loss.push_back(total / double(steps_per_epoch));
  }
  params.temperature[0] = static_cast<float>(pc.final_tau);
  return out;
}

std::vector<std::uint32_t> class_tokens(const prompts::PromptConfig& config, const data::Vocabulary& vocab,
                                        const data::ConceptClass& c) {
  return config.prompts_text() ? vocab.name_ids(c) : vocab.caption(c);
}

void TuneConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate >= 0)) throw ConfigError("learning_rate must be non-negative");
  if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must be in [0, 1)");
}

TuneResult prompt_tune(const model::BackboneParams<float>& backbone, prompts::PromptBank<float> bank,
                       const TuneConfig& tc, const data::Dataset& dataset, const std::vector<std::size_t>& train,
                       const std::vector<std::uint32_t>& classes, const data::Vocabulary& vocab, const LogFn& log) {
  tc.validate();
  const auto& pcfg = bank.config;
  if (pcfg.variant == Variant::none) throw ContractError("variant none has no prompts to tune");
  if (train.empty()) throw ContractError("empty training set");
  if (classes.empty()) throw ContractError("no classes to tune on");

  std::unordered_map<std::uint32_t, std::uint32_t> label_of;
  std::vector<std::vector<std::uint32_t>> captions;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    label_of[classes[c]] = static_cast<std::uint32_t>(c);
    captions.push_back(class_tokens(pcfg, vocab, dataset.class_by_id(classes[c])));
  }
  for (auto i : train) {
    if (i >= dataset.samples.size()) throw ContractError("training index out of range");
    if (!label_of.count(dataset.samples[i].label)) {
      throw ContractError("training sample " + std::to_string(i) + " has a label outside the tuning classes");
    }
  }

  const auto frozen = model::fingerprint(backbone);
  const float tau = backbone.tau();

  // A branch the variant never prompts is constant during tuning; encode it once.
  std::vector<Tensor<float>> image_cache;
  Tensor<float> class_cache;
  if (!pcfg.prompts_vision()) {
    image_cache.resize(dataset.samples.size());
    Graph<float> g;
    BoundBackbone<float> bb(g, backbone, false);
    for (auto i : train)
      if (image_cache[i].empty()) image_cache[i] = model::encode_image(bb, dataset.samples[i].image).value();
  }
  if (!pcfg.prompts_text()) {
    Graph<float> g;
    BoundBackbone<float> bb(g, backbone, false);
    prompts::BoundPrompts<float> none(g, bank, false);
    class_cache = prompts::encode_classes(bb, none, captions).value();
  }

  std::vector<Tensor<float>*> slots;
  bank.visit([&](const std::string&, Tensor<float>& t) { slots.push_back(&t); });
  std::vector<std::vector<float>> velocity;
  for (auto* t : slots) velocity.emplace_back(t->size(), 0.0f);

  TuneResult out;
  auto order = train;
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    std::mt19937_64 rng(epoch_seed(tc.seed, epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size, ++batches, ++out.steps) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      Graph<float> g;
      BoundBackbone<float> bb(g, backbone, false);
      BoundPrompts<float> bp(g, bank, true);
      std::vector<Var<float>> rows;
      std::vector<std::uint32_t> labels;
      for (std::size_t j = start; j < end; ++j) {
        const auto& s = dataset.samples[order[j]];
        rows.push_back(image_cache.empty() ? prompts::encode_image_prompted(bb, bp, s.image)
                                           : g.constant(image_cache[order[j]]));
        labels.push_back(label_of[s.label]);
      }
      auto z = class_cache.empty() ? prompts::encode_classes(bb, bp, captions) : g.constant(class_cache);
      auto logits = model::similarity_logits(diff::concat_rows(rows), z, tau);
      auto loss = diff::cross_entropy(logits, std::span<const std::uint32_t>(labels));
      const double value = loss.value()[0];
      check_finite(value, out.steps);
      g.backward(loss);

      // Same order as PromptBank::visit.
      std::vector<Var<float>> vars = bp.language;
      vars.insert(vars.end(), bp.vision.begin(), bp.vision.end());
      for (std::size_t k = 0; k < bp.coupling_weight.size(); ++k) {
        vars.push_back(bp.coupling_weight[k]);
        vars.push_back(bp.coupling_bias[k]);
      }
      for (std::size_t k = 0; k < bp.progressive_weight.size(); ++k) {
        vars.push_back(bp.progressive_weight[k]);
        vars.push_back(bp.progressive_bias[k]);
      }
      for (std::size_t k = 0; k < slots.size(); ++k) {
        const auto grad = g.grad(vars[k]);
        sgd_step(slots[k]->data(), grad.data(), tc.learning_rate, tc.momentum, velocity[k]);
      }
      total += value;
      if (log) log({out.steps, epoch, value, tc.learning_rate});
    }
    out.epoch_loss.push_back(total / double(batches));
    if (model::fingerprint(backbone) != frozen) {
      throw InvariantViolation("backbone parameters changed during prompt tuning (epoch " + std::to_string(epoch) +
                               ")");
    }
  }
  out.bank = std::move(bank);
  return out;
}

}  // namespace maple::train
