// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/eval/benchmark.hpp"

#include <sstream>
#include <unordered_map>

#include "maple/error.hpp"
#include "maple/prompts/prompted.hpp"
#include "maple/util/parallel.hpp"

namespace maple::eval {

using diff::Graph;
using diff::Tensor;
using prompts::PromptConfig;
using prompts::Variant;

PromptedPredictor::PromptedPredictor(const model::BackboneParams<float>& backbone, prompts::PromptBank<float> bank,
                                     const data::Vocabulary& vocab)
    : backbone_(&backbone), bank_(std::move(bank)), vocab_(&vocab) {}

Tensor<float> PromptedPredictor::class_embeddings(const data::Dataset& dataset,
                                                  const std::vector<std::uint32_t>& classes) const {
  std::vector<std::vector<std::uint32_t>> tokens;
  for (auto id : classes) tokens.push_back(train::class_tokens(bank_.config, *vocab_, dataset.class_by_id(id)));
  Graph<float> g;
  model::BoundBackbone<float> bb(g, *backbone_, false);
  prompts::BoundPrompts<float> bp(g, bank_, false);
  return prompts::encode_classes(bb, bp, tokens).value();
}

Tensor<float> PromptedPredictor::image_embeddings(const data::Dataset& dataset,
                                                  const std::vector<std::size_t>& indices) const {
  const std::size_t d = backbone_->config.embed_dim;
  if (indices.empty()) throw ContractError("no samples to embed");
  Tensor<float> out({indices.size(), d});
  for (auto i : indices)
    if (i >= dataset.samples.size()) throw ContractError("sample index " + std::to_string(i) + " out of range");
  parallel_for(indices.size(), [&](std::size_t r) {
    Graph<float> g;
    model::BoundBackbone<float> bb(g, *backbone_, false);
    prompts::BoundPrompts<float> bp(g, bank_, false);
    const auto e = prompts::encode_image_prompted(bb, bp, dataset.samples[indices[r]].image).value();
    std::copy(e.data().begin(), e.data().end(), out.data().begin() + r * d);
  });
  return out;
}

std::vector<std::uint32_t> PromptedPredictor::predict(const data::Dataset& dataset,
                                                      const std::vector<std::size_t>& indices,
                                                      const std::vector<std::uint32_t>& classes) const {
  if (classes.empty()) throw ContractError("no candidate classes");
  const auto z = class_embeddings(dataset, classes);
  const auto x = image_embeddings(dataset, indices);
  const std::size_t d = z.cols();
  std::vector<std::uint32_t> out(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    std::size_t best = 0;
    float best_score = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      float s = 0;
      for (std::size_t j = 0; j < d; ++j) s += x[r * d + j] * z[c * d + j];
      if (c == 0 || s > best_score) {
        best = c;
        best_score = s;
      }
    }
    out[r] = classes[best];
  }
  return out;
}

ArmResult evaluate_arm(const Predictor& predictor, const data::Dataset& dataset,
                       const std::vector<std::size_t>& indices, const std::vector<std::uint32_t>& classes) {
  if (indices.empty()) throw ContractError("empty test set");
  std::unordered_map<std::uint32_t, std::pair<std::size_t, std::size_t>> tally;  // correct, total
  for (auto c : classes) tally[c] = {0, 0};
  for (auto i : indices) {
    if (i >= dataset.samples.size()) throw ContractError("sample index " + std::to_string(i) + " out of range");
    if (!tally.count(dataset.samples[i].label)) {
      throw ContractError("sample " + std::to_string(i) + " has a label outside the candidate classes");
    }
  }
  const auto predicted = predictor.predict(dataset, indices, classes);
  if (predicted.size() != indices.size()) throw ContractError("predictor returned the wrong number of labels");
  std::size_t correct = 0;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto& t = tally[dataset.samples[indices[r]].label];
    ++t.second;
    if (predicted[r] == dataset.samples[indices[r]].label) {
      ++t.first;
      ++correct;
    }
  }
  ArmResult out;
  out.samples = indices.size();
  out.accuracy = 100.0 * double(correct) / double(indices.size());
  for (const auto& [id, t] : tally)
    if (t.second > 0) out.per_class[id] = 100.0 * double(t.first) / double(t.second);
  return out;
}

MetricsRecord base_to_novel_eval(const Predictor& predictor, const data::Dataset& dataset,
                                 const data::SplitSpec& spec, const data::Split& split) {
  const auto base = evaluate_arm(predictor, dataset, split.base_test, spec.base);
  const auto novel = evaluate_arm(predictor, dataset, split.novel_test, spec.novel);
  MetricsRecord r;
  r.base_acc = base.accuracy;
  r.novel_acc = novel.accuracy;
  r.hm = harmonic_mean(base.accuracy, novel.accuracy);
  r.per_class = base.per_class;
  r.per_class.insert(novel.per_class.begin(), novel.per_class.end());
  return r;
}

CrossDatasetResult cross_dataset_eval(const Predictor& predictor, const std::vector<Target>& targets) {
  if (targets.empty()) throw ContractError("no cross-dataset targets");
  CrossDatasetResult out;
  for (const auto& t : targets) {
    if (!t.dataset) throw ContractError("target '" + t.name + "' has no dataset");
    auto indices = t.indices;
    if (indices.empty())
      for (std::size_t i = 0; i < t.dataset->samples.size(); ++i) indices.push_back(i);
    auto classes = t.classes;
    if (classes.empty())
      for (const auto& c : t.dataset->classes) classes.push_back(c.id);
    const auto arm = evaluate_arm(predictor, *t.dataset, indices, classes);
    MetricsRecord r;
    r.label = t.name;
    r.base_acc = arm.accuracy;
    r.per_class = arm.per_class;
    out.targets.push_back(std::move(r));
    out.average += arm.accuracy;
  }
  out.average /= double(targets.size());
  return out;
}

std::vector<MetricsRecord> domain_gen_eval(const Predictor& predictor, const data::Dataset& dataset,
                                           const std::vector<std::size_t>& indices,
                                           const std::vector<std::uint32_t>& classes,
                                           const std::vector<data::Shift>& shifts, std::uint64_t seed) {
  for (const auto& s : shifts) s.validate();
  auto single = [&](const data::Dataset& ds, const std::vector<std::size_t>& idx, std::string label) {
    const auto arm = evaluate_arm(predictor, ds, idx, classes);
    MetricsRecord r;
    r.label = std::move(label);
    r.base_acc = arm.accuracy;
    r.per_class = arm.per_class;
    return r;
  };
  std::vector<MetricsRecord> out{single(dataset, indices, "source")};
  for (const auto& s : shifts) {
    data::Dataset shifted;
    shifted.classes = dataset.classes;
    shifted.samples.resize(indices.size());
    std::vector<std::size_t> idx(indices.size());
    parallel_for(indices.size(), [&](std::size_t r) {
      shifted.samples[r] = data::domain_shift(dataset.samples.at(indices[r]), s, seed);
      idx[r] = r;
    });
    out.push_back(single(shifted, idx, s.name()));
  }
  return out;
}

PointResult run_base_to_novel(const model::BackboneParams<float>& backbone, const data::Dataset& dataset,
                              const data::Vocabulary& vocab, const PromptConfig& config,
                              const BenchmarkConfig& bench, std::uint64_t seed, const train::LogFn& log,
                              std::vector<std::string>* warnings) {
  config.validate(backbone.config);
  const auto spec = data::default_split(dataset, bench.base_count, bench.shots, seed);
  const auto split = data::split(dataset, spec);
  PointResult out{{}, prompts::PromptBank<float>::zeros(config, backbone.config), {}};
  if (config.variant != Variant::none) {
    const auto tmpl = vocab.template_ids();
    auto bank = prompts::init_prompts(config, backbone.config, backbone.token_embedding,
                                      std::span<const std::uint32_t>(tmpl), seed, warnings);
    auto tc = bench.tune;
    tc.seed = seed;
    auto tuned = train::prompt_tune(backbone, std::move(bank), tc, dataset, split.base_train, spec.base, vocab, log);
    out.bank = std::move(tuned.bank);
    out.epoch_loss = std::move(tuned.epoch_loss);
  }
  PromptedPredictor predictor(backbone, out.bank, vocab);
  out.metrics = base_to_novel_eval(predictor, dataset, spec, split);
  out.metrics.label = std::string(prompts::to_string(config.variant));
  return out;
}

SweepAxis parse_sweep_axis(std::string_view s) {
  for (auto a : {SweepAxis::depth, SweepAxis::length, SweepAxis::init_mode, SweepAxis::variant, SweepAxis::direction})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown sweep axis '" + std::string(s) + "' (depth, length, init_mode, variant, direction)");
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::depth: return "depth";
    case SweepAxis::length: return "length";
    case SweepAxis::init_mode: return "init_mode";
    case SweepAxis::variant: return "variant";
    case SweepAxis::direction: return "direction";
  }
  return "?";
}

std::vector<SweepPoint> sweep_points(SweepAxis axis, const PromptConfig& base, std::size_t layers) {
  std::vector<SweepPoint> out;
  auto with = [&](std::string value, auto&& edit) {
    PromptConfig c = base;
    edit(c);
    out.push_back({std::move(value), c});
  };
  switch (axis) {
    case SweepAxis::depth:
      for (std::size_t j = 1; j <= layers; ++j) with(std::to_string(j), [j](PromptConfig& c) { c.depth = j; });
      break;
    case SweepAxis::length:
      for (std::size_t b : {1, 2, 4, 8}) with(std::to_string(b), [b](PromptConfig& c) { c.length = b; });
      break;
    case SweepAxis::init_mode:
      for (auto m : {prompts::InitMode::template_first_layer, prompts::InitMode::template_all_layers,
                     prompts::InitMode::random_all})
        with(std::string(prompts::to_string(m)), [m](PromptConfig& c) { c.init = m; });
      break;
    case SweepAxis::variant:
      for (auto v : {Variant::vision_deep, Variant::text_deep, Variant::independent_vl, Variant::maple}) {
        auto c = PromptConfig::preset(v, layers);
        c.init = base.init;
        c.template_offset = base.template_offset;
        out.push_back({std::string(prompts::to_string(v)), c});
      }
      break;
    case SweepAxis::direction:
      if (!base.uses_coupling()) {
        throw ConfigError("direction sweep needs a coupled variant, got " +
                          std::string(prompts::to_string(base.variant)));
      }
      for (auto d : {prompts::CouplingDirection::lang_to_vision, prompts::CouplingDirection::vision_to_lang})
        with(std::string(prompts::to_string(d)), [d](PromptConfig& c) { c.direction = d; });
      break;
  }
  return out;
}

std::vector<SweepRow> sweep(SweepAxis axis, const PromptConfig& base, const model::BackboneParams<float>& backbone,
                            const data::Dataset& dataset, const data::Vocabulary& vocab,
                            const BenchmarkConfig& bench, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  const auto points = sweep_points(axis, base, backbone.config.layers);
  for (const auto& p : points) p.config.validate(backbone.config);
  std::vector<SweepRow> rows;
  for (const auto& p : points) {
    SweepRow row{std::string(to_string(axis)), p.value, {}, {}};
    for (auto seed : seeds) {
      auto r = run_base_to_novel(backbone, dataset, vocab, p.config, bench, seed).metrics;
      r.label = p.value + "/seed" + std::to_string(seed);
      row.per_seed.push_back(std::move(r));
    }
    row.mean = mean_record(row.per_seed, p.value);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "axis,value,seed,base_acc,novel_acc,hm\n";
  auto line = [&](const SweepRow& row, const std::string& seed, const MetricsRecord& r) {
    out << row.axis << ',' << row.value << ',' << seed << ',' << r.base_acc << ',' << r.novel_acc.value_or(0) << ','
        << r.hm.value_or(0) << '\n';
  };
  for (const auto& row : rows) {
    for (std::size_t s = 0; s < row.per_seed.size(); ++s) {
      const auto& label = row.per_seed[s].label;
      line(row, label.substr(label.rfind("seed") + 4), row.per_seed[s]);
    }
    line(row, "mean", row.mean);
  }
  return out.str();
}

}  // namespace maple::eval
