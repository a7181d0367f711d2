// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/cli/commands.hpp"

#include <cstdio>
#include <iomanip>
#include <json.hpp>
#include <numeric>

#include "maple/error.hpp"
#include "maple/eval/embeddings.hpp"
#include "maple/eval/flops.hpp"
#include "maple/eval/gradcheck.hpp"
#include "maple/eval/metrics.hpp"
#include "maple/train/checkpoint.hpp"
#include "maple/util/binary_io.hpp"

namespace maple::cli {

namespace fs = std::filesystem;

RunDir RunDir::create(const fs::path& path) {
  std::error_code ec;
  if (fs::exists(path, ec) && !(fs::is_directory(path, ec) && fs::is_empty(path, ec))) {
    throw ConfigError("--out: run directory '" + path.string() + "' already exists and is not empty");
  }
  fs::create_directories(path, ec);
  if (ec) throw IoError("cannot create run directory '" + path.string() + "': " + ec.message());
  RunDir d;
  d.path_ = path;
  return d;
}

void RunDir::write(const std::string& name, const std::string& bytes) const {
  const auto p = path_ / name;
  if (fs::exists(p)) throw IoError("refusing to overwrite " + p.string());
  io::write_file(p.string(), bytes);
}

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    if (err->code() == ErrorCode::configuration) return 2;
    if (err->code() == ErrorCode::invariant_violation) return 3;
  }
  return 1;
}

namespace {

struct World {
  std::vector<data::ConceptClass> primary, secondary;
  data::Vocabulary vocab;
  model::ModelConfig model;
};

World world(const RunConfig& cfg) {
  cfg.validate();
  World w{data::primary_classes(cfg.classes), data::secondary_classes(cfg.secondary_classes), {}, cfg.model};
  w.vocab = data::Vocabulary::build({w.primary, w.secondary});
  w.model.vocab_size = w.vocab.size();
  return w;
}

data::Dataset benchmark(const RunConfig& cfg, const World& w) {
  return data::make_dataset(w.primary, w.vocab, cfg.samples_per_class, cfg.data_seed, data::RenderStyle::benchmark());
}

void write_config(const RunConfig& cfg, const RunDir& out) { out.write("config.cfg", cfg.serialize()); }

model::BackboneParams<float> load_backbone(const RunConfig& cfg, const World& w) {
  if (cfg.backbone.empty()) throw ConfigError("config key 'backbone': a backbone checkpoint path is required");
  auto ckpt = train::load_checkpoint(cfg.backbone);
  if (!ckpt.backbone) throw FormatError(cfg.backbone + ": checkpoint holds no backbone");
  const auto& m = ckpt.backbone->config;
  const auto& e = w.model;
  if (m.layers != e.layers || m.vision_width != e.vision_width || m.text_width != e.text_width ||
      m.embed_dim != e.embed_dim || m.image_size != e.image_size || m.patch_size != e.patch_size ||
      m.context_length != e.context_length || m.vision_heads != e.vision_heads || m.text_heads != e.text_heads ||
      m.mlp_ratio != e.mlp_ratio) {
    throw ConfigError("config key 'backbone': checkpoint architecture differs from the model keys");
  }
  if (m.vocab_size != e.vocab_size) {
    throw ConfigError("config key 'backbone': checkpoint vocabulary has " + std::to_string(m.vocab_size) +
                      " words, the class keys give " + std::to_string(e.vocab_size));
  }
  return std::move(*ckpt.backbone);
}

// The configured bank, or a variant-none bank when no prompt checkpoint is set.
prompts::PromptBank<float> load_prompts(const RunConfig& cfg, const model::BackboneParams<float>& bb) {
  if (cfg.prompts.empty()) {
    prompts::PromptConfig none;
    none.variant = prompts::Variant::none;
    none.depth = 1;
    none.length = 1;
    return prompts::PromptBank<float>::zeros(none, bb.config);
  }
  auto ckpt = train::load_checkpoint(cfg.prompts);
  if (!ckpt.prompts) throw FormatError(cfg.prompts + ": checkpoint holds no prompts");
  try {
    ckpt.prompts->config.validate(bb.config);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config key 'prompts': ") + e.what());
  }
  if (ckpt.prompts->text_width != bb.config.text_width || ckpt.prompts->vision_width != bb.config.vision_width) {
    throw ConfigError("config key 'prompts': prompt widths do not match the backbone");
  }
  return std::move(*ckpt.prompts);
}

struct JsonLog {
  std::string text;
  std::size_t steps = 0;
  train::LogFn fn() {
    return [this](const train::StepLog& s) {
      nlohmann::ordered_json j{{"step", s.step}, {"epoch", s.epoch}, {"loss", s.loss}, {"lr", s.lr}};
      text += j.dump() + "\n";
      ++steps;
    };
  }
};

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void print_record(std::ostream& s, const eval::MetricsRecord& r) {
  s << r.label << ": base " << pct(r.base_acc);
  if (r.novel_acc) s << "  novel " << pct(*r.novel_acc);
  if (r.hm) s << "  hm " << pct(*r.hm);
  s << "\n";
}

}  // namespace

void cmd_gen_data(const RunConfig& cfg, const RunDir& out, std::ostream& summary) {
  const auto w = world(cfg);
  write_config(cfg, out);
  auto all = w.primary;
  all.insert(all.end(), w.secondary.begin(), w.secondary.end());
  const auto pre = data::make_dataset(all, w.vocab, cfg.pretrain_samples_per_class, cfg.pretrain_data_seed,
                                      data::RenderStyle::pretraining());
  const auto bench = benchmark(cfg, w);
  const auto second = data::make_dataset(w.secondary, w.vocab, cfg.samples_per_class, cfg.data_seed,
                                         data::RenderStyle::benchmark());
  out.write("pretrain.mpds", data::serialize_dataset(pre));
  out.write("benchmark.mpds", data::serialize_dataset(bench));
  out.write("secondary.mpds", data::serialize_dataset(second));
  summary << "pretrain.mpds: " << pre.samples.size() << " samples, benchmark.mpds: " << bench.samples.size()
          << ", secondary.mpds: " << second.samples.size() << " (vocabulary " << w.vocab.size() << " words)\n";
}

void cmd_pretrain(const RunConfig& cfg, const RunDir& out, std::ostream& summary) {
  const auto w = world(cfg);
  write_config(cfg, out);
  auto all = w.primary;
  all.insert(all.end(), w.secondary.begin(), w.secondary.end());
  const auto corpus = data::make_dataset(all, w.vocab, cfg.pretrain_samples_per_class, cfg.pretrain_data_seed,
                                         data::RenderStyle::pretraining());
  JsonLog log;
  auto result = train::pretrain(w.model, corpus, cfg.pretrain, log.fn());

  std::string metrics;
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    metrics += nlohmann::ordered_json{{"epoch", e}, {"loss", result.epoch_loss[e]}}.dump() + "\n";
  }
  // Zero-shot accuracy over every benchmark class, as a sanity line.
  const auto bench = benchmark(cfg, w);
  prompts::PromptConfig none;
  none.variant = prompts::Variant::none;
  none.depth = none.length = 1;
  eval::PromptedPredictor zs(result.params, prompts::PromptBank<float>::zeros(none, w.model), w.vocab);
  std::vector<std::size_t> all_idx(bench.samples.size());
  std::iota(all_idx.begin(), all_idx.end(), std::size_t{0});
  std::vector<std::uint32_t> ids;
  for (const auto& c : bench.classes) ids.push_back(c.id);
  const auto arm = eval::evaluate_arm(zs, bench, all_idx, ids);
  metrics += nlohmann::ordered_json{{"zero_shot_acc", arm.accuracy}}.dump() + "\n";

  train::Checkpoint ckpt;
  ckpt.backbone = std::move(result.params);
  ckpt.config_echo = cfg.serialize();
  ckpt.step = log.steps;
  out.write("backbone.ckpt", train::serialize_checkpoint(ckpt));
  out.write("metrics.jsonl", metrics);
  out.write("log.jsonl", log.text);
  summary << "pretrained " << log.steps << " steps, final epoch loss " << result.epoch_loss.back()
          << ", zero-shot accuracy " << pct(arm.accuracy) << "% over " << ids.size() << " classes\n";
}

void cmd_tune(const RunConfig& cfg, const RunDir& out, std::ostream& summary) {
  const auto w = world(cfg);
  const auto bb = load_backbone(cfg, w);
  write_config(cfg, out);
  const auto bench = benchmark(cfg, w);
  JsonLog log;
  std::vector<std::string> warnings;
  auto point = eval::run_base_to_novel(bb, bench, w.vocab, cfg.prompt_config(), cfg.bench_config(), cfg.seed,
                                       log.fn(), &warnings);
  train::Checkpoint ckpt;
  ckpt.prompts = point.bank;
  ckpt.config_echo = cfg.serialize();
  ckpt.step = log.steps;
  out.write("prompts.ckpt", train::serialize_checkpoint(ckpt));
  out.write("metrics.jsonl", point.metrics.to_json() + "\n");
  out.write("log.jsonl", log.text);
  for (const auto& m : warnings) std::fprintf(stderr, "warning: %s\n", m.c_str());
  print_record(summary, point.metrics);
}

void cmd_eval(const RunConfig& cfg, const RunDir& out, std::ostream& summary) {
  const auto w = world(cfg);
  const auto bb = load_backbone(cfg, w);
  const auto bank = load_prompts(cfg, bb);
  write_config(cfg, out);
  const auto bench = benchmark(cfg, w);
  const auto second = data::make_dataset(w.secondary, w.vocab, cfg.samples_per_class, cfg.data_seed,
                                         data::RenderStyle::benchmark());
  eval::PromptedPredictor predictor(bb, bank, w.vocab);
  std::string metrics;

  const auto spec = data::default_split(bench, cfg.base_classes, cfg.shots, cfg.seed);
  const auto sp = data::split(bench, spec);
  auto b2n = eval::base_to_novel_eval(predictor, bench, spec, sp);
  b2n.label = "base_to_novel";
  metrics += b2n.to_json() + "\n";
  print_record(summary, b2n);

  // Cross-dataset: the tuned prompts applied to every class of each set.
  auto cross = eval::cross_dataset_eval(predictor, {{"primary", &bench, {}, {}}, {"secondary", &second, {}, {}}});
  for (auto& r : cross.targets) {
    r.label = "cross/" + r.label;
    metrics += r.to_json() + "\n";
    print_record(summary, r);
  }
  metrics += nlohmann::ordered_json{{"label", "cross/average"}, {"base_acc", cross.average}}.dump() + "\n";

  // Domain generalization over the base classes' test samples.
  for (auto& r : eval::domain_gen_eval(predictor, bench, sp.base_test, spec.base, cfg.shifts, cfg.seed)) {
    r.label = "shift/" + r.label;
    metrics += r.to_json() + "\n";
    print_record(summary, r);
  }
  out.write("metrics.jsonl", metrics);
}

void cmd_sweep(const RunConfig& cfg, const RunDir& out, std::ostream& summary) {
  const auto w = world(cfg);
  const auto bb = load_backbone(cfg, w);
  write_config(cfg, out);
  const auto bench = benchmark(cfg, w);
  const auto rows =
      eval::sweep(cfg.sweep_axis, cfg.prompt_config(), bb, bench, w.vocab, cfg.bench_config(), cfg.seeds);
  std::string metrics;
  for (const auto& row : rows) {
    for (const auto& r : row.per_seed) metrics += r.to_json() + "\n";
    metrics += row.mean.to_json() + "\n";
    print_record(summary, row.mean);
  }
  out.write("metrics.jsonl", metrics);
  out.write("sweep.csv", eval::sweep_csv(rows));
}

void cmd_export_embeddings(const RunConfig& cfg, const RunDir& out, std::ostream& summary) {
  const auto w = world(cfg);
  const auto bb = load_backbone(cfg, w);
  const auto bank = load_prompts(cfg, bb);
  write_config(cfg, out);
  const auto bench = benchmark(cfg, w);
  eval::PromptedPredictor predictor(bb, bank, w.vocab);
  std::vector<std::size_t> idx(bench.samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto table = eval::export_embeddings(predictor, bench, idx, cfg.export_pca);
  out.write("embeddings.csv", eval::embeddings_csv(table));
  summary << "exported " << idx.size() << " embeddings, separability "
          << eval::separability(table.values, table.class_ids) << "\n";
}

void cmd_gradcheck(const std::string& size, std::uint64_t seed, const std::optional<RunDir>& out,
                   std::ostream& summary) {
  const auto model = eval::gradcheck_model(size);
  prompts::PromptConfig pc;
  pc.variant = prompts::Variant::maple;
  pc.depth = 2;
  pc.length = 1;
  const auto r = eval::prompt_gradcheck(model, pc, seed);
  constexpr double kTol64 = 1e-6, kTol32 = 1e-3;
  summary << std::setprecision(3) << "gradcheck " << size << ": " << r.scalars << " trainable scalars\n"
          << "  64-bit max rel err " << r.exact64.max_rel_error << " (threshold " << kTol64 << ")\n"
          << "  32-bit max rel err " << r.mixed32.max_rel_error << " (threshold " << kTol32 << ")\n";
  if (out) {
    out->write("metrics.jsonl", nlohmann::ordered_json{{"size", size},
                                                       {"seed", seed},
                                                       {"scalars", r.scalars},
                                                       {"max_rel_error_64", r.exact64.max_rel_error},
                                                       {"max_rel_error_32", r.mixed32.max_rel_error}}
                                        .dump() +
                                    "\n");
  }
  if (!(r.exact64.max_rel_error <= kTol64) || !(r.mixed32.max_rel_error <= kTol32)) {
    throw InvariantViolation("gradient check above threshold");
  }
}

void cmd_flops(const RunConfig& cfg, const std::string& preset, const std::optional<RunDir>& out,
               std::ostream& summary) {
  model::ModelConfig m;
  prompts::PromptConfig pc;
  if (preset == "clip-b16") {
    m = model::ModelConfig::clip_b16();
    pc = prompts::PromptConfig::preset(cfg.variant, m.layers);
  } else if (preset == "config") {
    m = world(cfg).model;
    pc = cfg.prompt_config();
  } else {
    throw ConfigError("--preset: unknown preset '" + preset + "' (clip-b16, config)");
  }
  pc.validate(m);
  auto ref_cfg = prompts::PromptConfig::preset(prompts::Variant::text_shallow, m.layers);
  ref_cfg.length = pc.variant == prompts::Variant::none ? ref_cfg.length : pc.length;
  const auto report = eval::flop_count(m, pc, cfg.flop_classes);
  const auto ref = eval::flop_count(m, ref_cfg, cfg.flop_classes);
  const double overhead = eval::overhead_percent(report, ref);

  summary << "variant " << prompts::to_string(pc.variant) << " (J=" << pc.depth << ", b=" << pc.length
          << ", C=" << cfg.flop_classes << ")\n";
  for (const auto& [name, macs] : report.breakdown) summary << "  " << name << ": " << 2 * macs << " FLOPs\n";
  summary << std::fixed << std::setprecision(4) << "  total " << std::setprecision(3)
          << double(report.flops()) / 1e9 << " GFLOPs, overhead vs text_shallow (b=" << ref_cfg.length
          << "): " << std::setprecision(4) << overhead << "%\n";
  if (out) {
    out->write("config.cfg", cfg.serialize());
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(report.to_json());
    j["variant"] = std::string(prompts::to_string(pc.variant));
    j["reference_flops"] = ref.flops();
    j["overhead_percent"] = overhead;
    out->write("metrics.jsonl", j.dump() + "\n");
  }
}

}  // namespace maple::cli
