// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/cli/run_config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "maple/error.hpp"

namespace maple::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t to_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != end) throw ConfigError("expected a non-negative integer");
  return v;
}

double to_double(std::string_view s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != end) throw ConfigError("expected a number");
  return v;
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

bool to_bool(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("expected true or false");
}

struct Key {
  KeyInfo info;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

Key size_key(std::string_view name, std::string_view unit, std::string_view help, std::size_t RunConfig::*field) {
  return {{name, unit, help},
          [field](const RunConfig& c) { return std::to_string(c.*field); },
          [field](RunConfig& c, std::string_view v) { c.*field = to_u64(v); }};
}

Key model_key(std::string_view name, std::string_view unit, std::string_view help,
              std::size_t model::ModelConfig::*field) {
  return {{name, unit, help},
          [field](const RunConfig& c) { return std::to_string(c.model.*field); },
          [field](RunConfig& c, std::string_view v) { c.model.*field = to_u64(v); }};
}

Key auto_key(std::string_view name, std::string_view unit, std::string_view help,
             std::optional<std::size_t> RunConfig::*field) {
  return {{name, unit, help},
          [field](const RunConfig& c) { return (c.*field) ? std::to_string(*(c.*field)) : std::string("auto"); },
          [field](RunConfig& c, std::string_view v) {
            if (v == "auto") c.*field = std::nullopt;
            else c.*field = to_u64(v);
          }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    // model
    k.push_back(model_key("layers", "blocks", "transformer depth K of both encoders", &model::ModelConfig::layers));
    k.push_back(model_key("vision_width", "dims", "vision width d_v", &model::ModelConfig::vision_width));
    k.push_back(model_key("text_width", "dims", "text width d_l", &model::ModelConfig::text_width));
    k.push_back(model_key("embed_dim", "dims", "joint embedding width d_vl", &model::ModelConfig::embed_dim));
    k.push_back(model_key("image_size", "pixels", "image side; the renderer draws 32", &model::ModelConfig::image_size));
    k.push_back(model_key("patch_size", "pixels", "patch side", &model::ModelConfig::patch_size));
    k.push_back(model_key("context_length", "tokens", "text context N", &model::ModelConfig::context_length));
    k.push_back(model_key("vision_heads", "heads", "attention heads, vision", &model::ModelConfig::vision_heads));
    k.push_back(model_key("text_heads", "heads", "attention heads, text", &model::ModelConfig::text_heads));
    k.push_back(model_key("mlp_ratio", "x width", "MLP hidden width over model width", &model::ModelConfig::mlp_ratio));
    // prompts
    k.push_back({{"variant", "name", "none, text_shallow, text_deep, vision_deep, independent_vl, maple, maple_progressive"},
                 [](const RunConfig& c) { return std::string(prompts::to_string(c.variant)); },
                 [](RunConfig& c, std::string_view v) { c.variant = prompts::parse_variant(v); }});
    k.push_back(auto_key("depth", "blocks", "prompt depth J; auto takes the variant preset", &RunConfig::depth));
    k.push_back(auto_key("length", "tokens", "prompt length b per set; auto takes the variant preset", &RunConfig::length));
    k.push_back({{"init_mode", "name", "template_first_layer, template_all_layers, random_all"},
                 [](const RunConfig& c) { return std::string(prompts::to_string(c.init_mode)); },
                 [](RunConfig& c, std::string_view v) { c.init_mode = prompts::parse_init_mode(v); }});
    k.push_back({{"direction", "name", "coupling direction: lang_to_vision or vision_to_lang"},
                 [](const RunConfig& c) { return std::string(prompts::to_string(c.direction)); },
                 [](RunConfig& c, std::string_view v) { c.direction = prompts::parse_direction(v); }});
    k.push_back(size_key("template_offset", "words", "first template word copied into the initial prompts",
                         &RunConfig::template_offset));
    // tuning
    k.push_back({{"epochs", "epochs", "prompt tuning epochs"},
                 [](const RunConfig& c) { return std::to_string(c.tune.epochs); },
                 [](RunConfig& c, std::string_view v) { c.tune.epochs = to_u64(v); }});
    k.push_back({{"batch_size", "samples", "prompt tuning batch size"},
                 [](const RunConfig& c) { return std::to_string(c.tune.batch_size); },
                 [](RunConfig& c, std::string_view v) { c.tune.batch_size = to_u64(v); }});
    k.push_back({{"learning_rate", "1/step", "prompt tuning SGD step size"},
                 [](const RunConfig& c) { return fmt(c.tune.learning_rate); },
                 [](RunConfig& c, std::string_view v) { c.tune.learning_rate = to_double(v); }});
    k.push_back({{"momentum", "-", "prompt tuning SGD momentum"},
                 [](const RunConfig& c) { return fmt(c.tune.momentum); },
                 [](RunConfig& c, std::string_view v) { c.tune.momentum = to_double(v); }});
    // data and split
    k.push_back(size_key("classes", "classes", "benchmark classes (primary set, at most 24)", &RunConfig::classes));
    k.push_back(size_key("base_classes", "classes", "base classes; the rest are novel", &RunConfig::base_classes));
    k.push_back(size_key("shots", "samples", "training samples per base class", &RunConfig::shots));
    k.push_back(size_key("samples_per_class", "samples", "benchmark samples per class", &RunConfig::samples_per_class));
    k.push_back({{"data_seed", "-", "benchmark render seed"},
                 [](const RunConfig& c) { return std::to_string(c.data_seed); },
                 [](RunConfig& c, std::string_view v) { c.data_seed = to_u64(v); }});
    k.push_back(size_key("secondary_classes", "classes",
                         "secondary set size, used in pretraining and as the cross-dataset target",
                         &RunConfig::secondary_classes));
    // pretraining
    k.push_back({{"pretrain_epochs", "epochs", "contrastive pretraining epochs"},
                 [](const RunConfig& c) { return std::to_string(c.pretrain.epochs); },
                 [](RunConfig& c, std::string_view v) { c.pretrain.epochs = to_u64(v); }});
    k.push_back({{"pretrain_batch_size", "pairs", "pretraining batch, distinct classes per batch"},
                 [](const RunConfig& c) { return std::to_string(c.pretrain.batch_size); },
                 [](RunConfig& c, std::string_view v) { c.pretrain.batch_size = to_u64(v); }});
    k.push_back({{"pretrain_learning_rate", "1/step", "Adam step size"},
                 [](const RunConfig& c) { return fmt(c.pretrain.learning_rate); },
                 [](RunConfig& c, std::string_view v) { c.pretrain.learning_rate = to_double(v); }});
    k.push_back({{"pretrain_tau", "-", "contrastive temperature during pretraining"},
                 [](const RunConfig& c) { return fmt(c.pretrain.train_tau); },
                 [](RunConfig& c, std::string_view v) { c.pretrain.train_tau = to_double(v); }});
    k.push_back({{"final_tau", "-", "temperature stored in the backbone and frozen afterwards"},
                 [](const RunConfig& c) { return fmt(c.pretrain.final_tau); },
                 [](RunConfig& c, std::string_view v) { c.pretrain.final_tau = to_double(v); }});
    k.push_back({{"pretrain_drop_template", "bool", "drop a random number of leading template words per caption"},
                 [](const RunConfig& c) { return std::string(c.pretrain.drop_template ? "true" : "false"); },
                 [](RunConfig& c, std::string_view v) { c.pretrain.drop_template = to_bool(v); }});
    k.push_back(size_key("pretrain_samples_per_class", "samples", "pretraining corpus samples per class",
                         &RunConfig::pretrain_samples_per_class));
    k.push_back({{"pretrain_data_seed", "-", "pretraining corpus render seed"},
                 [](const RunConfig& c) { return std::to_string(c.pretrain_data_seed); },
                 [](RunConfig& c, std::string_view v) { c.pretrain_data_seed = to_u64(v); }});
    k.push_back({{"pretrain_seed", "-", "weight init and batch order seed for pretraining"},
                 [](const RunConfig& c) { return std::to_string(c.pretrain.seed); },
                 [](RunConfig& c, std::string_view v) { c.pretrain.seed = to_u64(v); }});
    // runs
    k.push_back({{"seed", "-", "run seed: few-shot draw, prompt init, batch order (--seed overrides)"},
                 [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, std::string_view v) { c.seed = to_u64(v); }});
    k.push_back({{"seeds", "list", "seeds for sweep, comma separated"},
                 [](const RunConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.seeds.size(); ++i) s += (i ? "," : "") + std::to_string(c.seeds[i]);
                   return s;
                 },
                 [](RunConfig& c, std::string_view v) {
                   c.seeds.clear();
                   for (auto item : split_list(v)) c.seeds.push_back(to_u64(item));
                 }});
    k.push_back({{"sweep_axis", "name", "depth, length, init_mode, variant, direction"},
                 [](const RunConfig& c) { return std::string(eval::to_string(c.sweep_axis)); },
                 [](RunConfig& c, std::string_view v) { c.sweep_axis = eval::parse_sweep_axis(v); }});
    k.push_back({{"shifts", "list", "domain shifts for eval as kind:amount, comma separated"},
                 [](const RunConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.shifts.size(); ++i) {
                     if (i) s += ",";
                     switch (c.shifts[i].kind) {
                       case data::ShiftKind::gaussian_noise: s += "gaussian_noise"; break;
                       case data::ShiftKind::hue_rotate: s += "hue_rotate"; break;
                       case data::ShiftKind::sketch: s += "sketch"; break;
                       case data::ShiftKind::blur: s += "blur"; break;
                     }
                     s += ":" + fmt(c.shifts[i].amount);
                   }
                   return s;
                 },
                 [](RunConfig& c, std::string_view v) {
                   std::vector<data::Shift> out;
                   for (auto item : split_list(v)) {
                     const auto colon = item.find(':');
                     if (colon == std::string_view::npos) throw ConfigError("expected kind:amount");
                     data::Shift s{data::parse_shift_kind(trim(item.substr(0, colon))),
                                   to_double(trim(item.substr(colon + 1)))};
                     try {
                       s.validate();
                     } catch (const Error& e) {
                       throw ConfigError(e.what());
                     }
                     out.push_back(s);
                   }
                   c.shifts = std::move(out);
                 }});
    k.push_back(size_key("flop_classes", "classes", "class count C for flop accounting", &RunConfig::flop_classes));
    k.push_back({{"export_pca", "bool", "append two principal coordinates to exported embeddings"},
                 [](const RunConfig& c) { return std::string(c.export_pca ? "true" : "false"); },
                 [](RunConfig& c, std::string_view v) { c.export_pca = to_bool(v); }});
    // paths
    k.push_back({{"backbone", "path", "backbone checkpoint read by tune, eval, sweep, export-embeddings"},
                 [](const RunConfig& c) { return c.backbone; },
                 [](RunConfig& c, std::string_view v) { c.backbone = std::string(v); }});
    k.push_back({{"prompts", "path", "prompt checkpoint read by eval and export-embeddings; empty is zero-shot"},
                 [](const RunConfig& c) { return c.prompts; },
                 [](RunConfig& c, std::string_view v) { c.prompts = std::string(v); }});
    return k;
  }();
  return table;
}

const Key& find(std::string_view name) {
  for (const auto& k : keys())
    if (k.info.name == name) return k;
  throw ConfigError("unknown config key '" + std::string(name) + "'");
}

}  // namespace

RunConfig::RunConfig() {
  pretrain.seed = 1;
  shifts = {{data::ShiftKind::gaussian_noise, 0.1},
            {data::ShiftKind::hue_rotate, 90},
            {data::ShiftKind::sketch, 0.5},
            {data::ShiftKind::blur, 1}};
}

prompts::PromptConfig RunConfig::prompt_config() const {
  auto p = prompts::PromptConfig::preset(variant, model.layers);
  if (depth) p.depth = *depth;
  if (length) p.length = *length;
  p.init = init_mode;
  p.direction = direction;
  p.template_offset = template_offset;
  return p;
}

eval::BenchmarkConfig RunConfig::bench_config() const {
  eval::BenchmarkConfig b;
  b.base_count = base_classes;
  b.shots = shots;
  b.tune = tune;
  b.tune.seed = seed;
  return b;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto& k = find(key);
  try {
    k.set(*this, trim(value));
  } catch (const ConfigError& e) {
    throw ConfigError("config key '" + std::string(key) + "': " + e.what() + " (got '" + std::string(value) + "')");
  }
}

std::string RunConfig::get(std::string_view key) const { return find(key).get(*this); }

void RunConfig::merge(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value, got '" +
                        std::string(line) + "'");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  c.merge(text);
  return c;
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.info.name) + " = " + k.get(*this) + "\n";
  return out;
}

void RunConfig::validate() const {
  auto fail = [](std::string_view key, const std::string& why) {
    throw ConfigError("config key '" + std::string(key) + "': " + why);
  };
  if (classes < 2 || classes > 24) fail("classes", "must be in [2, 24]");
  if (secondary_classes < 2) fail("secondary_classes", "must be at least 2");
  auto m = model;
  m.vocab_size = data::Vocabulary::build({data::primary_classes(classes), data::secondary_classes(secondary_classes)})
                     .size();
  try {
    m.validate();
  } catch (const ConfigError& e) {
    fail("layers/widths", e.what());
  }
  if (m.image_size != data::kImageSize) fail("image_size", "the renderer draws 32-pixel images");
  try {
    prompt_config().validate(m);
  } catch (const ConfigError& e) {
    fail(depth || length ? "depth/length" : "variant", e.what());
  }
  try {
    tune.validate();
  } catch (const ConfigError& e) {
    fail("epochs/batch_size/learning_rate/momentum", e.what());
  }
  if (base_classes < 1 || base_classes >= classes) fail("base_classes", "must be in [1, classes)");
  if (shots < 1) fail("shots", "must be at least 1");
  if (samples_per_class <= shots) fail("samples_per_class", "must exceed shots so base classes have test samples");
  if (pretrain.epochs < 1) fail("pretrain_epochs", "must be at least 1");
  if (pretrain.batch_size < 2) fail("pretrain_batch_size", "must be at least 2");
  if (!(pretrain.learning_rate > 0)) fail("pretrain_learning_rate", "must be positive");
  if (!(pretrain.train_tau > 0)) fail("pretrain_tau", "must be positive");
  if (!(pretrain.final_tau > 0)) fail("final_tau", "must be positive");
  if (pretrain_samples_per_class < 1) fail("pretrain_samples_per_class", "must be at least 1");
  if (seeds.empty()) fail("seeds", "needs at least one seed");
  if (flop_classes < 1) fail("flop_classes", "must be at least 1");
}

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> infos = [] {
    std::vector<KeyInfo> v;
    for (const auto& k : keys()) v.push_back(k.info);
    return v;
  }();
  return infos;
}

std::string key_help() {
  const RunConfig defaults;
  std::ostringstream s;
  s << "Config keys (key = default [unit]: description):\n";
  for (const auto& k : keys()) {
    s << "  " << k.info.name << " = " << k.get(defaults) << " [" << k.info.unit << "]: " << k.info.help << "\n";
  }
  return s.str();
}

}  // namespace maple::cli
