// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/model/backbone.hpp"

#include <cmath>
#include <random>

#include "maple/error.hpp"

namespace maple::model {

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("model config: " + what); };
  if (layers == 0) fail("layers must be at least 1");
  if (vision_width == 0 || text_width == 0 || embed_dim == 0) fail("widths must be positive");
  if (patch_size == 0 || image_size == 0) fail("image_size and patch_size must be positive");
  if (image_size % patch_size != 0) {
    fail("image_size " + std::to_string(image_size) + " not divisible by patch_size " +
         std::to_string(patch_size));
  }
  if (vision_heads == 0 || vision_width % vision_heads != 0) {
    fail("vision_width " + std::to_string(vision_width) + " not divisible by vision_heads " +
         std::to_string(vision_heads));
  }
  if (text_heads == 0 || text_width % text_heads != 0) {
    fail("text_width " + std::to_string(text_width) + " not divisible by text_heads " +
         std::to_string(text_heads));
  }
  if (context_length == 0) fail("context_length must be positive");
  if (vocab_size < 2) fail("vocab_size must cover the pad token and at least one word");
  if (mlp_ratio == 0) fail("mlp_ratio must be positive");
}

ModelConfig ModelConfig::clip_b16() {
  ModelConfig c;
  c.layers = 12;
  c.vision_width = 768;
  c.text_width = 512;
  c.embed_dim = 512;
  c.image_size = 224;
  c.patch_size = 16;
  c.context_length = 77;
  c.vision_heads = 12;
  c.text_heads = 8;
  c.vocab_size = 49408;
  c.mlp_ratio = 4;
  return c;
}

namespace {

template <typename T>
BlockParams<T> allocate_block(std::size_t d, std::size_t ratio) {
  BlockParams<T> b;
  b.ln1_gain = Tensor<T>({d});
  b.ln1_bias = Tensor<T>({d});
  b.wq = Tensor<T>({d, d});
  b.bq = Tensor<T>({d});
  b.wk = Tensor<T>({d, d});
  b.bk = Tensor<T>({d});
  b.wv = Tensor<T>({d, d});
  b.bv = Tensor<T>({d});
  b.wo = Tensor<T>({d, d});
  b.bo = Tensor<T>({d});
  b.ln2_gain = Tensor<T>({d});
  b.ln2_bias = Tensor<T>({d});
  b.w1 = Tensor<T>({d, ratio * d});
  b.b1 = Tensor<T>({ratio * d});
  b.w2 = Tensor<T>({ratio * d, d});
  b.b2 = Tensor<T>({d});
  return b;
}

template <typename T>
BackboneParams<T> allocate(const ModelConfig& c) {
  c.validate();
  BackboneParams<T> p;
  p.config = c;
  p.patch_proj = Tensor<T>({c.patch_dim(), c.vision_width});
  p.class_token = Tensor<T>({1, c.vision_width});
  p.vision_pos = Tensor<T>({c.num_patches() + 1, c.vision_width});
  for (std::size_t i = 0; i < c.layers; ++i) {
    p.vision_blocks.push_back(allocate_block<T>(c.vision_width, c.mlp_ratio));
    p.text_blocks.push_back(allocate_block<T>(c.text_width, c.mlp_ratio));
  }
  p.vision_ln_gain = Tensor<T>({c.vision_width});
  p.vision_ln_bias = Tensor<T>({c.vision_width});
  p.image_proj = Tensor<T>({c.vision_width, c.embed_dim});
  p.token_embedding = Tensor<T>({c.vocab_size, c.text_width});
  p.text_pos = Tensor<T>({c.context_length, c.text_width});
  p.text_ln_gain = Tensor<T>({c.text_width});
  p.text_ln_bias = Tensor<T>({c.text_width});
  p.text_proj = Tensor<T>({c.text_width, c.embed_dim});
  p.temperature = Tensor<T>::scalar(T(1));
  return p;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

template <typename T>
BackboneParams<T> BackboneParams<T>::init(const ModelConfig& config, std::uint64_t seed, T tau) {
  if (!(tau > T(0))) throw ParameterError("temperature must be positive");
  auto p = allocate<T>(config);
  std::mt19937_64 rng(seed);
  const double residual_scale = 1.0 / std::sqrt(2.0 * static_cast<double>(config.layers));
  p.visit([&](const std::string& name, Tensor<T>& t) {
    if (name == "logit_temperature") {
      t[0] = tau;
      return;
    }
    if (ends_with(name, ".gain")) {
      t.fill(T(1));
      return;
    }
    const bool is_bias = ends_with(name, ".bias") || ends_with(name, ".bq") || ends_with(name, ".bk") ||
                         ends_with(name, ".bv") || ends_with(name, ".bo") || ends_with(name, ".b1") ||
                         ends_with(name, ".b2");
    if (is_bias) {
      t.fill(T(0));
      return;
    }
    double stddev = 0.02;
    const bool embedding_like = ends_with(name, ".pos") || ends_with(name, "token_embedding") ||
                                ends_with(name, "class_token");
    if (!embedding_like) {
      stddev = 1.0 / std::sqrt(static_cast<double>(t.shape()[0]));
      if (ends_with(name, ".wo") || ends_with(name, ".w2")) stddev *= residual_scale;
    }
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  });
  return p;
}

template <typename T>
template <typename U>
BackboneParams<U> BackboneParams<T>::cast() const {
  auto out = allocate<U>(config);
  std::vector<Tensor<U>*> targets;
  out.visit([&](const std::string&, Tensor<U>& t) { targets.push_back(&t); });
  std::size_t i = 0;
  visit([&](const std::string&, const Tensor<T>& t) { *targets[i++] = t.template cast<U>(); });
  return out;
}

template <typename T>
std::size_t BackboneParams<T>::scalar_count() const {
  std::size_t n = 0;
  visit([&](const std::string&, const Tensor<T>& t) { n += t.size(); });
  return n;
}

template <typename T>
std::uint64_t fingerprint(const BackboneParams<T>& params) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  params.visit([&](const std::string& name, const Tensor<T>& t) {
    mix(name.data(), name.size());
    for (auto d : t.shape()) {
      const std::uint64_t d64 = d;
      mix(&d64, sizeof d64);
    }
    mix(t.data().data(), t.size() * sizeof(T));
  });
  return h;
}

template struct BackboneParams<float>;
template struct BackboneParams<double>;
template BackboneParams<double> BackboneParams<float>::cast<double>() const;
template BackboneParams<float> BackboneParams<double>::cast<float>() const;
template BackboneParams<float> BackboneParams<float>::cast<float>() const;
template BackboneParams<double> BackboneParams<double>::cast<double>() const;
template std::uint64_t fingerprint(const BackboneParams<float>&);
template std::uint64_t fingerprint(const BackboneParams<double>&);

}  // namespace maple::model
