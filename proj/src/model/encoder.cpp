// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/model/encoder.hpp"

#include <cmath>

namespace maple::model {
namespace {

template <typename T>
void check_schedule(const PromptSchedule<T>* prompts, std::size_t layers) {
  if (prompts && prompts->depth() > layers) {
    throw ConfigError("prompt depth " + std::to_string(prompts->depth()) + " exceeds layer count " +
                      std::to_string(layers));
  }
}

}  // namespace

template <typename T>
std::vector<Var<T>*> BoundBackbone<T>::slots() {
  vision_blocks.resize(params_->vision_blocks.size());
  text_blocks.resize(params_->text_blocks.size());
  std::vector<Var<T>*> out{&patch_proj, &class_token, &vision_pos};
  auto block = [&out](BoundBlock<T>& b) {
    for (auto* v : {&b.ln1_gain, &b.ln1_bias, &b.wq, &b.bq, &b.wk, &b.bk, &b.wv, &b.bv, &b.wo, &b.bo, &b.ln2_gain,
                    &b.ln2_bias, &b.w1, &b.b1, &b.w2, &b.b2})
      out.push_back(v);
  };
  for (auto& b : vision_blocks) block(b);
  for (auto* v : {&vision_ln_gain, &vision_ln_bias, &image_proj, &token_embedding, &text_pos}) out.push_back(v);
  for (auto& b : text_blocks) block(b);
  for (auto* v : {&text_ln_gain, &text_ln_bias, &text_proj}) out.push_back(v);
  out.push_back(nullptr);  // temperature
  return out;
}

template <typename T>
std::vector<Var<T>> BoundBackbone<T>::leaves() const {
  std::vector<Var<T>> out;
  for (auto* slot : const_cast<BoundBackbone*>(this)->slots())
    if (slot) out.push_back(*slot);
  return out;
}

template <typename T>
BoundBackbone<T>::BoundBackbone(Graph<T>& g, const BackboneParams<T>& p, bool rg) : graph_(&g), params_(&p) {
  auto targets = slots();
  std::size_t i = 0;
  p.visit([&](const std::string&, const Tensor<T>& t) {
    if (auto* slot = targets[i++]) *slot = g.leaf(t, rg);
  });
}

template <typename T>
BoundBackbone<T>::BoundBackbone(Graph<T>& g, const BackboneParams<T>& p, const std::vector<Var<T>>& vars)
    : graph_(&g), params_(&p) {
  auto targets = slots();
  if (vars.size() != targets.size()) {
    throw ContractError("expected " + std::to_string(targets.size()) + " backbone vars, got " +
                        std::to_string(vars.size()));
  }
  std::size_t i = 0;
  p.visit([&](const std::string& name, const Tensor<T>& t) {
    if (auto* slot = targets[i]) {
      if (vars[i].value().shape() != t.shape()) throw DimensionError("backbone var shape mismatch for " + name);
      *slot = vars[i];
    }
    ++i;
  });
}

template <typename T>
Var<T> transformer_block(const BoundBlock<T>& b, Var<T> x, std::size_t heads, bool causal) {
  using namespace diff;
  auto h = layernorm(x, b.ln1_gain, b.ln1_bias);
  auto q = add_row(matmul(h, b.wq), b.bq);
  auto k = add_row(matmul(h, b.wk), b.bk);
  auto v = add_row(matmul(h, b.wv), b.bv);
  auto a = attention(q, k, v, heads, causal);
  x = add(x, add_row(matmul(a, b.wo), b.bo));
  auto m = gelu(add_row(matmul(layernorm(x, b.ln2_gain, b.ln2_bias), b.w1), b.b1));
  return add(x, add_row(matmul(m, b.w2), b.b2));
}

template <typename T>
Tensor<T> patchify(const Tensor<T>& image, std::size_t patch) {
  if (image.rank() != 3 || image.shape()[2] != 3 || image.shape()[0] % patch != 0 ||
      image.shape()[1] % patch != 0) {
    throw DimensionError("cannot split image " + diff::shape_string(image.shape()) + " into " +
                         std::to_string(patch) + "-pixel patches");
  }
  const std::size_t h = image.shape()[0], w = image.shape()[1];
  const std::size_t ph = h / patch, pw = w / patch;
  Tensor<T> out({ph * pw, patch * patch * 3});
  for (std::size_t py = 0; py < ph; ++py)
    for (std::size_t px = 0; px < pw; ++px) {
      T* row = out.data().data() + (py * pw + px) * patch * patch * 3;
      for (std::size_t y = 0; y < patch; ++y)
        for (std::size_t x = 0; x < patch; ++x)
          for (std::size_t c = 0; c < 3; ++c)
            *row++ = image[((py * patch + y) * w + (px * patch + x)) * 3 + c];
    }
  return out;
}

template <typename T>
Var<T> encode_image(const BoundBackbone<T>& bb, const Tensor<T>& image, const PromptSchedule<T>* prompts,
                    EncodeTrace* trace) {
  using namespace diff;
  const auto& cfg = bb.config();
  if (image.shape() != Shape{cfg.image_size, cfg.image_size, 3}) {
    throw DimensionError("image shape " + shape_string(image.shape()) + " does not match config [" +
                         std::to_string(cfg.image_size) + "x" + std::to_string(cfg.image_size) + "x3]");
  }
  check_schedule(prompts, cfg.layers);
  Graph<T>& g = bb.graph();
  auto patches = matmul(g.constant(patchify(image, cfg.patch_size)), bb.patch_proj);
  auto x = add(concat_rows<T>({bb.class_token, patches}), bb.vision_pos);
  const std::size_t main_tokens = cfg.num_patches() + 1;
  const std::size_t depth = prompts ? prompts->depth() : 0;
  for (std::size_t i = 0; i < cfg.layers; ++i) {
    if (i < depth) {
      // Prompt outputs of the previous block are replaced by fresh prompts.
      if (i > 0) x = slice_rows(x, 0, main_tokens);
      x = concat_rows<T>({x, prompts->layers[i]});
    }
    if (trace) trace->tokens_per_block.push_back(x.value().rows());
    x = transformer_block(bb.vision_blocks[i], x, cfg.vision_heads, false);
  }
  auto cls = layernorm(slice_rows(x, 0, 1), bb.vision_ln_gain, bb.vision_ln_bias);
  return l2_normalize(matmul(cls, bb.image_proj));
}

template <typename T>
Var<T> encode_text(const BoundBackbone<T>& bb, std::span<const std::uint32_t> tokens,
                   const PromptSchedule<T>* prompts, EncodeTrace* trace) {
  using namespace diff;
  const auto& cfg = bb.config();
  const std::size_t n = cfg.context_length;
  if (tokens.empty() || tokens.size() > n) {
    throw DimensionError("token sequence of length " + std::to_string(tokens.size()) +
                         " does not fit context length " + std::to_string(n));
  }
  std::vector<std::uint32_t> padded(n, kPadToken);
  std::size_t readout = n;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= cfg.vocab_size) {
      throw VocabularyError("token id " + std::to_string(tokens[i]) + " outside vocabulary of " +
                            std::to_string(cfg.vocab_size));
    }
    padded[i] = tokens[i];
    if (tokens[i] != kPadToken) readout = i;
  }
  if (readout == n) throw ContractError("token sequence holds only padding");
  check_schedule(prompts, cfg.layers);

  auto x = add(embedding(bb.token_embedding, std::span<const std::uint32_t>(padded)), bb.text_pos);
  const std::size_t depth = prompts ? prompts->depth() : 0;
  const std::size_t b = prompts ? prompts->length() : 0;
  for (std::size_t i = 0; i < cfg.layers; ++i) {
    if (i < depth) {
      auto words = i == 0 ? x : slice_rows(x, b, b + n);
      x = concat_rows<T>({prompts->layers[i], words});
    }
    if (trace) trace->tokens_per_block.push_back(x.value().rows());
    x = transformer_block(bb.text_blocks[i], x, cfg.text_heads, true);
  }
  auto w = layernorm(slice_rows(x, b + readout, b + readout + 1), bb.text_ln_gain, bb.text_ln_bias);
  return l2_normalize(matmul(w, bb.text_proj));
}

template <typename T>
Var<T> zero_shot_probs(Var<T> x, Var<T> classes, T tau) {
  if (!(tau > T(0))) throw ParameterError("temperature must be positive");
  return diff::softmax(diff::matmul(x, diff::transpose(classes)), tau);
}

template <typename T>
Var<T> similarity_logits(Var<T> images, Var<T> classes, T tau) {
  if (!(tau > T(0))) throw ParameterError("temperature must be positive");
  return diff::scale(diff::matmul(images, diff::transpose(classes)), T(1) / tau);
}

template <typename T>
Tensor<T> zero_shot_logits(const Tensor<T>& image_embedding, const Tensor<T>& class_embeddings, T tau) {
  if (!(tau > T(0))) throw ParameterError("temperature must be positive");
  auto x = image_embedding.rank() == 1 ? image_embedding.reshaped({1, image_embedding.size()}) : image_embedding;
  auto check_unit = [](const Tensor<T>& m) {
    const std::size_t d = m.cols();
    for (std::size_t r = 0; r < m.size() / d; ++r) {
      double s = 0;
      for (std::size_t j = 0; j < d; ++j) s += double(m[r * d + j]) * double(m[r * d + j]);
      if (std::abs(std::sqrt(s) - 1.0) > 1e-3) throw ContractError("zero-shot inputs must be unit norm");
    }
  };
  check_unit(x);
  check_unit(class_embeddings);
  Graph<T> g;
  auto p = zero_shot_probs(g.constant(std::move(x)), g.constant(class_embeddings), tau);
  return p.value().reshaped({p.value().size()});
}

template <typename T>
Var<T> contrastive_loss(Var<T> images, Var<T> texts, T tau) {
  using namespace diff;
  if (!(tau > T(0))) throw ParameterError("temperature must be positive");
  if (images.value().shape() != texts.value().shape()) {
    throw DimensionError("contrastive batch shapes differ: " + shape_string(images.value().shape()) +
                         " vs " + shape_string(texts.value().shape()));
  }
  const std::size_t batch = images.value().rows();
  if (images.value().rank() != 2 || batch < 2) {
    throw ContractError("contrastive loss needs a batch of at least 2 pairs");
  }
  std::vector<std::uint32_t> diag(batch);
  for (std::size_t i = 0; i < batch; ++i) diag[i] = static_cast<std::uint32_t>(i);
  auto logits = similarity_logits(images, texts, tau);
  auto i2t = cross_entropy(logits, std::span<const std::uint32_t>(diag));
  auto t2i = cross_entropy(transpose(logits), std::span<const std::uint32_t>(diag));
  return scale(add(i2t, t2i), T(0.5));
}

#define MAPLE_INSTANTIATE_ENCODER(T)                                                                  \
  template class BoundBackbone<T>;                                                                    \
  template Var<T> transformer_block(const BoundBlock<T>&, Var<T>, std::size_t, bool);                 \
  template Tensor<T> patchify(const Tensor<T>&, std::size_t);                                         \
  template Var<T> encode_image(const BoundBackbone<T>&, const Tensor<T>&, const PromptSchedule<T>*,   \
                               EncodeTrace*);                                                         \
  template Var<T> encode_text(const BoundBackbone<T>&, std::span<const std::uint32_t>,                \
                              const PromptSchedule<T>*, EncodeTrace*);                                \
  template Var<T> zero_shot_probs(Var<T>, Var<T>, T);                                                 \
  template Var<T> similarity_logits(Var<T>, Var<T>, T);                                               \
  template Tensor<T> zero_shot_logits(const Tensor<T>&, const Tensor<T>&, T);                          \
  template Var<T> contrastive_loss(Var<T>, Var<T>, T);

MAPLE_INSTANTIATE_ENCODER(float)
MAPLE_INSTANTIATE_ENCODER(double)

}  // namespace maple::model
