#pragma once

#include <random>

#include "maple/diffcore/tensor.hpp"

namespace maple::testing {

template <typename T>
diff::Tensor<T> random_tensor(diff::Shape shape, std::mt19937_64& rng, double stddev = 1.0) {
  diff::Tensor<T> t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

}  // namespace maple::testing

#include "maple/model/config.hpp"

namespace maple::testing {

// Small enough for finite differences over every weight.
inline model::ModelConfig tiny_config(std::size_t layers = 2) {
  model::ModelConfig c;
  c.layers = layers;
  c.vision_width = 8;
  c.text_width = 8;
  c.embed_dim = 8;
  c.image_size = 4;
  c.patch_size = 2;
  c.context_length = 4;
  c.vision_heads = 2;
  c.text_heads = 2;
  c.vocab_size = 7;
  c.mlp_ratio = 2;
  return c;
}

template <typename T>
diff::Tensor<T> random_image(std::size_t size, std::mt19937_64& rng) {
  diff::Tensor<T> t({size, size, 3});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : t.data()) v = static_cast<T>(u(rng));
  return t;
}

}  // namespace maple::testing

#include "maple/data/dataset.hpp"
#include "maple/train/train.hpp"

namespace maple::testing {

// A small pretrained backbone on 10 primary classes, built once per process.
struct ToyWorld {
  std::vector<data::ConceptClass> classes;
  data::Vocabulary vocab;
  model::BackboneParams<float> backbone;
  std::vector<double> pretrain_loss;
  data::Dataset bench;  // 24 benchmark-style samples per class
};

inline model::ModelConfig toy_model_config(std::size_t vocab_size) {
  model::ModelConfig c;
  c.layers = 2;
  c.vision_width = 32;
  c.text_width = 32;
  c.embed_dim = 32;
  c.vision_heads = 2;
  c.text_heads = 2;
  c.mlp_ratio = 2;
  c.vocab_size = vocab_size;
  return c;
}

inline const ToyWorld& toy_world() {
  static const ToyWorld world = [] {
    ToyWorld w;
    w.classes = data::primary_classes(10);
    w.vocab = data::Vocabulary::build({w.classes, data::secondary_classes(16)});
    const auto pre = data::make_dataset(w.classes, w.vocab, 24, 5, data::RenderStyle::pretraining());
    train::PretrainConfig pc;
    pc.epochs = 10;
    pc.batch_size = 10;
    pc.learning_rate = 1e-3;
    pc.seed = 3;
    auto r = train::pretrain(toy_model_config(w.vocab.size()), pre, pc);
    w.backbone = std::move(r.params);
    w.pretrain_loss = std::move(r.epoch_loss);
    w.bench = data::make_dataset(w.classes, w.vocab, 24, 6, data::RenderStyle::benchmark());
    return w;
  }();
  return world;
}

}  // namespace maple::testing
