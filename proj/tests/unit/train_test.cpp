#include <cmath>
#include <random>

#include "doctest.h"
#include "maple/error.hpp"
#include "maple/eval/benchmark.hpp"
#include "maple/train/checkpoint.hpp"
#include "maple/train/optim.hpp"
#include "maple/train/train.hpp"
#include "test_util.hpp"

using namespace maple;
using namespace maple::train;
using maple::testing::toy_world;

namespace {

bool same_params(const model::BackboneParams<float>& a, const model::BackboneParams<float>& b) {
  std::vector<std::vector<float>> va, vb;
  a.visit([&](const std::string&, const diff::Tensor<float>& t) { va.emplace_back(t.data().begin(), t.data().end()); });
  b.visit([&](const std::string&, const diff::Tensor<float>& t) { vb.emplace_back(t.data().begin(), t.data().end()); });
  return va == vb;
}

prompts::PromptBank<float> toy_bank(prompts::Variant v, std::uint64_t seed) {
  const auto& w = toy_world();
  auto cfg = prompts::PromptConfig::preset(v, w.backbone.config.layers);
  const auto t = w.vocab.template_ids();
  return prompts::init_prompts(cfg, w.backbone.config, w.backbone.token_embedding,
                               std::span<const std::uint32_t>(t), seed);
}

struct ToyTask {
  data::SplitSpec spec;
  data::Split split;
};

ToyTask toy_task(std::uint64_t seed, std::size_t shots = 4) {
  const auto& w = toy_world();
  auto spec = data::default_split(w.bench, 6, shots, seed);
  return {spec, data::split(w.bench, spec)};
}

}  // namespace

TEST_CASE("sgd_step basic cases") {
  std::vector<double> p{1.0, -2.0, 0.5}, v(3, 0.0);
  const std::vector<double> zero(3, 0.0);
  auto before = p;
  sgd_step(std::span<double>(p), std::span<const double>(zero), 0.1, 0.9, std::span<double>(v));
  CHECK(p == before);

  const std::vector<double> g{0.3, -0.7, 2.0};
  std::vector<double> v0(3, 0.0);
  sgd_step(std::span<double>(p), std::span<const double>(g), 0.05, 0.0, std::span<double>(v0));
  for (std::size_t i = 0; i < 3; ++i) CHECK(p[i] == before[i] - 0.05 * g[i]);
}

TEST_CASE("sgd_step two steps against the closed-form recursion") {
  // v1 = g1, v2 = mu*g1 + g2, so p2 = p0 - lr*((1 + mu)*g1 + g2).
  const double lr = 0.0035, mu = 0.9;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> p0(16), g1(16), g2(16);
  for (std::size_t i = 0; i < 16; ++i) {
    p0[i] = n(rng);
    g1[i] = n(rng);
    g2[i] = n(rng);
  }
  auto p = p0;
  std::vector<double> v(16, 0.0);
  sgd_step(std::span<double>(p), std::span<const double>(g1), lr, mu, std::span<double>(v));
  sgd_step(std::span<double>(p), std::span<const double>(g2), lr, mu, std::span<double>(v));
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(std::abs(p[i] - (p0[i] - lr * ((1 + mu) * g1[i] + g2[i]))) <= 1e-12);
    CHECK(std::abs(v[i] - (mu * g1[i] + g2[i])) <= 1e-12);
  }
}

TEST_CASE("sgd_step rejects bad input") {
  std::vector<float> p(3), g(2), v(3);
  CHECK_THROWS_AS(sgd_step(std::span<float>(p), std::span<const float>(g), 0.1, 0.9, std::span<float>(v)),
                  DimensionError);
  std::vector<float> g3(3);
  CHECK_THROWS_AS(sgd_step(std::span<float>(p), std::span<const float>(g3), -0.1, 0.9, std::span<float>(v)),
                  ParameterError);
  CHECK_THROWS_AS(sgd_step(std::span<float>(p), std::span<const float>(g3), 0.1, 1.0, std::span<float>(v)),
                  ParameterError);
}

TEST_CASE("adam first step moves each weight by about lr against its gradient") {
  Adam adam;
  adam.lr = 0.01;
  std::vector<float> p{0.0f, 0.0f, 0.0f};
  const std::vector<float> g{3.0f, -0.002f, 0.5f};
  adam.begin_step();
  adam.update(0, std::span<float>(p), std::span<const float>(g));
  CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.01).epsilon(1e-2));
  CHECK(p[2] == doctest::Approx(-0.01).epsilon(1e-4));
}

TEST_CASE("tune config validation") {
  TuneConfig tc;
  CHECK_NOTHROW(tc.validate());
  CHECK(tc.epochs == 5);
  CHECK(tc.batch_size == 4);
  CHECK(tc.learning_rate == 0.0035);
  CHECK(tc.momentum == 0.9);
  auto bad = tc;
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tc;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tc;
  bad.learning_rate = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tc;
  bad.momentum = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("pretraining learns and is deterministic") {
  const auto& w = toy_world();
  // Epoch means never rise by more than 5%.
  for (std::size_t e = 1; e < w.pretrain_loss.size(); ++e)
    CHECK(w.pretrain_loss[e] <= w.pretrain_loss[e - 1] * 1.05);
  CHECK(w.pretrain_loss.back() < 0.5 * w.pretrain_loss.front());
  CHECK(w.backbone.tau() == 0.01f);

  // Zero-shot accuracy on held-out pretraining-style renders, 10 classes.
  const auto held = data::make_dataset(w.classes, w.vocab, 10, 99, data::RenderStyle::pretraining());
  std::vector<std::size_t> idx(held.samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<std::uint32_t> classes;
  for (const auto& c : w.classes) classes.push_back(c.id);
  prompts::PromptConfig none;
  none.variant = prompts::Variant::none;
  eval::PromptedPredictor zs(w.backbone, prompts::PromptBank<float>::zeros(none, w.backbone.config), w.vocab);
  const auto arm = eval::evaluate_arm(zs, held, idx, classes);
  MESSAGE("toy zero-shot accuracy " << arm.accuracy);
  CHECK(arm.accuracy > 2 * 100.0 / 10);

  const auto pre = data::make_dataset(w.classes, w.vocab, 4, 5, data::RenderStyle::pretraining());
  PretrainConfig pc;
  pc.epochs = 1;
  pc.batch_size = 5;
  pc.seed = 8;
  const auto a = pretrain(w.backbone.config, pre, pc);
  const auto b = pretrain(w.backbone.config, pre, pc);
  CHECK(same_params(a.params, b.params));
  CHECK(a.epoch_loss == b.epoch_loss);
  pc.seed = 9;
  CHECK_FALSE(same_params(a.params, pretrain(w.backbone.config, pre, pc).params));
}

TEST_CASE("pretraining input checks") {
  const auto& w = toy_world();
  data::Dataset one;
  one.classes = {w.classes[0]};
  one.samples = {data::render(w.classes[0], w.vocab, 1, data::RenderStyle::pretraining())};
  CHECK_THROWS_AS(pretrain(w.backbone.config, one, PretrainConfig{}), ContractError);
}

TEST_CASE("class tokens drop the template only for text-prompted variants") {
  const auto& w = toy_world();
  const auto& c = w.classes[2];
  for (auto v : prompts::all_variants()) {
    auto cfg = prompts::PromptConfig::preset(v, 2);
    const auto tokens = class_tokens(cfg, w.vocab, c);
    CHECK(tokens == (cfg.prompts_text() ? w.vocab.name_ids(c) : w.vocab.caption(c)));
  }
}

TEST_CASE("prompt tuning keeps the backbone frozen and lowers the loss") {
  const auto& w = toy_world();
  const auto hash = model::fingerprint(w.backbone);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto task = toy_task(seed);
    TuneConfig tc;
    tc.seed = seed;
    std::size_t logged = 0;
    const auto r = prompt_tune(w.backbone, toy_bank(prompts::Variant::maple, seed), tc, w.bench, task.split.base_train,
                               task.spec.base, w.vocab, [&](const StepLog& l) {
                                 CHECK(l.step == logged);
                                 CHECK(l.lr == tc.learning_rate);
                                 ++logged;
                               });
    REQUIRE(r.epoch_loss.size() == 5);
    CHECK(r.epoch_loss.back() < r.epoch_loss.front());
    // 24 training samples in batches of 4.
    CHECK(r.steps == 5 * 6);
    CHECK(logged == r.steps);
    CHECK(model::fingerprint(w.backbone) == hash);
  }
}

TEST_CASE("prompt tuning updates every bank tensor and only the bank") {
  const auto& w = toy_world();
  const auto task = toy_task(4);
  TuneConfig tc;
  tc.epochs = 1;
  for (auto v : {prompts::Variant::text_shallow, prompts::Variant::vision_deep, prompts::Variant::independent_vl,
                 prompts::Variant::maple_progressive}) {
    const auto bank = toy_bank(v, 4);
    const auto r = prompt_tune(w.backbone, bank, tc, w.bench, task.split.base_train, task.spec.base, w.vocab);
    std::vector<const diff::Tensor<float>*> before, after;
    bank.visit([&](const std::string&, const diff::Tensor<float>& t) { before.push_back(&t); });
    r.bank.visit([&](const std::string&, const diff::Tensor<float>& t) { after.push_back(&t); });
    REQUIRE(before.size() == after.size());
    for (std::size_t k = 0; k < before.size(); ++k) CHECK(before[k]->values() != after[k]->values());
  }
}

TEST_CASE("zero learning rate leaves the bank unchanged") {
  const auto& w = toy_world();
  const auto task = toy_task(5);
  TuneConfig tc;
  tc.learning_rate = 0.0;
  tc.epochs = 2;
  const auto bank = toy_bank(prompts::Variant::maple, 5);
  const auto r = prompt_tune(w.backbone, bank, tc, w.bench, task.split.base_train, task.spec.base, w.vocab);
  CHECK(prompts::bitwise_equal(bank, r.bank));
}

TEST_CASE("prompt tuning is deterministic") {
  const auto& w = toy_world();
  const auto task = toy_task(6);
  TuneConfig tc;
  tc.epochs = 2;
  tc.seed = 6;
  const auto a = prompt_tune(w.backbone, toy_bank(prompts::Variant::maple, 6), tc, w.bench, task.split.base_train,
                             task.spec.base, w.vocab);
  const auto b = prompt_tune(w.backbone, toy_bank(prompts::Variant::maple, 6), tc, w.bench, task.split.base_train,
                             task.spec.base, w.vocab);
  CHECK(prompts::bitwise_equal(a.bank, b.bank));
  CHECK(a.epoch_loss == b.epoch_loss);
}

TEST_CASE("prompt tuning contracts") {
  const auto& w = toy_world();
  const auto task = toy_task(7);
  TuneConfig tc;
  prompts::PromptConfig none;
  none.variant = prompts::Variant::none;
  CHECK_THROWS_AS(prompt_tune(w.backbone, prompts::PromptBank<float>::zeros(none, w.backbone.config), tc, w.bench,
                              task.split.base_train, task.spec.base, w.vocab),
                  ContractError);
  // Novel samples are not among the base classes.
  CHECK_THROWS_AS(prompt_tune(w.backbone, toy_bank(prompts::Variant::maple, 7), tc, w.bench, task.split.novel_test,
                              task.spec.base, w.vocab),
                  ContractError);
  CHECK_THROWS_AS(prompt_tune(w.backbone, toy_bank(prompts::Variant::maple, 7), tc, w.bench, {}, task.spec.base,
                              w.vocab),
                  ContractError);
  tc.epochs = 0;
  CHECK_THROWS_AS(prompt_tune(w.backbone, toy_bank(prompts::Variant::maple, 7), tc, w.bench, task.split.base_train,
                              task.spec.base, w.vocab),
                  ConfigError);
}

TEST_CASE("a backbone change during tuning is an invariant violation") {
  const auto& w = toy_world();
  auto backbone = w.backbone;
  const auto task = toy_task(8);
  TuneConfig tc;
  tc.epochs = 1;
  auto tamper = [&](const StepLog&) { backbone.text_proj[0] += 1.0f; };
  CHECK_THROWS_AS(prompt_tune(backbone, toy_bank(prompts::Variant::maple, 8), tc, w.bench, task.split.base_train,
                              task.spec.base, w.vocab, tamper),
                  InvariantViolation);
}

TEST_CASE("a non-finite loss is a training error") {
  const auto& w = toy_world();
  const auto task = toy_task(9);
  auto bank = toy_bank(prompts::Variant::independent_vl, 9);
  bank.vision[0][0] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(prompt_tune(w.backbone, bank, TuneConfig{}, w.bench, task.split.base_train, task.spec.base, w.vocab),
                  TrainingError);
}

TEST_CASE("checkpoint round trip is byte-identical") {
  const auto& w = toy_world();
  Checkpoint ck;
  ck.backbone = w.backbone;
  ck.prompts = toy_bank(prompts::Variant::maple_progressive, 2);
  ck.config_echo = "variant = maple_progressive\nseed = 2\n";
  ck.step = 240;
  const auto bytes = serialize_checkpoint(ck);
  CHECK(bytes.substr(0, 4) == "MPLT");
  const auto back = deserialize_checkpoint(bytes);
  CHECK(serialize_checkpoint(back) == bytes);
  REQUIRE(back.backbone);
  REQUIRE(back.prompts);
  CHECK(same_params(*back.backbone, w.backbone));
  CHECK(prompts::bitwise_equal(*back.prompts, *ck.prompts));
  CHECK(back.prompts->config.variant == prompts::Variant::maple_progressive);
  CHECK(back.config_echo == ck.config_echo);
  CHECK(back.step == 240);

  Checkpoint bank_only;
  bank_only.prompts = ck.prompts;
  const auto b2 = serialize_checkpoint(bank_only);
  CHECK(serialize_checkpoint(deserialize_checkpoint(b2)) == b2);
  CHECK_FALSE(deserialize_checkpoint(b2).backbone);
}

TEST_CASE("corrupt checkpoints raise the documented errors") {
  Checkpoint ck;
  ck.prompts = toy_bank(prompts::Variant::maple, 1);
  const auto bytes = serialize_checkpoint(ck);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, 6)), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(magic), FormatError);
  auto version = bytes;
  version[4] = static_cast<char>(kCheckpointVersion + 1);
  CHECK_THROWS_AS(deserialize_checkpoint(version), VersionError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x"), FormatError);
  ck.step = 1u << 24;
  CHECK_THROWS_AS(serialize_checkpoint(ck), FormatError);
}
