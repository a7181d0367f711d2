#include <cmath>
#include <random>

#include "doctest.h"
#include "maple/diffcore/gradcheck.hpp"
#include "maple/prompts/prompted.hpp"
#include "test_util.hpp"

using namespace maple;
using namespace maple::diff;
using namespace maple::model;
using namespace maple::prompts;
using maple::testing::random_image;
using maple::testing::random_tensor;
using maple::testing::tiny_config;

namespace {

const std::vector<std::vector<std::uint32_t>> kClasses{{1, 2, 3}, {1, 2, 4}, {5, 6}};
const std::vector<std::uint32_t> kTemplate{1, 2, 3};

PromptConfig make(Variant v, std::size_t depth, std::size_t length) {
  PromptConfig c;
  c.variant = v;
  c.depth = depth;
  c.length = length;
  return c;
}

template <typename T>
PromptBank<T> random_bank(const PromptConfig& c, const ModelConfig& m, std::uint64_t seed) {
  auto bank = PromptBank<T>::zeros(c, m);
  std::mt19937_64 rng(seed);
  bank.visit([&](const std::string&, Tensor<T>& t) { t = random_tensor<T>(t.shape(), rng, 0.5); });
  return bank;
}

// Tuning objective: cross-entropy of the prompted zero-shot head over a batch.
template <typename T>
Var<T> tuning_loss(const BoundBackbone<T>& bb, const BoundPrompts<T>& bp, const std::vector<Tensor<T>>& images,
                   const std::vector<std::uint32_t>& labels, T tau) {
  std::vector<Var<T>> rows;
  for (const auto& im : images) rows.push_back(encode_image_prompted(bb, bp, im));
  auto logits = similarity_logits(concat_rows(rows), encode_classes(bb, bp, kClasses), tau);
  return cross_entropy(logits, std::span<const std::uint32_t>(labels));
}

template <typename T>
Tensor<T> encode_all(const BackboneParams<T>& params, const PromptBank<T>& bank, const Tensor<T>& image) {
  Graph<T> g;
  BoundBackbone<T> bb(g, params, false);
  BoundPrompts<T> bp(g, bank, false);
  auto x = encode_image_prompted(bb, bp, image);
  auto z = encode_classes(bb, bp, kClasses);
  return concat_rows<T>({x, z}).value();
}

}  // namespace

TEST_CASE("variant names round-trip and unknown names are config errors") {
  for (auto v : all_variants()) CHECK(parse_variant(to_string(v)) == v);
  CHECK(all_variants().size() == 7);
  CHECK_THROWS_AS(parse_variant("maple_deep"), ConfigError);
  CHECK(parse_init_mode("random_all") == InitMode::random_all);
  CHECK(parse_direction("vision_to_lang") == CouplingDirection::vision_to_lang);
  CHECK_THROWS_AS(parse_direction("both"), ConfigError);
}

TEST_CASE("presets and depth scaling") {
  CHECK(PromptConfig::scaled_depth(12) == 9);
  CHECK(PromptConfig::scaled_depth(6) == 4);
  CHECK(PromptConfig::scaled_depth(1) == 1);
  auto m = PromptConfig::preset(Variant::maple, 12);
  CHECK(m.depth == 9);
  CHECK(m.length == 2);
  auto iv = PromptConfig::preset(Variant::independent_vl, 12);
  CHECK(iv.depth == 9);
  CHECK(iv.length == 2);
  for (auto v : {Variant::text_deep, Variant::vision_deep}) {
    auto c = PromptConfig::preset(v, 12);
    CHECK(c.depth == 12);
    CHECK(c.length == 4);
  }
  auto shallow = PromptConfig::preset(Variant::text_shallow, 12);
  CHECK(shallow.text_depth() == 1);
  CHECK(shallow.vision_depth() == 0);
}

TEST_CASE("config validation") {
  auto cfg = tiny_config(2);
  CHECK_THROWS_AS(make(Variant::maple, 3, 1).validate(cfg), ConfigError);
  CHECK_THROWS_AS(make(Variant::maple, 0, 1).validate(cfg), ConfigError);
  CHECK_THROWS_AS(make(Variant::text_deep, 2, 0).validate(cfg), ConfigError);
  CHECK_NOTHROW(make(Variant::none, 0, 0).validate(cfg));
  CHECK_NOTHROW(make(Variant::maple, 2, 1).validate(cfg));
}

TEST_CASE("parameter census at CLIP-B/16 scale") {
  const auto clip = ModelConfig::clip_b16();
  const std::size_t dl = 512, dv = 768;
  for (std::size_t j : {1, 5, 9, 12})
    for (std::size_t b : {1, 2, 4}) {
      CHECK(PromptBank<float>::zeros(make(Variant::maple, j, b), clip).scalar_count() ==
            j * b * dl + j * (dl * dv + dv));
      CHECK(PromptBank<float>::zeros(make(Variant::independent_vl, j, b), clip).scalar_count() ==
            j * b * (dl + dv));
      CHECK(PromptBank<float>::zeros(make(Variant::text_deep, j, b), clip).scalar_count() == j * b * dl);
      CHECK(PromptBank<float>::zeros(make(Variant::vision_deep, j, b), clip).scalar_count() == j * b * dv);
    }
  // J = 9, b = 2 coupled prompting is about 3.55M trainable scalars.
  const double maple_count = double(PromptBank<float>::zeros(make(Variant::maple, 9, 2), clip).scalar_count());
  CHECK(maple_count / 1e6 == doctest::Approx(3.55).epsilon(0.01));
  CHECK(PromptBank<float>::zeros(make(Variant::none, 0, 0), clip).scalar_count() == 0);
  CHECK(PromptBank<float>::zeros(make(Variant::text_shallow, 9, 4), clip).scalar_count() == 4 * dl);

  auto rev = make(Variant::maple, 9, 2);
  rev.direction = CouplingDirection::vision_to_lang;
  CHECK(PromptBank<float>::zeros(rev, clip).scalar_count() == 9 * 2 * dv + 9 * (dv * dl + dl));
  CHECK(PromptBank<float>::zeros(make(Variant::maple_progressive, 9, 2), clip).scalar_count() ==
        9 * 2 * dl + 9 * (dl * dv + dv) + 8 * (dl * dl + dl));
}

TEST_CASE("coupling and composition contracts") {
  auto cfg = tiny_config(2);
  Graph<double> g;
  auto deep = random_bank<double>(make(Variant::text_deep, 2, 1), cfg, 1);
  BoundPrompts<double> bd(g, deep, false);
  CHECK_THROWS_AS(bd.couple(0), ContractError);
  CHECK_THROWS_AS(bd.progressive_compose(0), ContractError);

  auto m = random_bank<double>(make(Variant::maple, 2, 1), cfg, 1);
  BoundPrompts<double> bm(g, m, false);
  CHECK_THROWS_AS(bm.couple(2), ContractError);
  CHECK(bitwise_equal(bm.progressive_compose(1).value(), m.language[1]));
}

TEST_CASE("zero coupling maps give zero vision prompts") {
  auto cfg = tiny_config(2);
  auto bank = random_bank<double>(make(Variant::maple, 2, 2), cfg, 3);
  for (auto& w : bank.coupling_weight) w.fill(0.0);
  for (auto& b : bank.coupling_bias) b.fill(0.0);
  Graph<double> g;
  BoundPrompts<double> bp(g, bank, false);
  for (std::size_t k = 0; k < 2; ++k) CHECK(bitwise_equal(bp.couple(k).value(), Tensor<double>({2, 8})));
}

TEST_CASE("identity coupling copies language prompts") {
  auto cfg = tiny_config(2);  // d_l = d_v = 8
  auto bank = random_bank<double>(make(Variant::maple, 2, 2), cfg, 3);
  for (auto& w : bank.coupling_weight) {
    w.fill(0.0);
    for (std::size_t i = 0; i < 8; ++i) w.at(i, i) = 1.0;
  }
  for (auto& b : bank.coupling_bias) b.fill(0.0);
  Graph<double> g;
  BoundPrompts<double> bp(g, bank, false);
  for (std::size_t k = 0; k < 2; ++k) CHECK(bitwise_equal(bp.couple(k).value(), bank.language[k]));
}

TEST_CASE("coupled prompting equals independent prompting fed the coupled vision sets") {
  auto cfg = tiny_config(3);
  auto params = BackboneParams<double>::init(cfg, 8);
  auto bank = random_bank<double>(make(Variant::maple, 2, 2), cfg, 5);
  auto indep = PromptBank<double>::zeros(make(Variant::independent_vl, 2, 2), cfg);
  indep.language = bank.language;
  for (std::size_t k = 0; k < 2; ++k) {
    // Direct formula P_k·W_k + b_k.
    auto& out = indep.vision[k];
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 8; ++c) {
        double s = bank.coupling_bias[k][c];
        for (std::size_t i = 0; i < 8; ++i) s += bank.language[k].at(r, i) * bank.coupling_weight[k].at(i, c);
        out.at(r, c) = s;
      }
  }
  std::mt19937_64 rng(1);
  auto image = random_image<double>(4, rng);
  CHECK(max_abs_diff(encode_all(params, bank, image), encode_all(params, indep, image)) < 1e-12);
}

TEST_CASE("zero progressive maps reduce to plain coupling") {
  auto cfg = tiny_config(3);
  auto params = BackboneParams<double>::init(cfg, 8);
  auto prog = random_bank<double>(make(Variant::maple_progressive, 3, 2), cfg, 5);
  for (auto& w : prog.progressive_weight) w.fill(0.0);
  for (auto& b : prog.progressive_bias) b.fill(0.0);
  auto plain = PromptBank<double>::zeros(make(Variant::maple, 3, 2), cfg);
  plain.language = prog.language;
  plain.coupling_weight = prog.coupling_weight;
  plain.coupling_bias = prog.coupling_bias;
  std::mt19937_64 rng(1);
  auto image = random_image<double>(4, rng);
  CHECK(bitwise_equal(encode_all(params, prog, image), encode_all(params, plain, image)));

  // Non-zero maps: effective P_2 = P_2 + G_2(P_1 + G_1(P_0)).
  auto live = random_bank<double>(make(Variant::maple_progressive, 3, 1), cfg, 6);
  Graph<double> g;
  BoundPrompts<double> bp(g, live, false);
  auto affine = [](const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b) {
    Tensor<double> y({1, 8});
    for (std::size_t c = 0; c < 8; ++c) {
      y[c] = b[c];
      for (std::size_t i = 0; i < 8; ++i) y[c] += x[i] * w.at(i, c);
    }
    return y;
  };
  auto e1 = affine(live.language[0], live.progressive_weight[0], live.progressive_bias[0]);
  for (std::size_t c = 0; c < 8; ++c) e1[c] += live.language[1][c];
  auto e2 = affine(e1, live.progressive_weight[1], live.progressive_bias[1]);
  for (std::size_t c = 0; c < 8; ++c) e2[c] += live.language[2][c];
  CHECK(max_abs_diff(bp.progressive_compose(2).value(), e2) < 1e-12);
}

TEST_CASE("variant none matches the unprompted encoders") {
  auto cfg = tiny_config(2);
  auto params = BackboneParams<double>::init(cfg, 8);
  auto bank = PromptBank<double>::zeros(make(Variant::none, 0, 0), cfg);
  std::mt19937_64 rng(1);
  auto image = random_image<double>(4, rng);
  Graph<double> g;
  BoundBackbone<double> bb(g, params, false);
  auto x = encode_image(bb, image).value();
  CHECK(bitwise_equal(slice_rows(g.constant(encode_all(params, bank, image)), 0, 1).value(), x));
}

TEST_CASE("token counts per block follow the variant") {
  auto cfg = tiny_config(3);
  auto params = BackboneParams<float>::init(cfg, 2);
  std::mt19937_64 rng(1);
  auto image = random_image<float>(4, rng);
  const std::size_t base_v = cfg.num_patches() + 1, base_t = cfg.context_length;
  struct Expect {
    Variant v;
    std::size_t vision_extra, text_extra;
  };
  for (auto e : {Expect{Variant::none, 0, 0}, Expect{Variant::text_shallow, 0, 2}, Expect{Variant::text_deep, 0, 2},
                 Expect{Variant::vision_deep, 2, 0}, Expect{Variant::independent_vl, 2, 2},
                 Expect{Variant::maple, 2, 2}, Expect{Variant::maple_progressive, 2, 2}}) {
    auto bank = PromptBank<float>::zeros(make(e.v, 2, 2), cfg);
    Graph<float> g;
    BoundBackbone<float> bb(g, params, false);
    BoundPrompts<float> bp(g, bank, false);
    EncodeTrace vt, tt;
    encode_image_prompted(bb, bp, image, &vt);
    encode_text_prompted(bb, bp, std::span<const std::uint32_t>(kClasses[0]), &tt);
    INFO(to_string(e.v));
    CHECK(vt.tokens_per_block == std::vector<std::size_t>(3, base_v + e.vision_extra));
    CHECK(tt.tokens_per_block == std::vector<std::size_t>(3, base_t + e.text_extra));
  }
}

TEST_CASE("vision loss reaches language prompts only through coupling") {
  auto cfg = tiny_config(2);
  auto params = BackboneParams<double>::init(cfg, 8);
  std::mt19937_64 rng(1);
  auto image = random_image<double>(4, rng);
  auto vision_only_loss = [&](const PromptBank<double>& bank) {
    Graph<double> g;
    BoundBackbone<double> bb(g, params, false);
    BoundPrompts<double> bp(g, bank, true);
    auto x = encode_image_prompted(bb, bp, image);
    g.backward(sum(mul(x, g.constant(random_tensor<double>({1, 8}, rng)))));
    double m = 0;
    for (const auto& p : bp.language)
      for (double v : g.grad(p).values()) m = std::max(m, std::abs(v));
    return m;
  };
  CHECK(vision_only_loss(random_bank<double>(make(Variant::maple, 2, 1), cfg, 3)) > 1e-8);
  CHECK(vision_only_loss(random_bank<double>(make(Variant::independent_vl, 2, 1), cfg, 3)) == 0.0);
}

TEST_CASE("gradient census: every prompt tensor trains, the backbone never does") {
  auto cfg = tiny_config(2);
  auto params = BackboneParams<double>::init(cfg, 8);
  std::mt19937_64 rng(1);
  std::vector<Tensor<double>> images{random_image<double>(4, rng), random_image<double>(4, rng)};
  for (auto v : all_variants()) {
    if (v == Variant::none) continue;
    INFO(to_string(v));
    for (auto dir : {CouplingDirection::lang_to_vision, CouplingDirection::vision_to_lang}) {
      auto c = make(v, 2, 1);
      c.direction = dir;
      auto bank = random_bank<double>(c, cfg, 3);
      Graph<double> g;
      BoundBackbone<double> bb(g, params, false);
      BoundPrompts<double> bp(g, bank, true);
      g.backward(tuning_loss<double>(bb, bp, images, {0, 2}, 0.01));
      for (const auto* group : {&bp.language, &bp.vision, &bp.coupling_weight, &bp.coupling_bias,
                                &bp.progressive_weight, &bp.progressive_bias})
        for (const auto& p : *group) {
          double m = 0;
          for (double x : g.grad(p).values()) m = std::max(m, std::abs(x));
          CHECK(m > 0.0);
        }
      CHECK_FALSE(bb.text_proj.requires_grad());
      CHECK_FALSE(bb.vision_blocks[0].wq.requires_grad());
    }
  }
}

TEST_CASE("template init copies template embeddings") {
  auto cfg = tiny_config(2);
  auto params = BackboneParams<double>::init(cfg, 8);
  auto c = make(Variant::maple, 2, 2);
  auto bank = init_prompts(c, cfg, params.token_embedding, std::span<const std::uint32_t>(kTemplate), 4);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t j = 0; j < 8; ++j) CHECK(bank.language[0].at(r, j) == params.token_embedding.at(kTemplate[r], j));
  CHECK(max_abs_diff(bank.language[1], Tensor<double>({2, 8})) > 0);
  CHECK(bitwise_equal(bank, init_prompts(c, cfg, params.token_embedding, std::span<const std::uint32_t>(kTemplate), 4)));
  CHECK_FALSE(
      bitwise_equal(bank, init_prompts(c, cfg, params.token_embedding, std::span<const std::uint32_t>(kTemplate), 5)));

  c.init = InitMode::template_all_layers;
  c.template_offset = 1;
  auto all = init_prompts(c, cfg, params.token_embedding, std::span<const std::uint32_t>(kTemplate), 4);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t j = 0; j < 8; ++j) CHECK(all.language[k].at(r, j) == params.token_embedding.at(kTemplate[r + 1], j));

  std::vector<std::string> warnings;
  c.length = 4;
  c.init = InitMode::template_first_layer;
  c.template_offset = 0;
  init_prompts(c, cfg, params.token_embedding, std::span<const std::uint32_t>(kTemplate), 4, &warnings);
  CHECK(warnings.size() == 1);
}

TEST_CASE("random init statistics") {
  auto clip = tiny_config(2);
  clip.text_width = 64;
  clip.vision_width = 96;
  clip.text_heads = 4;
  clip.vision_heads = 4;
  auto c = make(Variant::maple, 2, 2);
  c.init = InitMode::random_all;
  auto bank = init_prompts(c, clip, Tensor<double>({7, 64}), std::span<const std::uint32_t>(kTemplate), 11);
  double s = 0, s2 = 0;
  std::size_t n = 0;
  for (const auto& w : bank.coupling_weight)
    for (double v : w.values()) {
      s += v;
      s2 += v * v;
      ++n;
    }
  CHECK(std::abs(s / n) < 1e-3);
  CHECK(std::sqrt(s2 / n) == doctest::Approx(0.02).epsilon(0.02));
  for (const auto& b : bank.coupling_bias) CHECK(bitwise_equal(b, Tensor<double>(b.shape())));
}

TEST_CASE("every trainable scalar passes finite differences") {
  // K=2, J=2, b=1, d_v=d_l=8.
  auto cfg = tiny_config(2);
  auto params64 = BackboneParams<double>::init(cfg, 12);
  auto params32 = params64.cast<float>();
  std::mt19937_64 rng(3);
  std::vector<Tensor<double>> images64{random_image<double>(4, rng), random_image<double>(4, rng)};
  std::vector<Tensor<float>> images32{images64[0].cast<float>(), images64[1].cast<float>()};
  const std::vector<std::uint32_t> labels{0, 2};

  for (auto v : {Variant::maple, Variant::maple_progressive, Variant::independent_vl}) {
    INFO(to_string(v));
    auto c = make(v, 2, 1);
    // Generic point. At template init the coupled prompt rows are nearly
    // constant, LayerNorm is close to singular there and the O(h²) term of
    // central differences alone exceeds 1e-6.
    auto bank64 = random_bank<double>(c, cfg, 9);
    auto bank32 = bank64.cast<float>();
    std::vector<Tensor<double>> inputs;
    bank64.visit([&](const std::string&, const Tensor<double>& t) { inputs.push_back(t); });
    ScalarFn<double> f64 = [&](Graph<double>& g, const std::vector<Var<double>>& vars) {
      BoundBackbone<double> bb(g, params64, false);
      BoundPrompts<double> bp(g, bank64, vars);
      return tuning_loss<double>(bb, bp, images64, labels, params64.tau());
    };
    ScalarFn<float> f32 = [&](Graph<float>& g, const std::vector<Var<float>>& vars) {
      BoundBackbone<float> bb(g, params32, false);
      BoundPrompts<float> bp(g, bank32, vars);
      return tuning_loss<float>(bb, bp, images32, labels, params32.tau());
    };
    auto r64 = finite_diff_check<double>(f64, inputs, 1e-5);
    INFO("64-bit worst " << r64.worst_input << ":" << r64.worst_index << " analytic " << r64.worst_analytic
                         << " numeric " << r64.worst_numeric);
    CHECK(r64.max_rel_error <= 1e-6);
    std::vector<Tensor<float>> inputs32;
    for (const auto& t : inputs) inputs32.push_back(t.cast<float>());
    auto r32 = finite_diff_check_mixed(f32, f64, inputs32, 1e-5);
    CHECK(r32.max_rel_error <= 1e-3);
  }
}

TEST_CASE("one-layer deep language prompting is shallow prompting") {
  auto cfg = tiny_config(3);
  auto params = BackboneParams<double>::init(cfg, 8);
  auto deep = random_bank<double>(make(Variant::text_deep, 1, 2), cfg, 5);
  auto shallow = PromptBank<double>::zeros(make(Variant::text_shallow, 1, 2), cfg);
  shallow.language = deep.language;
  std::mt19937_64 rng(1);
  auto image = random_image<double>(4, rng);
  CHECK(bitwise_equal(encode_all(params, deep, image), encode_all(params, shallow, image)));
}

TEST_CASE("classify composes the prompted encoders") {
  auto cfg = tiny_config(2);
  auto params = BackboneParams<double>::init(cfg, 8);
  auto bank = random_bank<double>(make(Variant::maple, 2, 1), cfg, 5);
  std::mt19937_64 rng(1);
  auto image = random_image<double>(4, rng);
  Graph<double> g;
  BoundBackbone<double> bb(g, params, false);
  BoundPrompts<double> bp(g, bank, false);
  auto p = classify(bb, bp, image, kClasses, 0.01).value();
  double total = 0;
  for (double v : p.values()) total += v;
  CHECK(std::abs(total - 1.0) <= 1e-6);
  auto x = encode_image_prompted(bb, bp, image).value();
  auto z = encode_classes(bb, bp, kClasses).value();
  CHECK(bitwise_equal(p.reshaped({3}), zero_shot_logits(x, z, 0.01)));

  const std::vector<std::vector<std::uint32_t>> one{{1, 2}};
  auto single = classify(bb, bp, image, one, 0.01).value();
  CHECK(single.size() == 1);
  CHECK(single[0] == 1.0);
  CHECK_THROWS_AS(classify(bb, bp, image, {}, 0.01), ContractError);
}

TEST_CASE("perturbing the first language set moves the image embedding") {
  auto cfg = tiny_config(2);
  auto params = BackboneParams<double>::init(cfg, 8);
  auto bank = random_bank<double>(make(Variant::maple, 2, 1), cfg, 5);
  std::mt19937_64 rng(1);
  auto image = random_image<double>(4, rng);
  auto before = encode_all(params, bank, image);
  bank.language[0][3] += 0.1;
  CHECK(max_abs_diff(slice_rows(Graph<double>().constant(before), 0, 1).value(),
                     slice_rows(Graph<double>().constant(encode_all(params, bank, image)), 0, 1).value()) > 1e-9);
}

TEST_CASE("progressive prompting: one layer ignores G, deep layers reach P_0") {
  auto cfg = tiny_config(3);
  auto params = BackboneParams<double>::init(cfg, 8);
  auto one = random_bank<double>(make(Variant::maple_progressive, 1, 2), cfg, 5);
  CHECK(one.progressive_weight.empty());
  auto plain = PromptBank<double>::zeros(make(Variant::maple, 1, 2), cfg);
  plain.language = one.language;
  plain.coupling_weight = one.coupling_weight;
  plain.coupling_bias = one.coupling_bias;
  std::mt19937_64 rng(1);
  auto image = random_image<double>(4, rng);
  CHECK(bitwise_equal(encode_all(params, one, image), encode_all(params, plain, image)));

  // A loss on the layer-3 coupled prompts alone reaches P_0 through G_2·G_1.
  auto bank = random_bank<double>(make(Variant::maple_progressive, 3, 1), cfg, 6);
  Graph<double> g;
  BoundPrompts<double> bp(g, bank, true);
  g.backward(sum(bp.couple(2)));
  double m = 0;
  for (double v : g.grad(bp.language[0]).values()) m = std::max(m, std::abs(v));
  CHECK(m > 0.0);
}

TEST_CASE("reverse coupling mirrors forward coupling") {
  auto cfg = tiny_config(2);
  cfg.vision_width = 12;
  cfg.vision_heads = 3;
  auto c = make(Variant::maple, 2, 2);
  c.direction = CouplingDirection::vision_to_lang;
  auto bank = random_bank<double>(c, cfg, 5);
  CHECK(bank.language.empty());
  CHECK(bank.vision.size() == 2);
  CHECK(bank.coupling_weight[0].shape() == Shape{12, 8});

  auto zero = bank;
  for (auto& w : zero.coupling_weight) w.fill(0.0);
  for (auto& b : zero.coupling_bias) b.fill(0.0);
  Graph<double> g;
  BoundPrompts<double> bz(g, zero, false);
  CHECK(bitwise_equal(bz.text_schedule().layers[1].value(), Tensor<double>({2, 8})));
  CHECK(bitwise_equal(bz.vision_schedule().layers[1].value(), zero.vision[1]));

  // A text-only loss reaches the vision sets only through the coupling.
  auto params = BackboneParams<double>::init(cfg, 8);
  auto text_grad = [&](const PromptBank<double>& b) {
    Graph<double> g2;
    BoundBackbone<double> bb(g2, params, false);
    BoundPrompts<double> bp(g2, b, true);
    g2.backward(sum(encode_text_prompted(bb, bp, std::span<const std::uint32_t>(kClasses[0]))));
    double m = 0;
    for (const auto& p : bp.vision)
      for (double v : g2.grad(p).values()) m = std::max(m, std::abs(v));
    return m;
  };
  CHECK(text_grad(bank) > 0.0);
  auto indep = random_bank<double>(make(Variant::independent_vl, 2, 2), cfg, 5);
  CHECK(text_grad(indep) == 0.0);
}
