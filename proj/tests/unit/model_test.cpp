#include <cmath>
#include <random>

#include "doctest.h"
#include "maple/diffcore/gradcheck.hpp"
#include "maple/model/encoder.hpp"
#include "test_util.hpp"

using namespace maple;
using namespace maple::diff;
using namespace maple::model;
using maple::testing::random_image;
using maple::testing::random_tensor;
using maple::testing::tiny_config;

namespace {

double norm(const Tensor<double>& t) {
  double s = 0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

Tensor<double> unit_rows(Tensor<double> t) {
  const std::size_t d = t.cols();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) s += t.at(r, j) * t.at(r, j);
    for (std::size_t j = 0; j < d; ++j) t.at(r, j) /= std::sqrt(s);
  }
  return t;
}

const std::vector<std::uint32_t> kCaption{1, 2, 3};

}  // namespace

TEST_CASE("encoders produce unit vectors deterministically") {
  auto params = BackboneParams<double>::init(tiny_config(), 3);
  std::mt19937_64 rng(5);
  auto image = random_image<double>(4, rng);
  Graph<double> g;
  BoundBackbone<double> bb(g, params, false);
  auto x1 = encode_image(bb, image).value();
  auto x2 = encode_image(bb, image).value();
  auto z1 = encode_text(bb, std::span<const std::uint32_t>(kCaption)).value();
  auto z2 = encode_text(bb, std::span<const std::uint32_t>(kCaption)).value();
  CHECK(x1.shape() == Shape{1, 8});
  CHECK(std::abs(norm(x1) - 1.0) < 1e-12);
  CHECK(std::abs(norm(z1) - 1.0) < 1e-12);
  CHECK(bitwise_equal(x1, x2));
  CHECK(bitwise_equal(z1, z2));

  auto again = BackboneParams<double>::init(tiny_config(), 3);
  CHECK(fingerprint(again) == fingerprint(params));
  CHECK(fingerprint(BackboneParams<double>::init(tiny_config(), 4)) != fingerprint(params));
}

TEST_CASE("unprompted blocks see the base token counts") {
  auto cfg = tiny_config(3);
  auto params = BackboneParams<float>::init(cfg, 1);
  std::mt19937_64 rng(2);
  Graph<float> g;
  BoundBackbone<float> bb(g, params, false);
  EncodeTrace vt, tt;
  encode_image<float>(bb, random_image<float>(4, rng), nullptr, &vt);
  encode_text<float>(bb, std::span<const std::uint32_t>(kCaption), nullptr, &tt);
  CHECK(vt.tokens_per_block == std::vector<std::size_t>(3, cfg.num_patches() + 1));
  CHECK(tt.tokens_per_block == std::vector<std::size_t>(3, cfg.context_length));
}

TEST_CASE("prompt schedule: fresh tokens for the first J blocks, then carried") {
  auto cfg = tiny_config(3);
  auto params = BackboneParams<double>::init(cfg, 1);
  std::mt19937_64 rng(2);
  Graph<double> g;
  BoundBackbone<double> bb(g, params, false);
  PromptSchedule<double> s;
  s.layers = {g.constant(random_tensor<double>({2, 8}, rng)), g.constant(random_tensor<double>({2, 8}, rng))};
  EncodeTrace vt, tt;
  encode_image(bb, random_image<double>(4, rng), &s, &vt);
  encode_text(bb, std::span<const std::uint32_t>(kCaption), &s, &tt);
  CHECK(vt.tokens_per_block == std::vector<std::size_t>(3, cfg.num_patches() + 3));
  CHECK(tt.tokens_per_block == std::vector<std::size_t>(3, cfg.context_length + 2));

  PromptSchedule<double> deep;
  for (int i = 0; i < 4; ++i) deep.layers.push_back(s.layers[0]);
  CHECK_THROWS_AS(encode_image(bb, random_image<double>(4, rng), &deep), ConfigError);
}

TEST_CASE("text readout is causal") {
  auto cfg = tiny_config();
  auto params = BackboneParams<double>::init(cfg, 9);
  Graph<double> g;
  BoundBackbone<double> bb(g, params, false);
  // Same final token, two earlier tokens swapped.
  const std::vector<std::uint32_t> ab{1, 2, 3}, ba{2, 1, 3};
  auto z = encode_text(bb, std::span<const std::uint32_t>(ab)).value();
  CHECK(max_abs_diff(z, encode_text(bb, std::span<const std::uint32_t>(ba)).value()) > 1e-6);

  // Padding after the readout never reaches it, whatever its embedding.
  auto changed = params;
  for (std::size_t j = 0; j < cfg.text_width; ++j) changed.token_embedding.at(kPadToken, j) += 3.0;
  Graph<double> g2;
  BoundBackbone<double> bb2(g2, changed, false);
  CHECK(max_abs_diff(z, encode_text(bb2, std::span<const std::uint32_t>(ab)).value()) < 1e-12);
}

TEST_CASE("text encoder input validation") {
  auto params = BackboneParams<float>::init(tiny_config(), 1);
  Graph<float> g;
  BoundBackbone<float> bb(g, params, false);
  const std::vector<std::uint32_t> bad{1, 99}, pads{0, 0}, longer{1, 1, 1, 1, 1};
  CHECK_THROWS_AS(encode_text(bb, std::span<const std::uint32_t>(bad)), VocabularyError);
  CHECK_THROWS_AS(encode_text(bb, std::span<const std::uint32_t>(pads)), ContractError);
  CHECK_THROWS_AS(encode_text(bb, std::span<const std::uint32_t>(longer)), DimensionError);
  CHECK_THROWS_AS(encode_image(bb, Tensor<float>({5, 5, 3})), DimensionError);
}

TEST_CASE("zero-shot head cases") {
  // Image equal to class 0, at τ = 0.01 the head saturates.
  auto z = Tensor<double>::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  auto p = zero_shot_logits(Tensor<double>::vector({1, 0, 0}), z, 0.01);
  CHECK(p[0] > 0.99);

  // Two classes equidistant from the image.
  auto two = unit_rows(Tensor<double>::matrix({{1, 1, 0}, {1, -1, 0}}));
  auto half = zero_shot_logits(Tensor<double>::vector({1, 0, 0}), two, 0.01);
  CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half[1] == doctest::Approx(0.5).epsilon(1e-12));

  // C = 5 against the closed form exp(s_i/τ)/Σ exp(s_j/τ).
  std::mt19937_64 rng(17);
  auto classes = unit_rows(random_tensor<double>({5, 6}, rng));
  auto x = unit_rows(random_tensor<double>({1, 6}, rng));
  for (double tau : {0.01, 0.1, 1.0}) {
    auto got = zero_shot_logits(x, classes, tau);
    std::vector<double> e(5);
    double total = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < 6; ++j) s += x[j] * classes.at(i, j);
      e[i] = std::exp(s / tau);
      total += e[i];
    }
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(got[i] - e[i] / total) <= 1e-12);
  }

  CHECK_THROWS_AS(zero_shot_logits(Tensor<double>::vector({2, 0, 0}), z, 0.01), ContractError);
  CHECK_THROWS_AS(zero_shot_logits(Tensor<double>::vector({1, 0, 0}), z, 0.0), ParameterError);
}

TEST_CASE("zero-shot argmax does not depend on τ") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    auto classes = unit_rows(random_tensor<double>({7, 5}, rng));
    auto x = unit_rows(random_tensor<double>({1, 5}, rng));
    auto argmax = [](const Tensor<double>& p) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = i;
      return best;
    };
    const auto ref = argmax(zero_shot_logits(x, classes, 1.0));
    CHECK(argmax(zero_shot_logits(x, classes, 0.01)) == ref);
    CHECK(argmax(zero_shot_logits(x, classes, 0.3)) == ref);
  }
}

TEST_CASE("contrastive loss cases") {
  Graph<double> g;
  // All embeddings identical: every row of the softmax is uniform.
  Tensor<double> same({4, 3}, 0.0);
  for (std::size_t i = 0; i < 4; ++i) same.at(i, 0) = 1.0;
  auto l = contrastive_loss(g.constant(same), g.constant(same), 0.01);
  CHECK(l.value()[0] == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  Tensor<double> pair({2, 3}, 0.0);
  pair.at(0, 0) = 1.0;
  pair.at(1, 0) = 1.0;
  CHECK(contrastive_loss(g.constant(pair), g.constant(pair), 0.01).value()[0] ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Matched orthogonal pairs at small τ.
  auto eye = Tensor<double>::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK(contrastive_loss(g.constant(eye), g.constant(eye), 0.01).value()[0] < 1e-30);

  // B = 4 against the direct formula.
  std::mt19937_64 rng(31);
  auto a = unit_rows(random_tensor<double>({4, 6}, rng));
  auto b = unit_rows(random_tensor<double>({4, 6}, rng));
  const double tau = 0.07;
  double s[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      s[i][j] = 0;
      for (int k = 0; k < 6; ++k) s[i][j] += a.at(i, k) * b.at(j, k);
      s[i][j] /= tau;
    }
  double i2t = 0, t2i = 0;
  for (int i = 0; i < 4; ++i) {
    double row = 0, col = 0;
    for (int j = 0; j < 4; ++j) {
      row += std::exp(s[i][j]);
      col += std::exp(s[j][i]);
    }
    i2t += std::log(row) - s[i][i];
    t2i += std::log(col) - s[i][i];
  }
  const double expect = 0.5 * (i2t / 4 + t2i / 4);
  CHECK(std::abs(contrastive_loss(g.constant(a), g.constant(b), tau).value()[0] - expect) <= 1e-10);

  CHECK_THROWS_AS(contrastive_loss(g.constant(a.reshaped({4, 6})), g.constant(b), 0.0), ParameterError);
  CHECK_THROWS_AS(contrastive_loss(g.constant(unit_rows(random_tensor<double>({1, 6}, rng))),
                                   g.constant(unit_rows(random_tensor<double>({1, 6}, rng))), tau),
                  ContractError);
}

TEST_CASE("backbone gradient agrees with finite differences") {
  auto cfg = tiny_config();
  auto params = BackboneParams<double>::init(cfg, 42, 0.5);
  std::mt19937_64 rng(4);
  const auto img0 = random_image<double>(4, rng), img1 = random_image<double>(4, rng);
  // Key biases shift every logit of a query row equally, so their gradient is
  // exactly zero and central differences only see roundoff. They stay out of
  // the relative check and are tested against zero directly.
  std::vector<Tensor<double>> inputs;
  std::vector<bool> is_input;
  params.visit([&](const std::string& name, const Tensor<double>& t) {
    const bool key_bias = name.ends_with(".attn.bk");
    is_input.push_back(!key_bias);
    if (!key_bias) inputs.push_back(t);
  });
  auto loss = [&](Graph<double>& g, const BoundBackbone<double>& bb) {
    const std::vector<std::uint32_t> c0{1, 2, 3}, c1{4, 5};
    auto x = concat_rows<double>({encode_image(bb, img0), encode_image(bb, img1)});
    auto z = concat_rows<double>({encode_text(bb, std::span<const std::uint32_t>(c0)),
                                  encode_text(bb, std::span<const std::uint32_t>(c1))});
    (void)g;
    return contrastive_loss(x, z, 0.5);
  };
  ScalarFn<double> f = [&](Graph<double>& g, const std::vector<Var<double>>& v) {
    std::vector<Var<double>> all;
    std::size_t next = 0, i = 0;
    params.visit([&](const std::string&, const Tensor<double>& t) {
      all.push_back(is_input[i++] ? v[next++] : g.leaf(t, true));
    });
    BoundBackbone<double> bb(g, params, all);
    return loss(g, bb);
  };
  auto r = finite_diff_check<double>(f, inputs, 1e-5);
  INFO("worst input " << r.worst_input << " index " << r.worst_index << " analytic " << r.worst_analytic
                      << " numeric " << r.worst_numeric);
  CHECK(r.max_rel_error <= 1e-3);

  Graph<double> g;
  BoundBackbone<double> bb(g, params, true);
  g.backward(loss(g, bb));
  for (const auto& blocks : {bb.vision_blocks, bb.text_blocks})
    for (const auto& b : blocks)
      CHECK(max_abs_diff(g.grad(b.bk), Tensor<double>(b.bk.shape())) < 1e-15);
}
