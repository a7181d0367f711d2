// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "maple/error.hpp"
#include "maple/util/binary_io.hpp"
#include "maple/util/parallel.hpp"

namespace maple::data {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix(a ^ splitmix(b)); }

using Rgb = std::array<float, 3>;

// Rotation about the gray axis (1,1,1)/√3 by Rodrigues' formula.
Rgb rotate_hue(const Rgb& c, double degrees) {
  const double t = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(t), sn = std::sin(t), k = 1.0 / std::sqrt(3.0);
  const double dot = k * (double(c[0]) + c[1] + c[2]);
  // k × v for k = (k, k, k).
  const double cx = k * (double(c[2]) - c[1]), cy = k * (double(c[0]) - c[2]), cz = k * (double(c[1]) - c[0]);
  return {static_cast<float>(c[0] * cs + cx * sn + k * dot * (1 - cs)),
          static_cast<float>(c[1] * cs + cy * sn + k * dot * (1 - cs)),
          static_cast<float>(c[2] * cs + cz * sn + k * dot * (1 - cs))};
}

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

bool inside(ShapeFamily s, double u, double v) {
  const double au = std::abs(u), av = std::abs(v);
  switch (s) {
    case ShapeFamily::circle:
      return u * u + v * v <= 1.0;
    case ShapeFamily::square:
      return au <= 0.85 && av <= 0.85;
    case ShapeFamily::triangle:
      return v >= -0.9 && v <= 0.8 && au <= 0.95 * (v + 0.9) / 1.7;
    case ShapeFamily::cross:
      return (au <= 0.3 && av <= 0.95) || (av <= 0.3 && au <= 0.95);
    case ShapeFamily::ring: {
      const double r2 = u * u + v * v;
      return r2 <= 1.0 && r2 >= 0.3;
    }
    case ShapeFamily::diamond:
      return au + av <= 1.0;
    case ShapeFamily::bar:
      return au <= 1.0 && av <= 0.35;
    case ShapeFamily::frame: {
      const double m = std::max(au, av);
      return m <= 0.9 && m >= 0.55;
    }
  }
  return false;
}

struct Palette {
  const char* name;
  Rgb rgb;
};

constexpr Palette kPrimaryColors[] = {{"red", {0.9f, 0.12f, 0.1f}},   {"green", {0.1f, 0.72f, 0.2f}},
                                      {"blue", {0.15f, 0.3f, 0.95f}}, {"yellow", {0.95f, 0.88f, 0.1f}},
                                      {"purple", {0.6f, 0.18f, 0.8f}}, {"white", {0.95f, 0.95f, 0.95f}}};
constexpr ShapeFamily kPrimaryShapes[] = {ShapeFamily::circle, ShapeFamily::square, ShapeFamily::triangle,
                                          ShapeFamily::cross};
constexpr Palette kSecondaryColors[] = {{"orange", {0.98f, 0.55f, 0.1f}},
                                        {"cyan", {0.1f, 0.85f, 0.9f}},
                                        {"pink", {0.98f, 0.5f, 0.72f}},
                                        {"gray", {0.55f, 0.55f, 0.55f}}};
constexpr ShapeFamily kSecondaryShapes[] = {ShapeFamily::ring, ShapeFamily::diamond, ShapeFamily::bar,
                                            ShapeFamily::frame};

template <std::size_t NC, std::size_t NS>
std::vector<ConceptClass> grid(const Palette (&colors)[NC], const ShapeFamily (&shapes)[NS], std::size_t count,
                               std::uint64_t order_seed, std::uint32_t first_id) {
  if (count == 0 || count > NC * NS) {
    throw ParameterError("class count " + std::to_string(count) + " outside [1, " + std::to_string(NC * NS) + "]");
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t c = 0; c < NC; ++c)
    for (std::size_t s = 0; s < NS; ++s) pairs.emplace_back(c, s);
  // Fixed order so that any prefix mixes colors and shapes.
  std::mt19937_64 rng(order_seed);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  std::vector<ConceptClass> out;
  for (std::size_t i = 0; i < count; ++i) {
    ConceptClass k;
    k.id = first_id + static_cast<std::uint32_t>(i);
    k.name = {colors[pairs[i].first].name, std::string(to_string(shapes[pairs[i].second]))};
    k.shape = shapes[pairs[i].second];
    k.color = colors[pairs[i].first].rgb;
    out.push_back(std::move(k));
  }
  return out;
}

void check_sample(const Sample& s) {
  if (s.image.shape() != diff::Shape{kImageSize, kImageSize, 3}) {
    throw DimensionError("sample image must be [32x32x3], got " + diff::shape_string(s.image.shape()));
  }
}

}  // namespace

std::string_view to_string(ShapeFamily s) {
  switch (s) {
    case ShapeFamily::circle: return "circle";
    case ShapeFamily::square: return "square";
    case ShapeFamily::triangle: return "triangle";
    case ShapeFamily::cross: return "cross";
    case ShapeFamily::ring: return "ring";
    case ShapeFamily::diamond: return "diamond";
    case ShapeFamily::bar: return "bar";
    case ShapeFamily::frame: return "frame";
  }
  return "?";
}

std::string_view to_string(Texture t) {
  switch (t) {
    case Texture::solid: return "solid";
    case Texture::striped: return "striped";
    case Texture::checkered: return "checkered";
  }
  return "?";
}

std::string ConceptClass::display_name() const {
  std::string s;
  for (const auto& w : name) s += (s.empty() ? "" : " ") + w;
  return s;
}

void ConceptClass::validate() const {
  if (name.empty()) throw ParameterError("class " + std::to_string(id) + " has no name");
  if (!(size_min > 0.0f && size_min <= size_max && size_max <= 0.5f)) {
    throw ParameterError("class " + display_name() + " has an invalid size range");
  }
}

RenderStyle RenderStyle::pretraining() { return RenderStyle{}; }

RenderStyle RenderStyle::benchmark() {
  RenderStyle s;
  s.background_level = 0.3f;
  s.background_noise = 0.06f;
  s.distractors = 2;
  s.tinted_background = true;
  return s;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<ConceptClass>>& class_sets) {
  Vocabulary v;
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& w) {
    if (seen.insert(w).second) v.words_.push_back(w);
  };
  add(std::string(kPadWord));
  std::istringstream tmpl{std::string(kTemplate)};
  for (std::string w; tmpl >> w;) add(w);
  for (const auto& set : class_sets)
    for (const auto& c : set)
      for (const auto& w : c.name) add(w);
  return v;
}

std::uint32_t Vocabulary::id(std::string_view word) const {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] == word) return static_cast<std::uint32_t>(i);
  throw VocabularyError("unknown word '" + std::string(word) + "'");
}

std::vector<std::uint32_t> Vocabulary::tokenize(std::string_view text) const {
  std::vector<std::uint32_t> ids;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) ids.push_back(id(w));
  return ids;
}

std::string Vocabulary::detokenize(std::span<const std::uint32_t> ids) const {
  std::string s;
  for (auto i : ids) {
    if (i >= words_.size()) throw VocabularyError("token id " + std::to_string(i) + " outside vocabulary");
    if (i == 0) continue;
    s += (s.empty() ? "" : " ") + words_[i];
  }
  return s;
}

std::vector<std::uint32_t> Vocabulary::caption(const ConceptClass& c) const {
  return tokenize(std::string(kTemplate) + " " + c.display_name());
}

std::vector<std::uint32_t> Vocabulary::name_ids(const ConceptClass& c) const { return tokenize(c.display_name()); }

const ConceptClass& Dataset::class_by_id(std::uint32_t id) const {
  for (const auto& c : classes)
    if (c.id == id) return c;
  throw ContractError("dataset has no class with id " + std::to_string(id));
}

Sample render(const ConceptClass& c, const Vocabulary& vocab, std::uint64_t seed, const RenderStyle& style) {
  c.validate();
  std::mt19937_64 rng(mix(seed, c.id));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t n = kImageSize;

  Rgb bg{style.background_level, style.background_level, style.background_level};
  if (style.tinted_background) {
    bg = rotate_hue({style.background_level * 1.6f, style.background_level * 0.7f, style.background_level * 0.7f},
                    uniform(0, 360));
  }
  Sample s;
  s.label = c.id;
  s.caption = vocab.caption(c);
  s.image = Tensor<float>({n, n, 3});
  auto px = [&](std::size_t y, std::size_t x) { return s.image.data().data() + (y * n + x) * 3; };
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t ch = 0; ch < 3; ++ch) px(y, x)[ch] = clamp01(bg[ch] + style.background_noise * noise(rng));

  for (std::size_t d = 0; d < style.distractors; ++d) {
    const double gray = uniform(0.3, 0.7);
    const auto cy = static_cast<long>(uniform(0, n)), cx = static_cast<long>(uniform(0, n));
    const long r = static_cast<long>(uniform(1, 3));
    for (long y = cy - r; y <= cy + r; ++y)
      for (long x = cx - r; x <= cx + r; ++x)
        if (y >= 0 && x >= 0 && y < long(n) && x < long(n))
          for (std::size_t ch = 0; ch < 3; ++ch) px(y, x)[ch] = static_cast<float>(gray);
  }

  const double half = uniform(c.size_min, c.size_max) * n;
  const double cy = n * (0.5 + uniform(-style.position_jitter, style.position_jitter));
  const double cx = n * (0.5 + uniform(-style.position_jitter, style.position_jitter));
  Rgb color = rotate_hue(c.color, uniform(-style.hue_jitter, style.hue_jitter));
  const double gain = 1.0 + uniform(-style.brightness_jitter, style.brightness_jitter);
  for (auto& v : color) v = clamp01(v * gain);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const double u = (x + 0.5 - cx) / half, v = (y + 0.5 - cy) / half;
      if (!inside(c.shape, u, v)) continue;
      double shade = 1.0;
      if (c.texture == Texture::striped && (x / 3) % 2 == 1) shade = 0.55;
      if (c.texture == Texture::checkered && ((x / 3) + (y / 3)) % 2 == 1) shade = 0.55;
      for (std::size_t ch = 0; ch < 3; ++ch) px(y, x)[ch] = clamp01(color[ch] * shade);
    }
  return s;
}

Dataset make_dataset(const std::vector<ConceptClass>& classes, const Vocabulary& vocab, std::size_t per_class_count,
                     std::uint64_t seed, const RenderStyle& style) {
  std::unordered_set<std::uint32_t> ids;
  for (const auto& c : classes) {
    c.validate();
    if (!ids.insert(c.id).second) throw ContractError("duplicate class id " + std::to_string(c.id));
    for (const auto& w : c.name) vocab.id(w);
  }
  Dataset ds;
  ds.classes = classes;
  ds.samples.resize(classes.size() * per_class_count);
  parallel_for(ds.samples.size(), [&](std::size_t i) {
    const auto& c = classes[i / per_class_count];
    auto s = render(c, vocab, mix(seed, i), style);
    s.id = static_cast<std::uint32_t>(i);
    ds.samples[i] = std::move(s);
  });
  return ds;
}

Split split(const Dataset& dataset, const SplitSpec& spec) {
  if (spec.shots == 0) throw ParameterError("shots must be at least 1");
  std::unordered_set<std::uint32_t> base(spec.base.begin(), spec.base.end());
  for (auto id : spec.novel)
    if (base.count(id)) throw ContractError("class " + std::to_string(id) + " is both base and novel");
  std::unordered_map<std::uint32_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) by_class[dataset.samples[i].label].push_back(i);
  for (const auto* set : {&spec.base, &spec.novel})
    for (auto id : *set)
      if (!by_class.count(id)) throw ContractError("split names class " + std::to_string(id) + " with no samples");

  Split out;
  std::mt19937_64 rng(spec.seed);
  for (auto id : spec.base) {
    auto idx = by_class[id];
    if (idx.size() < spec.shots) {
      throw InsufficiencyError("class " + std::to_string(id) + " has " + std::to_string(idx.size()) +
                               " samples, fewer than " + std::to_string(spec.shots) + " shots");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    std::sort(idx.begin(), idx.begin() + spec.shots);
    std::sort(idx.begin() + spec.shots, idx.end());
    out.base_train.insert(out.base_train.end(), idx.begin(), idx.begin() + spec.shots);
    out.base_test.insert(out.base_test.end(), idx.begin() + spec.shots, idx.end());
  }
  for (auto id : spec.novel) {
    const auto& idx = by_class[id];
    out.novel_test.insert(out.novel_test.end(), idx.begin(), idx.end());
  }
  return out;
}

SplitSpec default_split(const Dataset& dataset, std::size_t base_count, std::size_t shots, std::uint64_t seed) {
  if (base_count == 0 || base_count >= dataset.classes.size()) {
    throw ContractError("base class count must be in [1, " + std::to_string(dataset.classes.size()) + ")");
  }
  SplitSpec s;
  s.shots = shots;
  s.seed = seed;
  for (std::size_t i = 0; i < dataset.classes.size(); ++i)
    (i < base_count ? s.base : s.novel).push_back(dataset.classes[i].id);
  return s;
}

std::vector<ConceptClass> primary_classes(std::size_t count) { return grid(kPrimaryColors, kPrimaryShapes, count, 17, 0); }

std::vector<ConceptClass> secondary_classes(std::size_t count) {
  return grid(kSecondaryColors, kSecondaryShapes, count, 29, 100);
}

std::string Shift::name() const {
  std::ostringstream s;
  switch (kind) {
    case ShiftKind::gaussian_noise: s << "gaussian_noise"; break;
    case ShiftKind::hue_rotate: s << "hue_rotate"; break;
    case ShiftKind::sketch: s << "sketch"; break;
    case ShiftKind::blur: s << "blur"; break;
  }
  s << "(" << amount << ")";
  return s.str();
}

void Shift::validate() const {
  auto fail = [this](const char* range) { throw ParameterError(name() + ": amount outside " + range); };
  switch (kind) {
    case ShiftKind::gaussian_noise:
      if (!(amount >= 0 && amount <= 1)) fail("[0, 1]");
      break;
    case ShiftKind::hue_rotate:
      if (!(amount >= -360 && amount <= 360)) fail("[-360, 360]");
      break;
    case ShiftKind::sketch:
      if (!(amount >= 0 && amount <= 1)) fail("[0, 1]");
      break;
    case ShiftKind::blur:
      if (!(amount >= 0 && amount <= 8) || amount != std::floor(amount)) fail("the integers 0..8");
      break;
  }
}

ShiftKind parse_shift_kind(std::string_view s) {
  if (s == "gaussian_noise") return ShiftKind::gaussian_noise;
  if (s == "hue_rotate") return ShiftKind::hue_rotate;
  if (s == "sketch") return ShiftKind::sketch;
  if (s == "blur") return ShiftKind::blur;
  throw ConfigError("unknown shift '" + std::string(s) + "' (expected gaussian_noise, hue_rotate, sketch, blur)");
}

Sample domain_shift(const Sample& sample, const Shift& shift, std::uint64_t seed) {
  shift.validate();
  check_sample(sample);
  Sample out = sample;
  const std::size_t n = kImageSize;
  auto& img = out.image;
  switch (shift.kind) {
    case ShiftKind::gaussian_noise: {
      if (shift.amount == 0) break;
      std::mt19937_64 rng(mix(seed, sample.id));
      std::normal_distribution<double> d(0.0, shift.amount);
      for (auto& v : img.data()) v = clamp01(v + d(rng));
      break;
    }
    case ShiftKind::hue_rotate: {
      for (std::size_t p = 0; p < n * n; ++p) {
        float* q = img.data().data() + p * 3;
        const auto r = rotate_hue({q[0], q[1], q[2]}, shift.amount);
        for (std::size_t ch = 0; ch < 3; ++ch) q[ch] = clamp01(r[ch]);
      }
      break;
    }
    case ShiftKind::sketch: {
      if (shift.amount == 0) break;
      // Dark Sobel edges of luminance on white, blended by `amount`.
      std::vector<double> lum(n * n);
      for (std::size_t p = 0; p < n * n; ++p) {
        const float* q = sample.image.data().data() + p * 3;
        lum[p] = 0.299 * q[0] + 0.587 * q[1] + 0.114 * q[2];
      }
      auto at = [&](long y, long x) {
        y = std::clamp<long>(y, 0, long(n) - 1);
        x = std::clamp<long>(x, 0, long(n) - 1);
        return lum[y * n + x];
      };
      for (long y = 0; y < long(n); ++y)
        for (long x = 0; x < long(n); ++x) {
          const double gx = at(y - 1, x + 1) + 2 * at(y, x + 1) + at(y + 1, x + 1) - at(y - 1, x - 1) -
                            2 * at(y, x - 1) - at(y + 1, x - 1);
          const double gy = at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1) - at(y - 1, x - 1) -
                            2 * at(y - 1, x) - at(y - 1, x + 1);
          const double line = 1.0 - std::min(1.0, 2.0 * std::sqrt(gx * gx + gy * gy));
          float* q = img.data().data() + (y * n + x) * 3;
          for (std::size_t ch = 0; ch < 3; ++ch) q[ch] = clamp01((1 - shift.amount) * q[ch] + shift.amount * line);
        }
      break;
    }
    case ShiftKind::blur: {
      const long r = static_cast<long>(shift.amount);
      if (r == 0) break;
      const auto& src = sample.image;
      for (long y = 0; y < long(n); ++y)
        for (long x = 0; x < long(n); ++x)
          for (std::size_t ch = 0; ch < 3; ++ch) {
            double s = 0;
            for (long dy = -r; dy <= r; ++dy)
              for (long dx = -r; dx <= r; ++dx) {
                const long yy = std::clamp<long>(y + dy, 0, long(n) - 1), xx = std::clamp<long>(x + dx, 0, long(n) - 1);
                s += src[(yy * n + xx) * 3 + ch];
              }
            img[(y * n + x) * 3 + ch] = clamp01(s / double((2 * r + 1) * (2 * r + 1)));
          }
      break;
    }
  }
  return out;
}

std::string serialize_dataset(const Dataset& dataset) {
  io::ByteWriter w;
  w.put_bytes("MPDS", 4);
  w.put<std::uint32_t>(kDatasetVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dataset.samples.size()));
  w.put<std::uint32_t>(kImageSize);
  w.put<std::uint32_t>(kImageSize);
  w.put<std::uint32_t>(3);
  for (const auto& s : dataset.samples) {
    check_sample(s);
    w.put<std::uint32_t>(s.label);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(s.caption.size()));
    for (auto t : s.caption) w.put<std::uint32_t>(t);
    w.put_bytes(s.image.data().data(), s.image.size() * sizeof(float));
  }
  return w.release();
}

Dataset deserialize_dataset(std::string_view bytes) {
  io::ByteReader r(bytes, "dataset file");
  char magic[4];
  r.get_bytes(magic, 4);
  if (std::string_view(magic, 4) != "MPDS") throw FormatError("dataset file: bad magic, expected MPDS");
  const auto version = r.get<std::uint32_t>();
  if (version != kDatasetVersion) {
    throw VersionError("dataset file: version " + std::to_string(version) + ", this build reads version " +
                       std::to_string(kDatasetVersion));
  }
  const auto count = r.get<std::uint32_t>();
  const auto h = r.get<std::uint32_t>(), wd = r.get<std::uint32_t>(), ch = r.get<std::uint32_t>();
  if (h != kImageSize || wd != kImageSize || ch != 3) {
    throw FormatError("dataset file: image shape " + std::to_string(h) + "x" + std::to_string(wd) + "x" +
                      std::to_string(ch) + " is not 32x32x3");
  }
  Dataset ds;
  // Each sample needs at least 8 header bytes and its pixels.
  if (std::uint64_t(count) * (8 + h * wd * ch * 4) > r.remaining()) {
    throw FormatError("dataset file: truncated, header announces " + std::to_string(count) + " samples");
  }
  ds.samples.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Sample s;
    s.id = i;
    s.label = r.get<std::uint32_t>();
    const auto len = r.get<std::uint32_t>();
    if (std::uint64_t(len) * 4 > r.remaining()) throw FormatError("dataset file: truncated caption");
    s.caption.resize(len);
    for (auto& t : s.caption) t = r.get<std::uint32_t>();
    s.image = Tensor<float>({h, wd, ch});
    r.get_bytes(s.image.data().data(), s.image.size() * sizeof(float));
    ds.samples.push_back(std::move(s));
  }
  if (r.remaining() != 0) throw FormatError("dataset file: " + std::to_string(r.remaining()) + " trailing bytes");
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path) { io::write_file(path, serialize_dataset(dataset)); }

Dataset load_dataset(const std::string& path) { return deserialize_dataset(io::read_file(path)); }

}  // namespace maple::data
