// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/train/checkpoint.hpp"

#include <vector>

#include "maple/error.hpp"
#include "maple/util/binary_io.hpp"

namespace maple::train {
namespace {

using diff::Shape;
using diff::Tensor;

void put_tensor(io::ByteWriter& w, const std::string& name, const Tensor<float>& t) {
  if (name.size() > 0xffff) throw FormatError("tensor name too long: " + name);
  if (t.rank() > 0xff) throw FormatError("tensor rank too large: " + name);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
  w.put_bytes(name.data(), name.size());
  w.put<std::uint8_t>(static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.shape()) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  w.put_bytes(t.data().data(), t.size() * sizeof(float));
}

struct Entry {
  std::string name;
  Tensor<float> value;
};

Entry get_tensor(io::ByteReader& r) {
  Entry e;
  const auto len = r.get<std::uint16_t>();
  e.name.resize(len);
  r.get_bytes(e.name.data(), len);
  const auto rank = r.get<std::uint8_t>();
  Shape shape(rank);
  std::uint64_t count = 1;
  for (auto& d : shape) {
    d = r.get<std::uint32_t>();
    if (d == 0) throw FormatError("checkpoint: tensor " + e.name + " has a zero extent");
    count *= d;
  }
  if (count * sizeof(float) > r.remaining()) throw FormatError("checkpoint: truncated data for tensor " + e.name);
  std::vector<float> values(count);
  r.get_bytes(values.data(), count * sizeof(float));
  e.value = Tensor<float>(std::move(shape), std::move(values));
  return e;
}

Tensor<float> ints(const std::vector<std::size_t>& v) {
  std::vector<float> f;
  for (auto x : v) {
    if (x >= (1u << 24)) throw FormatError("checkpoint: integer field too large for exact storage");
    f.push_back(static_cast<float>(x));
  }
  const std::size_t n = f.size();
  return Tensor<float>({n}, std::move(f));
}

std::vector<std::size_t> as_ints(const Entry& e, std::size_t expected) {
  if (e.value.rank() != 1 || e.value.size() != expected) {
    throw FormatError("checkpoint: " + e.name + " must hold " + std::to_string(expected) + " integers");
  }
  std::vector<std::size_t> out;
  for (float f : e.value.values()) {
    if (f < 0 || f != static_cast<float>(static_cast<std::size_t>(f))) {
      throw FormatError("checkpoint: " + e.name + " holds a non-integer");
    }
    out.push_back(static_cast<std::size_t>(f));
  }
  return out;
}

std::vector<std::size_t> model_fields(const model::ModelConfig& c) {
  return {c.layers,         c.vision_width, c.text_width, c.embed_dim,  c.image_size, c.patch_size,
          c.context_length, c.vision_heads, c.text_heads, c.vocab_size, c.mlp_ratio};
}

model::ModelConfig model_from(const std::vector<std::size_t>& f) {
  model::ModelConfig c;
  c.layers = f[0];
  c.vision_width = f[1];
  c.text_width = f[2];
  c.embed_dim = f[3];
  c.image_size = f[4];
  c.patch_size = f[5];
  c.context_length = f[6];
  c.vision_heads = f[7];
  c.text_heads = f[8];
  c.vocab_size = f[9];
  c.mlp_ratio = f[10];
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: stored model config is invalid: ") + e.what());
  }
  return c;
}

// Fills every tensor of `target` from consecutive entries, checking names and shapes.
template <typename Params>
void fill(Params& target, const std::vector<Entry>& entries, std::size_t& pos) {
  target.visit([&](const std::string& name, Tensor<float>& t) {
    if (pos >= entries.size()) throw FormatError("checkpoint: missing tensor " + name);
    const auto& e = entries[pos++];
    if (e.name != name) throw FormatError("checkpoint: expected tensor " + name + ", found " + e.name);
    if (e.value.shape() != t.shape()) {
      throw FormatError("checkpoint: tensor " + name + " has shape " + diff::shape_string(e.value.shape()) +
                        ", expected " + diff::shape_string(t.shape()));
    }
    t = e.value;
  });
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::vector<std::pair<std::string, Tensor<float>>> tensors;
  if (ckpt.backbone) {
    tensors.emplace_back("meta.model", ints(model_fields(ckpt.backbone->config)));
    ckpt.backbone->visit([&](const std::string& n, const Tensor<float>& t) { tensors.emplace_back(n, t); });
  }
  if (ckpt.prompts) {
    const auto& b = *ckpt.prompts;
    const auto& c = b.config;
    tensors.emplace_back("meta.prompt", ints({static_cast<std::size_t>(c.variant), c.depth, c.length,
                                              static_cast<std::size_t>(c.init), static_cast<std::size_t>(c.direction),
                                              c.template_offset, b.text_width, b.vision_width}));
    b.visit([&](const std::string& n, const Tensor<float>& t) { tensors.emplace_back(n, t); });
  }
  if (!ckpt.config_echo.empty()) {
    std::vector<float> bytes;
    for (unsigned char ch : ckpt.config_echo) bytes.push_back(static_cast<float>(ch));
    const std::size_t n = bytes.size();
    tensors.emplace_back("meta.config", Tensor<float>({n}, std::move(bytes)));
  }
  if (ckpt.step >= (1u << 24)) throw FormatError("checkpoint: step counter too large for exact storage");
  tensors.emplace_back("meta.step", Tensor<float>::scalar(static_cast<float>(ckpt.step)));

  io::ByteWriter w;
  w.put_bytes("MPLT", 4);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) put_tensor(w, name, t);
  return w.release();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  io::ByteReader r(bytes, "checkpoint");
  char magic[4];
  r.get_bytes(magic, 4);
  if (std::string_view(magic, 4) != "MPLT") throw FormatError("checkpoint: bad magic, expected MPLT");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint: version " + std::to_string(version) + ", this build reads version " +
                       std::to_string(kCheckpointVersion));
  }
  const auto count = r.get<std::uint32_t>();
  std::vector<Entry> entries;
  for (std::uint32_t i = 0; i < count; ++i) entries.push_back(get_tensor(r));
  if (r.remaining() != 0) throw FormatError("checkpoint: " + std::to_string(r.remaining()) + " trailing bytes");

  Checkpoint ckpt;
  std::size_t pos = 0;
  auto next_is = [&](const char* name) { return pos < entries.size() && entries[pos].name == name; };
  if (next_is("meta.model")) {
    auto cfg = model_from(as_ints(entries[pos++], 11));
    auto params = model::BackboneParams<float>::init(cfg, 0);
    fill(params, entries, pos);
    ckpt.backbone = std::move(params);
  }
  if (next_is("meta.prompt")) {
    const auto f = as_ints(entries[pos++], 8);
    prompts::PromptConfig pc;
    if (f[0] > 6 || f[3] > 2 || f[4] > 1) throw FormatError("checkpoint: meta.prompt holds an unknown enum value");
    pc.variant = static_cast<prompts::Variant>(f[0]);
    pc.depth = f[1];
    pc.length = f[2];
    pc.init = static_cast<prompts::InitMode>(f[3]);
    pc.direction = static_cast<prompts::CouplingDirection>(f[4]);
    pc.template_offset = f[5];
    model::ModelConfig widths;
    widths.text_width = f[6];
    widths.vision_width = f[7];
    widths.layers = ckpt.backbone ? ckpt.backbone->config.layers : std::max<std::size_t>(pc.depth, 1);
    prompts::PromptBank<float> bank;
    try {
      bank = prompts::PromptBank<float>::zeros(pc, widths);
    } catch (const ConfigError& e) {
      throw FormatError(std::string("checkpoint: stored prompt config is invalid: ") + e.what());
    }
    fill(bank, entries, pos);
    ckpt.prompts = std::move(bank);
  }
  if (next_is("meta.config")) {
    const auto& e = entries[pos++];
    for (float f : e.value.values()) {
      if (f < 0 || f > 255 || f != static_cast<float>(static_cast<int>(f))) {
        throw FormatError("checkpoint: meta.config holds a non-byte value");
      }
      ckpt.config_echo.push_back(static_cast<char>(static_cast<unsigned char>(f)));
    }
  }
  if (!next_is("meta.step")) {
    throw FormatError("checkpoint: unexpected tensor " +
                      (pos < entries.size() ? entries[pos].name : std::string("<end>")) + ", expected meta.step");
  }
  const auto& step = entries[pos++];
  if (step.value.rank() != 0) throw FormatError("checkpoint: meta.step must be a scalar");
  ckpt.step = static_cast<std::uint64_t>(step.value[0]);
  if (pos != entries.size()) throw FormatError("checkpoint: unexpected tensor " + entries[pos].name);
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  io::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) { return deserialize_checkpoint(io::read_file(path)); }

}  // namespace maple::train
