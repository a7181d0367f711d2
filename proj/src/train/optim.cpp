// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/train/optim.hpp"

#include <cmath>
#include <string>

#include "maple/error.hpp"

namespace maple::train {
namespace {

template <typename T>
void sgd(std::span<T> p, std::span<const T> g, double lr, double mu, std::span<T> v) {
  if (p.size() != g.size() || p.size() != v.size()) {
    throw DimensionError("sgd_step: params, grads and velocity sizes differ (" + std::to_string(p.size()) + ", " +
                         std::to_string(g.size()) + ", " + std::to_string(v.size()) + ")");
  }
  if (!(lr >= 0) || !(mu >= 0 && mu < 1)) throw ParameterError("sgd_step: need lr >= 0 and momentum in [0, 1)");
  const T tlr = static_cast<T>(lr), tmu = static_cast<T>(mu);
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[i] = tmu * v[i] + g[i];
    p[i] -= tlr * v[i];
  }
}

}  // namespace

void sgd_step(std::span<float> p, std::span<const float> g, double lr, double mu, std::span<float> v) {
  sgd<float>(p, g, lr, mu, v);
}
void sgd_step(std::span<double> p, std::span<const double> g, double lr, double mu, std::span<double> v) {
  sgd<double>(p, g, lr, mu, v);
}

void Adam::update(std::size_t slot, std::span<float> p, std::span<const float> g) {
  if (slot >= m.size()) {
    m.resize(slot + 1);
    v.resize(slot + 1);
  }
  if (m[slot].empty()) {
    m[slot].assign(p.size(), 0.0f);
    v[slot].assign(p.size(), 0.0f);
  }
  if (p.size() != g.size() || m[slot].size() != p.size()) throw DimensionError("adam: size mismatch");
  const double c1 = 1.0 - std::pow(beta1, double(step)), c2 = 1.0 - std::pow(beta2, double(step));
  auto& ms = m[slot];
  auto& vs = v[slot];
  for (std::size_t i = 0; i < p.size(); ++i) {
    ms[i] = static_cast<float>(beta1 * ms[i] + (1 - beta1) * g[i]);
    vs[i] = static_cast<float>(beta2 * vs[i] + (1 - beta2) * double(g[i]) * g[i]);
    p[i] -= static_cast<float>(lr * (ms[i] / c1) / (std::sqrt(vs[i] / c2) + eps));
  }
}

}  // namespace maple::train
