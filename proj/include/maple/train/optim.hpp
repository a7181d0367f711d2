// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace maple::train {

/// Heavy-ball SGD: v ← μ·v + g, p ← p − lr·v. `velocity` starts at zero and
/// must match `params` in length.
void sgd_step(std::span<float> params, std::span<const float> grads, double lr, double momentum,
              std::span<float> velocity);
void sgd_step(std::span<double> params, std::span<const double> grads, double lr, double momentum,
              std::span<double> velocity);

/// Adam with bias correction, used for backbone pretraining only.
struct Adam {
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;
  std::vector<std::vector<float>> m, v;

  /// Call once per optimizer step, before the per-tensor updates.
  void begin_step() { ++step; }
  void update(std::size_t slot, std::span<float> params, std::span<const float> grads);
};

}  // namespace maple::train
