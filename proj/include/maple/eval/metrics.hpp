// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace maple::eval {

/// 2ab/(a+b). UndefinedMetricError unless both are positive.
double harmonic_mean(double base, double novel);

/// Accuracies are percentages. Single-arm records (cross-dataset targets,
/// shifted copies) leave novel_acc and hm empty.
struct MetricsRecord {
  std::string label;
  double base_acc = 0.0;
  std::optional<double> novel_acc;
  std::optional<double> hm;
  std::map<std::uint32_t, double> per_class;  // class id -> accuracy
  std::size_t seeds = 1;
  std::optional<std::uint64_t> flops;

  /// InvariantViolation when an accuracy leaves [0, 100] or hm disagrees with
  /// the arms by more than 1e-9.
  void validate() const;
  /// One JSON object on one line, keys in a fixed order.
  std::string to_json() const;
};

/// Arm and per-class means over seeds. hm is recomputed from the mean arms.
MetricsRecord mean_record(const std::vector<MetricsRecord>& runs, const std::string& label);

}  // namespace maple::eval
