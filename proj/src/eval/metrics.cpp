// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/eval/metrics.hpp"

#include <cmath>

#include "json.hpp"
#include "maple/error.hpp"

namespace maple::eval {

double harmonic_mean(double base, double novel) {
  if (!(base > 0) || !(novel > 0)) {
    throw UndefinedMetricError("harmonic mean needs two positive accuracies, got " + std::to_string(base) +
                               " and " + std::to_string(novel));
  }
  return 2.0 * base * novel / (base + novel);
}

void MetricsRecord::validate() const {
  auto in_range = [](double a) { return a >= 0.0 && a <= 100.0; };
  if (!in_range(base_acc) || (novel_acc && !in_range(*novel_acc))) {
    throw InvariantViolation("accuracy outside [0, 100] in record '" + label + "'");
  }
  for (const auto& [id, acc] : per_class)
    if (!in_range(acc)) throw InvariantViolation("class " + std::to_string(id) + " accuracy outside [0, 100]");
  if (hm.has_value() != novel_acc.has_value()) throw InvariantViolation("hm present without a novel arm");
  if (hm && std::abs(*hm - harmonic_mean(base_acc, *novel_acc)) > 1e-9) {
    throw InvariantViolation("hm of record '" + label + "' does not match its arms");
  }
}

std::string MetricsRecord::to_json() const {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["base_acc"] = base_acc;
  j["novel_acc"] = novel_acc ? nlohmann::ordered_json(*novel_acc) : nlohmann::ordered_json(nullptr);
  j["hm"] = hm ? nlohmann::ordered_json(*hm) : nlohmann::ordered_json(nullptr);
  j["seeds"] = seeds;
  auto pc = nlohmann::ordered_json::object();
  for (const auto& [id, acc] : per_class) pc[std::to_string(id)] = acc;
  j["per_class"] = pc;
  if (flops) j["flops"] = *flops;
  return j.dump();
}

MetricsRecord mean_record(const std::vector<MetricsRecord>& runs, const std::string& label) {
  if (runs.empty()) throw ContractError("no records to average");
  MetricsRecord out;
  out.label = label;
  out.seeds = runs.size();
  const bool two_arm = runs.front().novel_acc.has_value();
  double novel = 0;
  std::map<std::uint32_t, std::size_t> counts;
  for (const auto& r : runs) {
    if (r.novel_acc.has_value() != two_arm) throw ContractError("cannot average single- and two-arm records");
    out.base_acc += r.base_acc;
    if (two_arm) novel += *r.novel_acc;
    for (const auto& [id, acc] : r.per_class) {
      out.per_class[id] += acc;
      ++counts[id];
    }
  }
  const double n = double(runs.size());
  out.base_acc /= n;
  for (auto& [id, acc] : out.per_class) acc /= double(counts[id]);
  if (two_arm) {
    out.novel_acc = novel / n;
    out.hm = harmonic_mean(out.base_acc, *out.novel_acc);
  }
  out.flops = runs.front().flops;
  return out;
}

}  // namespace maple::eval
