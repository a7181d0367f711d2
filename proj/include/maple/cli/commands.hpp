// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "maple/cli/run_config.hpp"

namespace maple::cli {

/// Output directory of one command. It must be absent or empty, and each file
/// in it is written once.
class RunDir {
 public:
  /// ConfigError when the directory exists and is not empty.
  static RunDir create(const std::filesystem::path& path);
  /// IoError when the file already exists.
  void write(const std::string& name, const std::string& bytes) const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// 0 for success; 2 for configuration errors, 3 for invariant violations,
/// 1 for anything else.
int exit_code(const std::exception& e);

// Every command writes config.cfg to the run directory before anything else and
// prints a human summary to `summary`. Errors propagate as exceptions.

/// benchmark.mpds, pretrain.mpds and secondary.mpds.
void cmd_gen_data(const RunConfig& cfg, const RunDir& out, std::ostream& summary);
/// backbone.ckpt, metrics.jsonl (one line per epoch), log.jsonl (per step).
void cmd_pretrain(const RunConfig& cfg, const RunDir& out, std::ostream& summary);
/// prompts.ckpt, metrics.jsonl (the base-to-novel record), log.jsonl.
void cmd_tune(const RunConfig& cfg, const RunDir& out, std::ostream& summary);
/// metrics.jsonl: base-to-novel, cross-dataset and domain-shift records.
void cmd_eval(const RunConfig& cfg, const RunDir& out, std::ostream& summary);
/// metrics.jsonl (per-seed and mean records), sweep.csv.
void cmd_sweep(const RunConfig& cfg, const RunDir& out, std::ostream& summary);
/// embeddings.csv over every benchmark sample.
void cmd_export_embeddings(const RunConfig& cfg, const RunDir& out, std::ostream& summary);

/// Prompt gradient check at the named size. Prints the maximum relative
/// errors; InvariantViolation when either exceeds its threshold (1e-6 for
/// 64-bit, 1e-3 for 32-bit).
void cmd_gradcheck(const std::string& size, std::uint64_t seed, const std::optional<RunDir>& out,
                   std::ostream& summary);

/// FLOP report for the variant, with its overhead over text_shallow at the
/// same prompt length. preset "clip-b16" uses ViT-B/16 dimensions and the
/// variant preset for K = 12; "config" uses the model and prompt keys.
void cmd_flops(const RunConfig& cfg, const std::string& preset, const std::optional<RunDir>& out,
               std::ostream& summary);

}  // namespace maple::cli
