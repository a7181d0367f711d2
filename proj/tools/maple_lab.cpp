// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "maple/cli/commands.hpp"
#include "maple/error.hpp"
#include "maple/util/binary_io.hpp"

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out) {
  cmd->add_option("--config", c.config_path, "flat key = value config file");
  cmd->add_option("--set", c.sets, "override one key, key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "run seed, overrides the seed key");
  auto* out = cmd->add_option("--out", c.out, "run directory, must be absent or empty");
  if (needs_out) out->required();
}

maple::cli::RunConfig resolve(const Common& c) {
  maple::cli::RunConfig cfg;
  if (!c.config_path.empty()) cfg.merge(maple::io::read_file(c.config_path));
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw maple::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maple_lab: prompt learning on a frozen dual encoder"};
  app.footer(maple::cli::key_help() + "\nEnvironment: MAPLE_LAB_THREADS caps worker threads (0 or unset = all cores).\n"
             "Exit status: 0 ok, 1 runtime failure, 2 configuration error, 3 invariant violation.");
  app.require_subcommand(1);

  using Fn = void (*)(const maple::cli::RunConfig&, const maple::cli::RunDir&, std::ostream&);
  struct Spec {
    const char* name;
    const char* help;
    Fn fn;
  };
  const Spec specs[] = {
      {"gen-data", "render the pretraining, benchmark and secondary corpora", maple::cli::cmd_gen_data},
      {"pretrain", "contrastive pretraining of the backbone", maple::cli::cmd_pretrain},
      {"tune", "prompt tuning on the base classes, then base-to-novel evaluation", maple::cli::cmd_tune},
      {"eval", "base-to-novel, cross-dataset and domain-shift evaluation", maple::cli::cmd_eval},
      {"sweep", "tune and evaluate along one design axis over several seeds", maple::cli::cmd_sweep},
      {"export-embeddings", "image embeddings with optional principal coordinates", maple::cli::cmd_export_embeddings},
  };
  std::vector<Common> commons(std::size(specs) + 2);
  std::function<int()> action;
  for (std::size_t i = 0; i < std::size(specs); ++i) {
    auto* cmd = app.add_subcommand(specs[i].name, specs[i].help);
    add_common(cmd, commons[i], true);
    cmd->callback([&, i] {
      action = [&, i] {
        const auto cfg = resolve(commons[i]);
        const auto dir = maple::cli::RunDir::create(commons[i].out);
        specs[i].fn(cfg, dir, std::cout);
        return 0;
      };
    });
  }

  std::string size = "tiny";
  auto& gc = commons[std::size(specs)];
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every prompt gradient");
  add_common(gradcheck, gc, false);
  gradcheck->add_option("--size", size, "model size (tiny)")->capture_default_str();
  gradcheck->callback([&] {
    action = [&] {
      const auto cfg = resolve(gc);
      std::optional<maple::cli::RunDir> dir;
      if (!gc.out.empty()) dir = maple::cli::RunDir::create(gc.out);
      maple::cli::cmd_gradcheck(size, cfg.seed, dir, std::cout);
      return 0;
    };
  });

  std::string preset = "clip-b16";
  std::string variant;
  auto& fc = commons[std::size(specs) + 1];
  auto* flops = app.add_subcommand("flops", "analytic FLOPs and overhead over text_shallow");
  add_common(flops, fc, false);
  flops->add_option("--preset", preset, "clip-b16 or config")->capture_default_str();
  flops->add_option("--variant", variant, "shorthand for --set variant=...");
  flops->callback([&] {
    action = [&] {
      if (!variant.empty()) fc.sets.push_back("variant=" + variant);
      const auto cfg = resolve(fc);
      std::optional<maple::cli::RunDir> dir;
      if (!fc.out.empty()) dir = maple::cli::RunDir::create(fc.out);
      maple::cli::cmd_flops(cfg, preset, dir, std::cout);
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    const int code = maple::cli::exit_code(e);
    std::fprintf(stderr, "error: %s\n", e.what());
    return code;
  }
}
