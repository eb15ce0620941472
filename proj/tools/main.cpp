// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

// koodos {generate|train|eval|extrapolate|spectrum} --config <file> [--out <dir>]
//        [--checkpoint <file>] [--times t1,t2,...]
// Failures print one line "error[<category>]: <message>" to stderr.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "commands.hpp"
#include "koodos/error.hpp"

namespace {

int exit_code(const std::string& category) {
  static const std::map<std::string, int> codes = {
      {"usage", 2},   {"config", 3},      {"io", 4},          {"format", 5},
      {"shape", 6},   {"numeric", 7},     {"convergence", 8}, {"invalid_argument", 9},
  };
  const auto it = codes.find(category);
  return it == codes.end() ? 1 : it->second;
}

int fail(const std::string& category, const std::string& message) {
  std::string line = message;
  for (char& c : line)
    if (c == '\n') c = ' ';
  std::cerr << "error[" << category << "]: " << line << '\n';
  return exit_code(category);
}

}  // namespace

int main(int argc, char** argv) {
  using koodos::cli::Options;
  CLI::App app{"Continuous-time domain generalization with Koopman parameter dynamics"};
  app.require_subcommand(1);
  Options opt;
  std::string config, out, checkpoint;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Run configuration (JSON)");
    sub->add_option("--out", out, "Output directory");
  };
  std::map<CLI::App*, std::function<std::string(const Options&)>> commands;
  CLI::App* gen = app.add_subcommand("generate", "Write the synthetic dataset described by the config");
  add_common(gen);
  commands[gen] = koodos::cli::cmd_generate;
  CLI::App* train = app.add_subcommand("train", "Train a system; writes checkpoint, history and metrics");
  add_common(train);
  commands[train] = koodos::cli::cmd_train;
  CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint on the config's dataset");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file (default <out>/checkpoint.json)");
  eval->add_option("--split", opt.split, "train, test or all")->capture_default_str();
  commands[eval] = koodos::cli::cmd_eval;
  CLI::App* extra = app.add_subcommand("extrapolate", "Project generated parameters at query times");
  add_common(extra);
  extra->add_option("--checkpoint", checkpoint, "Checkpoint file");
  extra->add_option("--times", opt.times, "Comma-separated query times")->delimiter(',')->required();
  commands[extra] = koodos::cli::cmd_extrapolate;
  CLI::App* spec = app.add_subcommand("spectrum", "Eigenvalues and stability of the learned operator");
  add_common(spec);
  spec->add_option("--checkpoint", checkpoint, "Checkpoint file");
  commands[spec] = koodos::cli::cmd_spectrum;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (!config.empty()) opt.config = config;
    if (!out.empty()) opt.out = out;
    if (!checkpoint.empty()) opt.checkpoint = checkpoint;
    if (const char* s = std::getenv("KOODOS_SEED")) opt.seed_override = koodos::cli::parse_seed_override(s);
    for (auto& [sub, run] : commands)
      if (sub->parsed()) std::cout << run(opt) << '\n';
  } catch (const koodos::Error& e) {
    return fail(e.category(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
