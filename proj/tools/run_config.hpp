// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "koodos/domains.hpp"
#include "koodos/koodos.hpp"

namespace koodos::cli {

/// Either a generator recipe or a dataset directory written by `generate`.
struct DatasetSection {
  std::optional<std::filesystem::path> path;
  domains::MoonsRecipe moons;
  double test_fraction = 0.3;
  std::optional<Metric> metric;  // defaults by task: error_rate or mae
};

/// One JSON file describing a whole experiment:
///   {"seed": 0,
///    "dataset": {"generator": "moons", ...} | {"path": "dir"},
///    "model": {"widths": [...], "task": "binary-classification"},
///    "koodos": {KoodosConfig fields},
///    "output": "dir"}
/// `seed` feeds both data generation and training.
struct RunConfig {
  DatasetSection dataset;
  KoodosConfig koodos;
  std::filesystem::path output = "koodos-run";
  std::uint64_t seed = 0;
};

/// Relative paths resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& file);

/// Replaces every seed by `seed`.
void apply_seed(RunConfig& rc, std::uint64_t seed);

/// Parses a KOODOS_SEED value; throws ConfigError on anything but an
/// unsigned decimal integer.
std::uint64_t parse_seed_override(const std::string& text);

domains::DomainSequence load_dataset(const RunConfig& rc);
Metric default_metric(const RunConfig& rc);

}  // namespace koodos::cli
