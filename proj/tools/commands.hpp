// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "koodos/koodos.hpp"
#include "run_config.hpp"

namespace koodos::cli {

inline constexpr int kMetricsFormatVersion = 1;

struct Options {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> checkpoint;
  std::vector<double> times;
  std::string split = "test";
  std::optional<std::uint64_t> seed_override;  // from KOODOS_SEED
};

// Each command writes its artifacts and returns a short summary for stdout.
std::string cmd_generate(const Options& opt);
std::string cmd_train(const Options& opt);
std::string cmd_eval(const Options& opt);
std::string cmd_extrapolate(const Options& opt);
std::string cmd_spectrum(const Options& opt);

nlohmann::json metrics_json(const std::string& dataset, std::uint64_t seed, const std::string& split,
                            const Evaluation& ev, std::optional<double> offline,
                            std::optional<double> lastdomain);

}  // namespace koodos::cli
