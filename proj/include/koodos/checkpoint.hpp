// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON forms of the training configuration and of a trained system.
// Numbers are written as shortest round-trip decimals, so a save/load
// cycle is bit exact.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "koodos/koodos.hpp"

namespace koodos {

inline constexpr int kCheckpointFormatVersion = 1;

nlohmann::json config_to_json(const KoodosConfig& config);
/// Missing fields keep their defaults; unknown fields and type mismatches
/// raise ConfigError naming the dotted path, e.g. "koodos.ablation.no_dyna".
KoodosConfig config_from_json(const nlohmann::json& j, const std::string& path = "koodos",
                              KoodosConfig base = {});
/// Reads an MlpSpec section {"widths": [...], "task": "..."}.
nets::MlpSpec model_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json system_to_json(const KoodosSystem& sys);
KoodosSystem system_from_json(const nlohmann::json& j);

void save_checkpoint(const KoodosSystem& sys, const std::filesystem::path& file);
KoodosSystem load_checkpoint(const std::filesystem::path& file);

}  // namespace koodos
