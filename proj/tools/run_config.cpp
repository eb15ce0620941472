// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "koodos/checkpoint.hpp"
#include "koodos/error.hpp"

namespace koodos::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError(path + "." + key + ": unknown field");
}

double number(const json& j, const std::string& key, const std::string& path, double def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return j[key].get<double>();
}

std::uint64_t count(const json& j, const std::string& key, const std::string& path, std::uint64_t def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number_unsigned()) throw ConfigError(path + "." + key + ": expected a non-negative integer");
  return j[key].get<std::uint64_t>();
}

std::string text(const json& j, const std::string& key, const std::string& path, const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return j[key].get<std::string>();
}

DatasetSection parse_dataset(const json& j, const std::filesystem::path& base) {
  const std::string p = "dataset";
  reject_unknown(j, p,
                 {"generator", "path", "domain_count", "t_min", "t_max", "n_per_class", "noise_sd",
                  "degrees_per_unit", "test_fraction", "metric"});
  DatasetSection d;
  if (j.contains("path")) {
    if (j.contains("generator")) throw ConfigError(p + ": give either generator or path, not both");
    for (const char* k : {"domain_count", "t_min", "t_max", "n_per_class", "noise_sd", "degrees_per_unit"})
      if (j.contains(k)) throw ConfigError(p + "." + k + ": only valid with a generator");
    const std::filesystem::path path = text(j, "path", p, "");
    d.path = path.is_relative() ? base / path : path;
  } else {
    const std::string gen = text(j, "generator", p, "moons");
    if (gen != "moons") throw ConfigError(p + ".generator: unknown generator '" + gen + "' (expected: moons)");
    auto& m = d.moons;
    m.domain_count = count(j, "domain_count", p, m.domain_count);
    m.t_min = number(j, "t_min", p, m.t_min);
    m.t_max = number(j, "t_max", p, m.t_max);
    m.n_per_class = count(j, "n_per_class", p, m.n_per_class);
    m.noise_sd = number(j, "noise_sd", p, m.noise_sd);
    m.degrees_per_unit = number(j, "degrees_per_unit", p, m.degrees_per_unit);
    if (m.domain_count < 2) throw ConfigError(p + ".domain_count: need at least 2 domains to split");
    if (!(m.t_max > m.t_min)) throw ConfigError(p + ".t_max: must exceed t_min");
    if (m.n_per_class == 0) throw ConfigError(p + ".n_per_class: must be positive");
    if (!(m.noise_sd >= 0)) throw ConfigError(p + ".noise_sd: must be non-negative");
  }
  d.test_fraction = number(j, "test_fraction", p, d.test_fraction);
  if (!(d.test_fraction > 0 && d.test_fraction < 1)) throw ConfigError(p + ".test_fraction: must lie in (0, 1)");
  if (j.contains("metric")) {
    try {
      d.metric = metric_from_string(text(j, "metric", p, ""));
    } catch (const InvalidArgument& e) {
      throw ConfigError(p + ".metric: " + e.what());
    }
  }
  return d;
}

}  // namespace

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, "config", {"seed", "dataset", "model", "koodos", "output"});
  RunConfig rc;
  rc.seed = count(j, "seed", "config", 0);
  rc.dataset = parse_dataset(j.value("dataset", json::object()), base_dir);
  if (j.contains("koodos")) {
    if (j["koodos"].contains("model")) throw ConfigError("koodos.model: give the model in the top-level model section");
    if (j["koodos"].contains("seed")) throw ConfigError("koodos.seed: give the seed at the top level");
    rc.koodos = config_from_json(j["koodos"], "koodos");
  }
  if (j.contains("model")) rc.koodos.model = model_from_json(j["model"], "model");
  if (j.contains("output")) {
    const std::filesystem::path out = text(j, "output", "config", "");
    if (out.empty()) throw ConfigError("config.output: must not be empty");
    rc.output = out.is_relative() ? base_dir / out : out;
  } else {
    rc.output = base_dir / rc.output;
  }
  apply_seed(rc, rc.seed);
  try {
    rc.koodos.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("koodos: ") + e.what());
  }
  if (rc.koodos.model.widths.front() != 2 && !rc.dataset.path)
    throw ConfigError("model.widths: the moons generator has 2 input features");
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return parse_run_config(j, file.parent_path());
}

void apply_seed(RunConfig& rc, std::uint64_t seed) {
  rc.seed = seed;
  rc.koodos.seed = seed;
  rc.dataset.moons.seed = seed;
}

std::uint64_t parse_seed_override(const std::string& s) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size())
    throw ConfigError("KOODOS_SEED: expected an unsigned integer, got '" + s + "'");
  return v;
}

domains::DomainSequence load_dataset(const RunConfig& rc) {
  if (rc.dataset.path) return domains::load_sequence(*rc.dataset.path);
  return domains::generate_moons_sequence(rc.dataset.moons);
}

Metric default_metric(const RunConfig& rc) {
  if (rc.dataset.metric) return *rc.dataset.metric;
  return rc.koodos.model.task == nets::TaskKind::Regression ? Metric::Mae : Metric::ErrorRate;
}

}  // namespace koodos::cli
