// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "koodos/error.hpp"
#include "run_config.hpp"

using nlohmann::json;
namespace cli = koodos::cli;

TEST_CASE("run config defaults and sections") {
  const cli::RunConfig rc = cli::parse_run_config(json::object(), "/base");
  CHECK(rc.seed == 0);
  CHECK(rc.output == std::filesystem::path("/base/koodos-run"));
  CHECK(rc.dataset.moons.domain_count == 50);
  CHECK(rc.koodos.model.widths == std::vector<std::size_t>{2, 50, 50, 50, 1});
  CHECK(cli::default_metric(rc) == koodos::Metric::ErrorRate);

  const json j = json::parse(R"({
    "seed": 4,
    "dataset": {"generator": "moons", "domain_count": 12, "t_max": 12, "metric": "auc"},
    "model": {"widths": [2, 8, 1], "task": "binary-classification"},
    "koodos": {"joint_epochs": 7, "operator": {"kind": "skew"}},
    "output": "out"})");
  const cli::RunConfig r = cli::parse_run_config(j, "/cfg");
  CHECK(r.seed == 4);
  CHECK(r.koodos.seed == 4);
  CHECK(r.dataset.moons.seed == 4);
  CHECK(r.dataset.moons.domain_count == 12);
  CHECK(r.koodos.joint_epochs == 7);
  CHECK(r.koodos.operator_kind == koodos::nets::OperatorKind::Skew);
  CHECK(r.koodos.model.widths == std::vector<std::size_t>{2, 8, 1});
  CHECK(r.output == std::filesystem::path("/cfg/out"));
  CHECK(cli::default_metric(r) == koodos::Metric::Auc);

  const cli::RunConfig p = cli::parse_run_config(json::parse(R"({"dataset": {"path": "data"}})"), "/cfg");
  REQUIRE(p.dataset.path.has_value());
  CHECK(*p.dataset.path == std::filesystem::path("/cfg/data"));
}

TEST_CASE("run config errors name the field") {
  auto fails_with = [](const char* text, const char* needle) {
    CHECK_THROWS_WITH_AS(cli::parse_run_config(json::parse(text), "."), doctest::Contains(needle),
                         koodos::ConfigError);
  };
  fails_with(R"({"sede": 1})", "config.sede");
  fails_with(R"({"seed": -1})", "config.seed");
  fails_with(R"({"dataset": {"generator": "spirals"}})", "dataset.generator");
  fails_with(R"({"dataset": {"path": "x", "n_per_class": 3}})", "dataset.n_per_class");
  fails_with(R"({"dataset": {"test_fraction": 1.5}})", "dataset.test_fraction");
  fails_with(R"({"dataset": {"metric": "f1"}})", "dataset.metric");
  fails_with(R"({"model": {"widths": [3, 4, 1]}})", "model.widths");
  fails_with(R"({"model": {"task": "ranking"}})", "model.task");
  fails_with(R"({"koodos": {"ablation": {"no_dyna": 1}}})", "koodos.ablation.no_dyna");
  fails_with(R"({"koodos": {"model": {}}})", "koodos.model");
  fails_with(R"({"koodos": {"joint_epochs": 0}})", "joint_epochs");
}

TEST_CASE("seed override") {
  CHECK(cli::parse_seed_override("17") == 17);
  CHECK_THROWS_AS(cli::parse_seed_override(""), koodos::ConfigError);
  CHECK_THROWS_AS(cli::parse_seed_override("-3"), koodos::ConfigError);
  CHECK_THROWS_AS(cli::parse_seed_override("12x"), koodos::ConfigError);
  cli::RunConfig rc;
  cli::apply_seed(rc, 9);
  CHECK(rc.koodos.seed == 9);
  CHECK(rc.dataset.moons.seed == 9);
}
