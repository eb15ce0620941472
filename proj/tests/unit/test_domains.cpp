// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "koodos/domains.hpp"
#include "koodos/error.hpp"

using koodos::Tensor;
namespace dom = koodos::domains;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("koodos_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("noiseless moons at t=0 are the canonical half circles") {
  const dom::Domain d = dom::generate_moons_domain(0.0, 5, 0.0, 1);
  CHECK(d.size() == 10);
  // Row 5 is the first label-1 point, angle 0.
  CHECK(d.x(5, 0) == 1.0);
  CHECK(d.x(5, 1) == 0.0);
  CHECK(d.y(5, 0) == 1.0);
  CHECK(d.x(0, 0) == 0.0);
  CHECK(d.x(0, 1) == 0.5);
  CHECK(d.y(0, 0) == 0.0);
}

TEST_CASE("rotation by 18 degrees per unit about the origin") {
  const dom::Domain d0 = dom::generate_moons_domain(0.0, 20, 0.0, 3);
  const dom::Domain d1 = dom::generate_moons_domain(1.0, 20, 0.0, 3);
  const double a = 18.0 * M_PI / 180.0;
  for (std::size_t i = 0; i < d0.size(); ++i) {
    const double px = d0.x(i, 0), py = d0.x(i, 1);
    CHECK(std::abs(d1.x(i, 0) - (std::cos(a) * px - std::sin(a) * py)) < 1e-12);
    CHECK(std::abs(d1.x(i, 1) - (std::sin(a) * px + std::cos(a) * py)) < 1e-12);
    CHECK(std::hypot(d1.x(i, 0), d1.x(i, 1)) == doctest::Approx(std::hypot(px, py)).epsilon(1e-12));
  }
}

TEST_CASE("a full turn reproduces the t=0 sample") {
  const dom::Domain d0 = dom::generate_moons_domain(0.0, 50, 0.1, 9);
  const dom::Domain d20 = dom::generate_moons_domain(20.0, 50, 0.1, 9);
  CHECK(koodos::max_abs_diff(d0.x, d20.x) < 1e-12);
  CHECK(d0.y == d20.y);
}

TEST_CASE("generation is deterministic per seed") {
  CHECK(dom::generate_moons_domain(3.3, 30, 0.1, 5) == dom::generate_moons_domain(3.3, 30, 0.1, 5));
  CHECK_FALSE(dom::generate_moons_domain(3.3, 30, 0.1, 5) == dom::generate_moons_domain(3.3, 30, 0.1, 6));
  CHECK_THROWS_AS(dom::generate_moons_domain(0, 0, 0.1, 1), koodos::InvalidArgument);
  CHECK_THROWS_AS(dom::generate_moons_domain(0, 3, -1.0, 1), koodos::InvalidArgument);
}

TEST_CASE("timestamps are sorted, distinct and seeded") {
  const auto ts = dom::sample_timestamps(50, 0.0, 50.0, 7);
  REQUIRE(ts.size() == 50);
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] - ts[i - 1] >= 1e-6);
  CHECK(ts.front() >= 0.0);
  CHECK(ts.back() <= 50.0);
  CHECK(dom::sample_timestamps(50, 0.0, 50.0, 7) == ts);
  CHECK(dom::sample_timestamps(1, 0.0, 50.0, 7).size() == 1);
  CHECK_THROWS_AS(dom::sample_timestamps(0, 0.0, 1.0, 7), koodos::InvalidArgument);
}

TEST_CASE("chronological split") {
  dom::MoonsRecipe r;
  r.n_per_class = 3;
  const dom::DomainSequence seq = dom::generate_moons_sequence(r);
  const auto [train, test] = dom::split_train_test(seq);
  CHECK(train.size() == 35);
  CHECK(test.size() == 15);
  CHECK(train.domains.back() == seq.domains[34]);
  CHECK(test.domains.front() == seq.domains[35]);
  const auto [all, none] = dom::split_train_test(seq, 0.0);
  CHECK(all.size() == 50);
  CHECK(none.size() == 0);
}

TEST_CASE("dataset directory round trip is bit exact") {
  dom::MoonsRecipe r;
  r.domain_count = 4;
  r.n_per_class = 7;
  r.seed = 12;
  const dom::DomainSequence seq = dom::generate_moons_sequence(r);
  const fs::path dir = scratch_dir("roundtrip");
  dom::save_sequence(seq, dir);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "domain_3.csv"));
  CHECK(dom::load_sequence(dir) == seq);
  fs::remove_all(dir);
}

TEST_CASE("malformed dataset directories are reported") {
  const fs::path dir = scratch_dir("bad");
  CHECK_THROWS_WITH_AS(dom::load_sequence(dir), doctest::Contains("missing manifest"), koodos::IoError);

  dom::MoonsRecipe r;
  r.domain_count = 2;
  r.n_per_class = 2;
  dom::save_sequence(dom::generate_moons_sequence(r), dir);
  {
    std::ofstream out(dir / "manifest.json");
    out << R"({"name":"m","task":"binary-classification","timestamps":[1,2,3],"files":["domain_0.csv","domain_1.csv"]})";
  }
  CHECK_THROWS_WITH_AS(dom::load_sequence(dir), doctest::Contains("3 timestamps but 2 files"),
                       koodos::FormatError);
  {
    std::ofstream out(dir / "manifest.json");
    out << R"({"name":"m","task":"binary-classification","timestamps":[2,1],"files":["domain_0.csv","domain_1.csv"]})";
  }
  CHECK_THROWS_WITH_AS(dom::load_sequence(dir), doctest::Contains("strictly increasing"),
                       koodos::InvalidArgument);
  {
    std::ofstream out(dir / "domain_1.csv");
    out << "f0,f1,y\n0.5,abc,1\n";
    std::ofstream m(dir / "manifest.json");
    m << R"({"name":"m","task":"binary-classification","timestamps":[1,2],"files":["domain_0.csv","domain_1.csv"]})";
  }
  CHECK_THROWS_WITH_AS(dom::load_sequence(dir), doctest::Contains("domain_1.csv:2"), koodos::FormatError);
  fs::remove_all(dir);
}
