// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "koodos/nets.hpp"
#include "koodos/tensor.hpp"

namespace koodos::domains {

/// One timestamped dataset.
struct Domain {
  double t = 0.0;
  Tensor x;  // N×d
  Tensor y;  // N×1
  nets::TaskKind task = nets::TaskKind::BinaryClassification;

  std::size_t size() const { return x.rows(); }
  void validate() const;
  friend bool operator==(const Domain&, const Domain&) = default;
};

struct DomainSequence {
  std::string name;
  nets::TaskKind task = nets::TaskKind::BinaryClassification;
  std::vector<Domain> domains;
  std::map<std::string, double> metadata;

  std::size_t size() const { return domains.size(); }
  std::vector<double> timestamps() const;
  /// Domain invariants plus strictly increasing timestamps and a common
  /// feature width.
  void validate() const;
  friend bool operator==(const DomainSequence&, const DomainSequence&) = default;
};

/// Two interleaved half circles of radius 1: label 0 on
/// (1 − cos a, 0.5 − sin a), label 1 on (cos a, sin a), a evenly spaced on
/// [0, π]. Points are rotated about the origin by degrees_per_unit·t
/// counter-clockwise, then receive N(0, noise_sd²) coordinate noise.
/// Rows are ordered label 0 first.
Domain generate_moons_domain(double t, std::size_t n_per_class, double noise_sd, std::uint64_t seed,
                             double degrees_per_unit = 18.0);

/// `count` uniform draws on [t_min, t_max], sorted, redrawn until every gap
/// is at least 1e-6.
std::vector<double> sample_timestamps(std::size_t count, double t_min, double t_max,
                                      std::uint64_t seed);

struct MoonsRecipe {
  std::size_t domain_count = 50;
  double t_min = 0.0;
  double t_max = 50.0;
  std::size_t n_per_class = 500;
  double noise_sd = 0.1;
  double degrees_per_unit = 18.0;
  std::uint64_t seed = 0;
};

/// Irregularly timed moons sequence; domain k is generated from a seed
/// derived from (recipe.seed, k).
DomainSequence generate_moons_sequence(const MoonsRecipe& recipe);

/// Chronological split: the last ⌈fraction·T⌉ domains form the test part.
std::pair<DomainSequence, DomainSequence> split_train_test(const DomainSequence& seq,
                                                           double test_fraction = 0.3);

/// All instances of `domains` in one domain stamped with the last timestamp.
Domain pool_domains(const std::vector<Domain>& domains);

/// Dataset directory: manifest.json plus domain_<k>.csv files.
void save_sequence(const DomainSequence& seq, const std::filesystem::path& dir);
DomainSequence load_sequence(const std::filesystem::path& dir);

}  // namespace koodos::domains
