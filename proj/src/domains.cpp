// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "koodos/domains.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "koodos/error.hpp"
#include "koodos/seeding.hpp"

namespace koodos::domains {

using nlohmann::json;

void Domain::validate() const {
  if (x.rows() == 0) throw InvalidArgument("domain at t=" + std::to_string(t) + " is empty");
  if (y.rows() != x.rows() || y.cols() != 1)
    throw ShapeError("domain at t=" + std::to_string(t) + ": targets " + y.shape_str() +
                     " do not match features " + x.shape_str());
  x.require_finite("domain features");
  y.require_finite("domain targets");
  if (task == nets::TaskKind::BinaryClassification)
    for (double v : y.values())
      if (v != 0.0 && v != 1.0)
        throw InvalidArgument("binary targets must be 0 or 1, found " + std::to_string(v));
}

std::vector<double> DomainSequence::timestamps() const {
  std::vector<double> ts;
  ts.reserve(domains.size());
  for (const Domain& d : domains) ts.push_back(d.t);
  return ts;
}

void DomainSequence::validate() const {
  for (std::size_t k = 0; k < domains.size(); ++k) {
    domains[k].validate();
    if (domains[k].x.cols() != domains.front().x.cols())
      throw ShapeError("domain " + std::to_string(k) + " has " + std::to_string(domains[k].x.cols()) +
                       " features, expected " + std::to_string(domains.front().x.cols()));
    if (k > 0 && !(domains[k].t > domains[k - 1].t))
      throw InvalidArgument("timestamps must be strictly increasing: t[" + std::to_string(k - 1) +
                            "]=" + std::to_string(domains[k - 1].t) + ", t[" + std::to_string(k) +
                            "]=" + std::to_string(domains[k].t));
  }
}

Domain generate_moons_domain(double t, std::size_t n_per_class, double noise_sd, std::uint64_t seed,
                             double degrees_per_unit) {
  if (n_per_class == 0) throw InvalidArgument("moons: n_per_class must be at least 1");
  if (!(noise_sd >= 0.0)) throw InvalidArgument("moons: noise_sd must be non-negative");
  const double angle = degrees_per_unit * t * M_PI / 180.0;
  const double c = std::cos(angle), s = std::sin(angle);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  Domain d;
  d.t = t;
  d.x = Tensor(2 * n_per_class, 2);
  d.y = Tensor(2 * n_per_class, 1);
  const double step = n_per_class > 1 ? M_PI / static_cast<double>(n_per_class - 1) : 0.0;
  for (std::size_t label = 0; label < 2; ++label) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const double a = step * static_cast<double>(i);
      const double px = label == 1 ? std::cos(a) : 1.0 - std::cos(a);
      const double py = label == 1 ? std::sin(a) : 0.5 - std::sin(a);
      const std::size_t r = label * n_per_class + i;
      d.x(r, 0) = c * px - s * py;
      d.x(r, 1) = s * px + c * py;
      d.y(r, 0) = static_cast<double>(label);
    }
  }
  if (noise_sd > 0.0)
    for (double& v : d.x.values()) v += noise_sd * noise(rng);
  return d;
}

std::vector<double> sample_timestamps(std::size_t count, double t_min, double t_max,
                                      std::uint64_t seed) {
  constexpr double kMinGap = 1e-6;
  if (count == 0) throw InvalidArgument("sample_timestamps: count must be at least 1");
  if (!(t_max > t_min) && count > 1)
    throw InvalidArgument("sample_timestamps: empty interval [" + std::to_string(t_min) + ", " +
                          std::to_string(t_max) + "]");
  if (static_cast<double>(count - 1) * kMinGap > t_max - t_min)
    throw InvalidArgument("sample_timestamps: interval too short for " + std::to_string(count) +
                          " distinct timestamps");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(t_min, t_max);
  std::vector<double> ts(count);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (double& v : ts) v = u(rng);
    std::sort(ts.begin(), ts.end());
    bool ok = true;
    for (std::size_t i = 1; i < count && ok; ++i) ok = ts[i] - ts[i - 1] >= kMinGap;
    if (ok) return ts;
  }
  throw ConvergenceError("sample_timestamps: could not draw timestamps with the minimum gap");
}

DomainSequence generate_moons_sequence(const MoonsRecipe& r) {
  DomainSequence seq;
  seq.name = "moons";
  seq.task = nets::TaskKind::BinaryClassification;
  const std::vector<double> ts = sample_timestamps(r.domain_count, r.t_min, r.t_max, r.seed);
  for (std::size_t k = 0; k < ts.size(); ++k)
    seq.domains.push_back(
        generate_moons_domain(ts[k], r.n_per_class, r.noise_sd, derive_seed(r.seed, k + 1), r.degrees_per_unit));
  seq.metadata = {{"seed", static_cast<double>(r.seed)},
                  {"n_per_class", static_cast<double>(r.n_per_class)},
                  {"noise_sd", r.noise_sd},
                  {"degrees_per_unit", r.degrees_per_unit},
                  {"t_min", r.t_min},
                  {"t_max", r.t_max}};
  return seq;
}

std::pair<DomainSequence, DomainSequence> split_train_test(const DomainSequence& seq,
                                                           double test_fraction) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0))
    throw InvalidArgument("test_fraction must lie in [0, 1]");
  const double raw = test_fraction * static_cast<double>(seq.size());
  // 0.3·50 evaluates slightly above 15; the epsilon keeps exact products exact.
  const auto n_test = static_cast<std::size_t>(std::max(0.0, std::ceil(raw - 1e-9)));
  DomainSequence train = seq, test = seq;
  train.domains.assign(seq.domains.begin(), seq.domains.end() - static_cast<std::ptrdiff_t>(n_test));
  test.domains.assign(seq.domains.end() - static_cast<std::ptrdiff_t>(n_test), seq.domains.end());
  return {std::move(train), std::move(test)};
}

Domain pool_domains(const std::vector<Domain>& domains) {
  if (domains.empty()) throw InvalidArgument("pool_domains: no domains");
  Domain pooled;
  pooled.t = domains.back().t;
  pooled.task = domains.front().task;
  const std::size_t dim = domains.front().x.cols();
  std::size_t rows = 0;
  for (const Domain& d : domains) {
    if (d.x.cols() != dim)
      throw ShapeError("pool_domains: feature widths differ (" + std::to_string(d.x.cols()) + " vs " +
                       std::to_string(dim) + ")");
    rows += d.size();
  }
  pooled.x = Tensor(rows, dim);
  pooled.y = Tensor(rows, 1);
  std::size_t r = 0;
  for (const Domain& d : domains) {
    std::copy_n(d.x.data(), d.x.size(), pooled.x.data() + r * dim);
    std::copy_n(d.y.data(), d.y.size(), pooled.y.data() + r);
    r += d.size();
  }
  return pooled;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

double parse_double(std::string_view s, const std::filesystem::path& file, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError(file.string() + ":" + std::to_string(line) + ": cannot parse number '" +
                      std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void write_domain_csv(const Domain& d, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  for (std::size_t j = 0; j < d.x.cols(); ++j) out << 'f' << j << ',';
  out << "y\n";
  for (std::size_t i = 0; i < d.x.rows(); ++i) {
    for (std::size_t j = 0; j < d.x.cols(); ++j) out << format_double(d.x(i, j)) << ',';
    out << format_double(d.y(i, 0)) << '\n';
  }
  if (!out) throw IoError("failed writing " + file.string());
}

Domain read_domain_csv(const std::filesystem::path& file, double t, nets::TaskKind task) {
  std::ifstream in(file);
  if (!in) throw IoError("missing domain file " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(file.string() + ": empty file");
  const auto header = split_commas(line);
  if (header.size() < 2 || header.back() != "y")
    throw FormatError(file.string() + ": header must be f0,...,f{d-1},y");
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j)
    if (header[j] != "f" + std::to_string(j))
      throw FormatError(file.string() + ": header column " + std::to_string(j) + " should be f" +
                        std::to_string(j));
  std::vector<double> xs, ys;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != d + 1)
      throw FormatError(file.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(d + 1) + " columns, found " + std::to_string(cells.size()));
    for (std::size_t j = 0; j < d; ++j) xs.push_back(parse_double(cells[j], file, lineno));
    ys.push_back(parse_double(cells[d], file, lineno));
  }
  Domain dom;
  dom.t = t;
  dom.task = task;
  const std::size_t n = ys.size();
  dom.x = Tensor(n, d, std::move(xs));
  dom.y = Tensor(n, 1, std::move(ys));
  dom.validate();
  return dom;
}

}  // namespace

void save_sequence(const DomainSequence& seq, const std::filesystem::path& dir) {
  seq.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  json manifest;
  manifest["name"] = seq.name;
  manifest["task"] = nets::to_string(seq.task);
  manifest["timestamps"] = seq.timestamps();
  json files = json::array();
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const std::string name = "domain_" + std::to_string(k) + ".csv";
    write_domain_csv(seq.domains[k], dir / name);
    files.push_back(name);
  }
  manifest["files"] = files;
  if (!seq.metadata.empty()) manifest["metadata"] = seq.metadata;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  // max_digits10 output keeps the timestamps bit-exact.
  out << manifest.dump(2) << '\n';
}

DomainSequence load_sequence(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("missing manifest " + path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  DomainSequence seq;
  std::vector<double> ts;
  std::vector<std::string> files;
  try {
    seq.name = manifest.at("name").get<std::string>();
    seq.task = nets::task_from_string(manifest.at("task").get<std::string>());
    ts = manifest.at("timestamps").get<std::vector<double>>();
    files = manifest.at("files").get<std::vector<std::string>>();
    if (manifest.contains("metadata"))
      seq.metadata = manifest["metadata"].get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (ts.size() != files.size())
    throw FormatError(path.string() + ": " + std::to_string(ts.size()) + " timestamps but " +
                      std::to_string(files.size()) + " files");
  for (std::size_t k = 0; k < ts.size(); ++k)
    seq.domains.push_back(read_domain_csv(dir / files[k], ts[k], seq.task));
  seq.validate();
  return seq;
}

}  // namespace koodos::domains
