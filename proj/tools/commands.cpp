// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "koodos/checkpoint.hpp"
#include "koodos/error.hpp"
#include "koodos/spectral.hpp"

namespace koodos::cli {
namespace {

using nlohmann::json;

RunConfig require_config(const Options& opt, const char* command) {
  if (!opt.config) throw ConfigError(std::string(command) + " needs --config");
  RunConfig rc = load_run_config(*opt.config);
  if (opt.seed_override) apply_seed(rc, *opt.seed_override);
  return rc;
}

std::filesystem::path output_dir(const Options& opt, const std::optional<RunConfig>& rc) {
  std::filesystem::path dir = opt.out ? *opt.out : rc ? rc->output : std::filesystem::path(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::filesystem::path checkpoint_path(const Options& opt, const std::optional<RunConfig>& rc) {
  if (opt.checkpoint) return *opt.checkpoint;
  if (opt.out) return *opt.out / "checkpoint.json";
  if (rc) return rc->output / "checkpoint.json";
  throw ConfigError("no checkpoint: pass --checkpoint, --out or --config");
}

std::optional<RunConfig> optional_config(const Options& opt) {
  if (!opt.config) return std::nullopt;
  RunConfig rc = load_run_config(*opt.config);
  if (opt.seed_override) apply_seed(rc, *opt.seed_override);
  return rc;
}

void write_json(const std::filesystem::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + file.string());
}

std::vector<domains::Domain> select_split(const RunConfig& rc, const domains::DomainSequence& seq,
                                          const std::string& split) {
  if (split == "all") return seq.domains;
  auto [train, test] = domains::split_train_test(seq, rc.dataset.test_fraction);
  if (split == "train") return train.domains;
  if (split == "test") return test.domains;
  throw ConfigError("--split: unknown split '" + split + "' (expected one of: train, test, all)");
}

std::optional<double> baseline_score(const std::optional<Tensor>& theta, const KoodosSystem& sys,
                                     const std::vector<domains::Domain>& data, Metric metric) {
  if (!theta) return std::nullopt;
  return evaluate_fixed(nets::FlatParams::from_row(*theta, sys.config.model), data, metric).aggregate;
}

void check_compatible(const KoodosSystem& sys, const domains::DomainSequence& seq) {
  const std::size_t in = sys.config.model.widths.front();
  if (seq.domains.empty()) throw FormatError("dataset has no domains");
  if (seq.domains.front().x.cols() != in)
    throw ShapeError("dataset has " + std::to_string(seq.domains.front().x.cols()) +
                     " features but the model expects " + std::to_string(in));
  if (seq.task != sys.config.model.task)
    throw ShapeError("dataset task '" + nets::to_string(seq.task) + "' does not match model task '" +
                     nets::to_string(sys.config.model.task) + "'");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

json metrics_json(const std::string& dataset, std::uint64_t seed, const std::string& split,
                  const Evaluation& ev, std::optional<double> offline, std::optional<double> lastdomain) {
  json per = json::array();
  for (const auto& [t, v] : ev.per_domain) per.push_back({{"t", t}, {"metric", v}});
  auto opt_num = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
  return {{"format_version", kMetricsFormatVersion},
          {"dataset", dataset},
          {"seed", seed},
          {"split", split},
          {"metric", to_string(ev.metric)},
          {"per_domain", per},
          {"aggregate", ev.aggregate},
          {"baseline_offline", opt_num(offline)},
          {"baseline_lastdomain", opt_num(lastdomain)}};
}

std::string cmd_generate(const Options& opt) {
  const RunConfig rc = require_config(opt, "generate");
  if (rc.dataset.path) throw ConfigError("dataset.path: generate needs a generator recipe, not a path");
  const std::filesystem::path dir = opt.out ? *opt.out : rc.output / "dataset";
  const domains::DomainSequence seq = domains::generate_moons_sequence(rc.dataset.moons);
  domains::save_sequence(seq, dir);
  return "wrote " + std::to_string(seq.domains.size()) + " domains to " + dir.string();
}

std::string cmd_train(const Options& opt) {
  const RunConfig rc = require_config(opt, "train");
  const std::filesystem::path dir = output_dir(opt, rc);
  const domains::DomainSequence seq = load_dataset(rc);
  auto [train, test] = domains::split_train_test(seq, rc.dataset.test_fraction);
  KoodosSystem sys = train_joint(train.domains, rc.koodos);
  sys.baseline_offline = baseline_offline(train.domains, rc.koodos).theta;
  sys.baseline_lastdomain = baseline_lastdomain(train.domains, rc.koodos).theta;

  save_checkpoint(sys, dir / "checkpoint.json");
  write_history_csv(sys, dir / "history.csv");
  const Metric metric = default_metric(rc);
  const Evaluation ev = evaluate(sys, test.domains, metric);
  write_json(dir / "metrics.json",
             metrics_json(seq.name, rc.seed, "test", ev, baseline_score(sys.baseline_offline, sys, test.domains, metric),
                          baseline_score(sys.baseline_lastdomain, sys, test.domains, metric)));
  std::string msg;
  for (const std::string& w : sys.warnings) msg += "warning: " + w + "\n";
  return msg + "trained on " + std::to_string(train.domains.size()) + " domains; test " + to_string(metric) + " " +
         fmt(ev.aggregate) + "; wrote " + dir.string();
}

std::string cmd_eval(const Options& opt) {
  const RunConfig rc = require_config(opt, "eval");
  const KoodosSystem sys = load_checkpoint(checkpoint_path(opt, rc));
  const domains::DomainSequence seq = load_dataset(rc);
  check_compatible(sys, seq);
  const std::vector<domains::Domain> data = select_split(rc, seq, opt.split);
  const Metric metric = default_metric(rc);
  const Evaluation ev = evaluate(sys, data, metric);
  const std::filesystem::path dir = output_dir(opt, rc);
  write_json(dir / "metrics.json",
             metrics_json(seq.name, rc.seed, opt.split, ev, baseline_score(sys.baseline_offline, sys, data, metric),
                          baseline_score(sys.baseline_lastdomain, sys, data, metric)));
  return opt.split + " " + to_string(metric) + " " + fmt(ev.aggregate) + "; wrote " + (dir / "metrics.json").string();
}

std::string cmd_extrapolate(const Options& opt) {
  const std::optional<RunConfig> rc = optional_config(opt);
  if (opt.times.empty()) throw ConfigError("extrapolate needs --times t1,t2,...");
  const KoodosSystem sys = load_checkpoint(checkpoint_path(opt, rc));
  Tensor rows(opt.times.size(), sys.thetas.cols());
  for (std::size_t k = 0; k < opt.times.size(); ++k) {
    const nets::FlatParams p = generalize(sys, opt.times[k]);
    std::copy_n(p.theta.data(), p.size(), rows.data() + k * rows.cols());
  }
  const std::size_t dims = std::min<std::size_t>(2, rows.cols());
  const spectral::PcaResult pca = spectral::pca_project(rows, dims);
  const std::filesystem::path dir = output_dir(opt, rc);
  spectral::write_trajectory_csv(dir / "trajectory.csv", opt.times, pca.projections);
  return "wrote " + std::to_string(opt.times.size()) + " points to " + (dir / "trajectory.csv").string();
}

std::string cmd_spectrum(const Options& opt) {
  const std::optional<RunConfig> rc = optional_config(opt);
  const KoodosSystem sys = load_checkpoint(checkpoint_path(opt, rc));
  if (sys.config.ablation.no_koopman || !sys.op.is_linear())
    throw InvalidArgument("spectrum needs a linear Koopman operator; this checkpoint uses " +
                          (sys.config.ablation.no_koopman ? std::string("direct parameter dynamics")
                                                          : nets::to_string(sys.op.kind)));
  const spectral::SpectralReport r = spectral::assess_stability(nets::materialize_operator(sys.op));
  const std::filesystem::path dir = output_dir(opt, rc);
  spectral::write_spectrum_csv(dir / "spectrum.csv", r.eigenvalues);
  std::ostringstream os;
  os << "verdict: " << spectral::to_string(r.classification) << " (max Re " << fmt(r.max_real) << ", "
     << r.eigenvalues.size() << " eigenvalues; wrote " << (dir / "spectrum.csv").string() << ")";
  return os.str();
}

}  // namespace koodos::cli
