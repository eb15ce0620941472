// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "koodos/checkpoint.hpp"

#include <fstream>
#include <set>

#include "koodos/error.hpp"

namespace koodos {

using nlohmann::json;

namespace {

// Field reader that tracks the dotted path for error messages and rejects
// keys it was never asked about.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  std::string at(const std::string& key) const { return path_ + "." + key; }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = j_[key];
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
    return v.get<double>();
  }
  std::size_t count(const std::string& key, std::size_t def) {
    if (!has(key)) return def;
    const json& v = j_[key];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(at(key) + ": expected a non-negative integer");
    return v.get<std::size_t>();
  }
  std::uint64_t u64(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = j_[key];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(at(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  bool flag(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_[key];
    if (!v.is_boolean()) throw ConfigError(at(key) + ": expected true or false");
    return v.get<bool>();
  }
  std::string text(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = j_[key];
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> def) {
    if (!has(key)) return def;
    const json& v = j_[key];
    if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_unsigned() && !(v[i].is_number_integer() && v[i].get<long long>() >= 0))
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]: expected a non-negative integer");
      out.push_back(v[i].get<std::size_t>());
    }
    return out;
  }
  const json* object(const std::string& key) {
    if (!has(key)) return nullptr;
    return &j_[key];
  }

  template <class F>
  auto parse_enum(const std::string& key, F from_string, decltype(from_string(std::string())) def) {
    if (!has(key)) return def;
    const std::string s = text(key, "");
    try {
      return from_string(s);
    } catch (const InvalidArgument& e) {
      throw ConfigError(at(key) + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()) + ": unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json tensor_to_json(const Tensor& t) {
  return json{{"rows", t.rows()}, {"cols", t.cols()}, {"data", std::vector<double>(t.values().begin(), t.values().end())}};
}

Tensor tensor_from_json(const json& j, const std::string& path) {
  try {
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    std::vector<double> data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols)
      throw FormatError(path + ": " + std::to_string(data.size()) + " values for a " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " tensor");
    return Tensor(rows, cols, std::move(data));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const NumericError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

json dense_to_json(const nets::Dense& d) {
  json layers = json::array();
  for (const auto& l : d.layers) layers.push_back({{"weight", tensor_to_json(l.weight)}, {"bias", tensor_to_json(l.bias)}});
  return {{"widths", d.spec.widths},
          {"hidden", nets::to_string(d.spec.hidden)},
          {"output", nets::to_string(d.spec.output)},
          {"layers", layers}};
}

nets::Dense dense_from_json(const json& j, const std::string& path) {
  nets::Dense d;
  try {
    d.spec.widths = j.at("widths").get<std::vector<std::size_t>>();
    d.spec.hidden = nets::activation_from_string(j.at("hidden").get<std::string>());
    d.spec.output = nets::activation_from_string(j.at("output").get<std::string>());
    d.spec.validate();
    const json& layers = j.at("layers");
    if (layers.size() != d.spec.layer_count())
      throw FormatError(path + ".layers: expected " + std::to_string(d.spec.layer_count()) + " layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string lp = path + ".layers[" + std::to_string(i) + "]";
      nets::Layer l{tensor_from_json(layers[i].at("weight"), lp + ".weight"),
                    tensor_from_json(layers[i].at("bias"), lp + ".bias")};
      if (l.weight.rows() != d.spec.widths[i] || l.weight.cols() != d.spec.widths[i + 1] || l.bias.rows() != 1 ||
          l.bias.cols() != d.spec.widths[i + 1])
        throw FormatError(lp + ": shape does not match widths");
      d.layers.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(path + ": " + e.what());
  }
  return d;
}

}  // namespace

nets::MlpSpec model_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  nets::MlpSpec spec;
  spec.widths = f.counts("widths", {2, 50, 50, 50, 1});
  spec.task = f.parse_enum("task", nets::task_from_string, nets::TaskKind::BinaryClassification);
  f.finish();
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return spec;
}

json config_to_json(const KoodosConfig& c) {
  return {
      {"alpha", c.alpha},
      {"beta", c.beta},
      {"gamma", c.gamma},
      {"lr_predictive", c.lr_predictive},
      {"lr_other", c.lr_other},
      {"lr_schedule", to_string(c.lr_schedule)},
      {"warm_epochs", c.warm_epochs},
      {"joint_epochs", c.joint_epochs},
      {"theta_freeze_epochs", c.theta_freeze_epochs},
      {"batch_size", c.batch_size},
      {"pairs", to_string(c.pairs)},
      {"window", c.window},
      {"ablation",
       {{"no_integ", c.ablation.no_integ},
        {"no_recon", c.ablation.no_recon},
        {"no_dyna", c.ablation.no_dyna},
        {"no_consis", c.ablation.no_consis},
        {"no_koopman", c.ablation.no_koopman}}},
      {"model", {{"widths", c.model.widths}, {"task", nets::to_string(c.model.task)}}},
      {"autoencoder_widths", c.autoencoder_widths},
      {"operator", {{"kind", nets::to_string(c.operator_kind)}, {"rank", c.operator_rank}}},
      {"direct_hidden", c.direct_hidden},
      {"integration",
       {{"method", ode::to_string(c.integration.method)},
        {"steps_per_unit", c.integration.steps_per_unit},
        {"expm_tolerance", c.integration.expm_tolerance}}},
      {"warm_start", to_string(c.warm_start)},
      {"anchor", to_string(c.anchor)},
      {"early_stop_rel", c.early_stop_rel},
      {"early_stop_patience", c.early_stop_patience},
      {"seed", c.seed},
  };
}

KoodosConfig config_from_json(const json& j, const std::string& path, KoodosConfig c) {
  Fields f(j, path);
  c.alpha = f.number("alpha", c.alpha);
  c.beta = f.number("beta", c.beta);
  c.gamma = f.number("gamma", c.gamma);
  c.lr_predictive = f.number("lr_predictive", c.lr_predictive);
  c.lr_other = f.number("lr_other", c.lr_other);
  c.lr_schedule = f.parse_enum("lr_schedule", lr_schedule_from_string, c.lr_schedule);
  c.warm_epochs = f.count("warm_epochs", c.warm_epochs);
  c.joint_epochs = f.count("joint_epochs", c.joint_epochs);
  c.theta_freeze_epochs = f.count("theta_freeze_epochs", c.theta_freeze_epochs);
  c.batch_size = f.count("batch_size", c.batch_size);
  c.pairs = f.parse_enum("pairs", pair_schedule_from_string, c.pairs);
  c.window = f.count("window", c.window);
  if (const json* a = f.object("ablation")) {
    Fields af(*a, f.at("ablation"));
    c.ablation.no_integ = af.flag("no_integ", c.ablation.no_integ);
    c.ablation.no_recon = af.flag("no_recon", c.ablation.no_recon);
    c.ablation.no_dyna = af.flag("no_dyna", c.ablation.no_dyna);
    c.ablation.no_consis = af.flag("no_consis", c.ablation.no_consis);
    c.ablation.no_koopman = af.flag("no_koopman", c.ablation.no_koopman);
    af.finish();
  }
  if (const json* m = f.object("model")) c.model = model_from_json(*m, f.at("model"));
  c.autoencoder_widths = f.counts("autoencoder_widths", c.autoencoder_widths);
  if (const json* o = f.object("operator")) {
    Fields of(*o, f.at("operator"));
    c.operator_kind = of.parse_enum("kind", nets::operator_kind_from_string, c.operator_kind);
    c.operator_rank = of.count("rank", c.operator_rank);
    of.finish();
  }
  c.direct_hidden = f.counts("direct_hidden", c.direct_hidden);
  if (const json* i = f.object("integration")) {
    Fields inf(*i, f.at("integration"));
    c.integration.method = inf.parse_enum("method", ode::method_from_string, c.integration.method);
    c.integration.steps_per_unit = inf.number("steps_per_unit", c.integration.steps_per_unit);
    c.integration.expm_tolerance = inf.number("expm_tolerance", c.integration.expm_tolerance);
    inf.finish();
  }
  c.warm_start = f.parse_enum("warm_start", warm_start_from_string, c.warm_start);
  c.anchor = f.parse_enum("anchor", anchor_from_string, c.anchor);
  c.early_stop_rel = f.number("early_stop_rel", c.early_stop_rel);
  c.early_stop_patience = f.count("early_stop_patience", c.early_stop_patience);
  c.seed = f.u64("seed", c.seed);
  f.finish();
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

json system_to_json(const KoodosSystem& sys) {
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["config"] = config_to_json(sys.config);
  j["timestamps"] = sys.timestamps;
  j["thetas"] = tensor_to_json(sys.thetas);
  j["static_model"] = sys.static_model;
  if (!sys.config.ablation.no_koopman) {
    j["autoencoder"] = {{"widths", sys.autoencoder.spec.widths},
                        {"encoder", dense_to_json(sys.autoencoder.encoder)},
                        {"decoder", dense_to_json(sys.autoencoder.decoder)}};
    json mats = json::array();
    for (const Tensor& m : sys.op.matrices) mats.push_back(tensor_to_json(m));
    json op = {{"kind", nets::to_string(sys.op.kind)}, {"dim", sys.op.dim}, {"rank", sys.op.rank}, {"matrices", mats}};
    if (sys.op.kind == nets::OperatorKind::MlpDynamics) op["net"] = dense_to_json(sys.op.net);
    j["operator"] = op;
  }
  if (sys.direct) j["direct_dynamics"] = dense_to_json(sys.direct->net);
  if (sys.baseline_offline) j["baseline_offline"] = tensor_to_json(*sys.baseline_offline);
  if (sys.baseline_lastdomain) j["baseline_lastdomain"] = tensor_to_json(*sys.baseline_lastdomain);
  return j;
}

KoodosSystem system_from_json(const json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      throw FormatError("checkpoint.format_version: unsupported version " + std::to_string(version));
    KoodosSystem sys;
    try {
      sys.config = config_from_json(j.at("config"), "checkpoint.config");
    } catch (const ConfigError& e) {
      throw FormatError(e.what());
    }
    sys.timestamps = j.at("timestamps").get<std::vector<double>>();
    sys.thetas = tensor_from_json(j.at("thetas"), "checkpoint.thetas");
    sys.static_model = j.at("static_model").get<bool>();
    const std::size_t p_count = nets::ParamLayout::for_spec(sys.config.model).parameter_count;
    if (sys.thetas.rows() != sys.timestamps.size() || sys.thetas.cols() != p_count)
      throw FormatError("checkpoint.thetas: shape " + sys.thetas.shape_str() + " does not match " +
                        std::to_string(sys.timestamps.size()) + " timestamps and " + std::to_string(p_count) +
                        " parameters");
    for (std::size_t i = 1; i < sys.timestamps.size(); ++i)
      if (!(sys.timestamps[i] > sys.timestamps[i - 1]))
        throw FormatError("checkpoint.timestamps: not strictly increasing");
    if (!sys.config.ablation.no_koopman) {
      const json& ae = j.at("autoencoder");
      sys.autoencoder.spec = {p_count, ae.at("widths").get<std::vector<std::size_t>>()};
      sys.autoencoder.encoder = dense_from_json(ae.at("encoder"), "checkpoint.autoencoder.encoder");
      sys.autoencoder.decoder = dense_from_json(ae.at("decoder"), "checkpoint.autoencoder.decoder");
      if (sys.autoencoder.encoder.spec != sys.autoencoder.spec.encoder() ||
          sys.autoencoder.decoder.spec != sys.autoencoder.spec.decoder())
        throw FormatError("checkpoint.autoencoder: layer widths do not match the declared widths");
      const json& op = j.at("operator");
      sys.op.kind = nets::operator_kind_from_string(op.at("kind").get<std::string>());
      sys.op.dim = op.at("dim").get<std::size_t>();
      sys.op.rank = op.at("rank").get<std::size_t>();
      const json& mats = op.at("matrices");
      for (std::size_t i = 0; i < mats.size(); ++i)
        sys.op.matrices.push_back(tensor_from_json(mats[i], "checkpoint.operator.matrices[" + std::to_string(i) + "]"));
      if (sys.op.kind == nets::OperatorKind::MlpDynamics) sys.op.net = dense_from_json(op.at("net"), "checkpoint.operator.net");
      try {
        sys.op.validate();
      } catch (const Error& e) {
        throw FormatError(std::string("checkpoint.operator: ") + e.what());
      }
    }
    if (j.contains("direct_dynamics"))
      sys.direct = nets::DirectDynamics{dense_from_json(j["direct_dynamics"], "checkpoint.direct_dynamics")};
    if (sys.config.ablation.no_koopman && !sys.direct)
      throw FormatError("checkpoint.direct_dynamics: missing for a system without the Koopman pipeline");
    if (j.contains("baseline_offline"))
      sys.baseline_offline = tensor_from_json(j["baseline_offline"], "checkpoint.baseline_offline");
    if (j.contains("baseline_lastdomain"))
      sys.baseline_lastdomain = tensor_from_json(j["baseline_lastdomain"], "checkpoint.baseline_lastdomain");
    return sys;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const KoodosSystem& sys, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << system_to_json(sys).dump() << '\n';
  if (!out) throw IoError("failed writing " + file.string());
}

KoodosSystem load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("missing checkpoint " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  return system_from_json(j);
}

}  // namespace koodos
