// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include "koodos/koodos.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "koodos/adam.hpp"
#include "koodos/error.hpp"
#include "koodos/seeding.hpp"

namespace koodos {

namespace {

// Sub-stream ids for derive_seed.
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamAutoencoder = 2;
constexpr std::uint64_t kStreamOperator = 3;
constexpr std::uint64_t kStreamDirect = 4;
constexpr std::uint64_t kStreamBatches = 5;
constexpr std::uint64_t kStreamBaseline = 6;
constexpr std::uint64_t kStreamWarm = 1000;

template <class E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  std::string options;
  for (const auto& [name, value] : table) options += std::string(options.empty() ? "" : ", ") + name;
  throw InvalidArgument(std::string("unknown ") + what + " '" + s + "' (expected one of: " + options + ")");
}

}  // namespace

std::string to_string(PairScheduleKind k) {
  switch (k) {
    case PairScheduleKind::AllPairs: return "all-pairs";
    case PairScheduleKind::Window: return "window";
    case PairScheduleKind::Chain: return "chain";
  }
  return "all-pairs";
}
std::string to_string(WarmStart w) { return w == WarmStart::Chained ? "chained" : "independent"; }
std::string to_string(Anchor a) { return a == Anchor::Latest ? "latest" : "nearest"; }
std::string to_string(LrSchedule s) { return s == LrSchedule::Constant ? "constant" : "cosine"; }

PairScheduleKind pair_schedule_from_string(const std::string& s) {
  return parse_enum<PairScheduleKind>(
      s, {{"all-pairs", PairScheduleKind::AllPairs}, {"window", PairScheduleKind::Window}, {"chain", PairScheduleKind::Chain}},
      "pair schedule");
}
WarmStart warm_start_from_string(const std::string& s) {
  return parse_enum<WarmStart>(s, {{"chained", WarmStart::Chained}, {"independent", WarmStart::Independent}},
                               "warm start");
}
Anchor anchor_from_string(const std::string& s) {
  return parse_enum<Anchor>(s, {{"latest", Anchor::Latest}, {"nearest", Anchor::Nearest}}, "anchor");
}
LrSchedule lr_schedule_from_string(const std::string& s) {
  return parse_enum<LrSchedule>(s, {{"constant", LrSchedule::Constant}, {"cosine", LrSchedule::Cosine}},
                                "learning-rate schedule");
}

void KoodosConfig::validate() const {
  if (!(alpha >= 0 && beta >= 0 && gamma >= 0)) throw InvalidArgument("loss weights must be non-negative");
  if (!(lr_predictive > 0 && lr_other > 0)) throw InvalidArgument("learning rates must be positive");
  if (warm_epochs == 0) throw InvalidArgument("warm_epochs must be at least 1");
  if (joint_epochs == 0) throw InvalidArgument("joint_epochs must be at least 1");
  if (pairs == PairScheduleKind::Window && window == 0) throw InvalidArgument("window must be at least 1");
  if (!(early_stop_rel >= 0)) throw InvalidArgument("early_stop_rel must be non-negative");
  model.validate();
  if (autoencoder_widths.empty()) throw InvalidArgument("autoencoder needs at least one encoder layer");
  for (std::size_t w : autoencoder_widths)
    if (w == 0) throw InvalidArgument("autoencoder widths must be positive");
  if (operator_kind == nets::OperatorKind::LowRank && (operator_rank == 0 || operator_rank > latent_dim()))
    throw InvalidArgument("lowrank operator needs 1 <= rank <= " + std::to_string(latent_dim()));
  for (std::size_t w : direct_hidden)
    if (w == 0) throw InvalidArgument("direct-dynamics widths must be positive");
  integration.validate();
}

PairSet PairSet::schedule(std::size_t domain_count, PairScheduleKind kind, std::size_t window) {
  const std::size_t w = kind == PairScheduleKind::AllPairs ? domain_count
                        : kind == PairScheduleKind::Chain  ? 1
                                                           : window;
  if (w == 0) throw InvalidArgument("pair window must be at least 1");
  PairSet p;
  for (std::size_t i = 1; i < domain_count; ++i)
    for (std::size_t j = i > w ? i - w : 0; j < i; ++j) {
      p.origin.push_back(j);
      p.target.push_back(i);
    }
  return p;
}

PairSet PairSet::self_pairs(std::size_t domain_count) {
  PairSet p;
  for (std::size_t i = 0; i < domain_count; ++i) {
    p.origin.push_back(i);
    p.target.push_back(i);
  }
  return p;
}

nets::FlatParams KoodosSystem::theta(std::size_t i) const {
  if (i >= thetas.rows()) throw InvalidArgument("domain index " + std::to_string(i) + " out of range");
  return nets::FlatParams::from_row(Tensor::row(thetas.row_span(i)), config.model);
}

// ---------------------------------------------------------------------------
// ERM

namespace {

ad::Var task_loss_var(nets::TaskKind task, ad::Var logits, ad::Var y) {
  return task == nets::TaskKind::BinaryClassification ? ad::bce_logits_loss(logits, y) : ad::mse_loss(logits, y);
}

Tensor gather(const Tensor& src, std::span<const std::size_t> rows) {
  Tensor out(rows.size(), src.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy_n(src.data() + rows[r] * src.cols(), src.cols(), out.data() + r * src.cols());
  return out;
}

void check_domain_for_model(const domains::Domain& d, const nets::MlpSpec& spec) {
  if (d.size() == 0) throw InvalidArgument("domain at t=" + std::to_string(d.t) + " is empty");
  if (d.x.cols() != spec.input_width())
    throw ShapeError("domain at t=" + std::to_string(d.t) + " has " + std::to_string(d.x.cols()) +
                     " features but the model expects " + std::to_string(spec.input_width()));
  if (d.task != spec.task)
    throw InvalidArgument("domain task '" + nets::to_string(d.task) + "' does not match model task '" +
                          nets::to_string(spec.task) + "'");
}

}  // namespace

nets::FlatParams erm_pretrain(const domains::Domain& domain, const nets::MlpSpec& spec, std::size_t epochs,
                              double lr, std::uint64_t seed, const Tensor* init, std::size_t batch_size) {
  spec.validate();
  check_domain_for_model(domain, spec);
  if (epochs == 0) throw InvalidArgument("erm_pretrain: epochs must be at least 1");
  const nets::ParamLayout layout = nets::ParamLayout::for_spec(spec);
  std::mt19937_64 rng(seed);
  Tensor theta;
  if (init != nullptr) {
    if (init->rows() != 1 || init->cols() != layout.parameter_count)
      throw ShapeError("erm_pretrain: initial parameters " + init->shape_str() + " do not match " +
                       std::to_string(layout.parameter_count) + " parameters");
    theta = *init;
  } else {
    theta = nets::flatten(nets::init_predictive(spec, rng), spec).theta;
  }
  AdamState state(AdamHyper{.lr = lr});
  const std::size_t n = domain.size();
  const bool full = batch_size == 0 || batch_size >= n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto step = [&](const Tensor& x, const Tensor& y) {
    ad::Graph g;
    const ad::Var th = g.param(theta);
    const ad::Var logits = nets::forward_logits(spec, layout, th, g.constant(x));
    const ad::Gradients grads = g.backward(task_loss_var(spec.task, logits, g.constant(y)));
    Tensor* p[] = {&theta};
    const Tensor* gr[] = {&grads.of(th)};
    adam_step(std::span<Tensor* const>(p), std::span<const Tensor* const>(gr), state);
  };
  for (std::size_t e = 0; e < epochs; ++e) {
    if (full) {
      step(domain.x, domain.y);
      continue;
    }
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < n; b += batch_size) {
      const std::span<const std::size_t> idx(order.data() + b, std::min(batch_size, n - b));
      step(gather(domain.x, idx), gather(domain.y, idx));
    }
  }
  return nets::FlatParams::from_row(std::move(theta), spec);
}

double task_loss(const nets::FlatParams& params, const domains::Domain& domain) {
  check_domain_for_model(domain, params.spec);
  ad::Graph g;
  const ad::Var logits =
      nets::forward_logits(params.spec, params.layout, g.constant(params.theta), g.constant(domain.x));
  return task_loss_var(params.spec.task, logits, g.constant(domain.y)).value().item();
}

// ---------------------------------------------------------------------------
// Loss graph

namespace {

struct Bound {
  ad::Var theta;  // T×P
  nets::DenseVars enc, dec;
  nets::OperatorVars op;
  nets::DenseVars direct;
  ad::Var k;  // materialised linear operator
};

Bound bind_system(ad::Graph& g, const KoodosSystem& sys, bool trainable) {
  Bound b;
  b.theta = trainable ? g.param(sys.thetas) : g.constant(sys.thetas);
  if (sys.config.ablation.no_koopman) {
    b.direct = nets::bind(g, sys.direct->net, trainable);
  } else {
    b.enc = nets::bind(g, sys.autoencoder.encoder, trainable);
    b.dec = nets::bind(g, sys.autoencoder.decoder, trainable);
    b.op = nets::bind(g, sys.op, trainable);
    if (sys.op.is_linear()) b.k = nets::materialize_operator(b.op);
  }
  return b;
}

ad::Var propagate(const KoodosSystem& sys, const Bound& b, ad::Var state, double t0, double t1) {
  const KoodosConfig& cfg = sys.config;
  ode::IntegrationConfig rk = cfg.integration;
  rk.method = ode::Method::Rk4;
  if (cfg.ablation.no_koopman) {
    const ode::Field f = [&](ad::Var s, double t) { return nets::direct_dynamics(b.direct, s, t); };
    return ode::integrate_field(f, state, t0, t1, rk);
  }
  if (!sys.op.is_linear()) {
    const ode::Field f = [&](ad::Var s, double) { return nets::latent_field(b.op, ad::Var{}, s); };
    return ode::integrate_field(f, state, t0, t1, rk);
  }
  return ode::integrate_linear(b.k, state, t0, t1, cfg.integration);
}

// Flows every scheduled origin state forward through the consecutive gaps
// once, so each pair prediction reuses the segments it shares with others.
// Rows of the result follow the pair order.
ad::Var predict_pairs(const KoodosSystem& sys, const Bound& b, ad::Var states, const PairSet& pairs) {
  const std::size_t t_count = sys.timestamps.size();
  std::vector<std::ptrdiff_t> last_use(t_count, -1);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs.origin[p] > pairs.target[p] || pairs.target[p] >= t_count)
      throw InvalidArgument("invalid pair (" + std::to_string(pairs.origin[p]) + " -> " +
                            std::to_string(pairs.target[p]) + ")");
    if (p > 0 && (pairs.target[p] < pairs.target[p - 1] ||
                  (pairs.target[p] == pairs.target[p - 1] && pairs.origin[p] <= pairs.origin[p - 1])))
      throw InvalidArgument("pairs must be sorted by target, then origin");
    last_use[pairs.origin[p]] = std::max<std::ptrdiff_t>(last_use[pairs.origin[p]], static_cast<std::ptrdiff_t>(pairs.target[p]));
  }
  std::vector<std::size_t> active;
  ad::Var s;
  std::vector<ad::Var> parts;
  std::size_t p = 0;
  for (std::size_t k = 0; k < t_count && p < pairs.size(); ++k) {
    if (k > 0 && !active.empty()) s = propagate(sys, b, s, sys.timestamps[k - 1], sys.timestamps[k]);
    if (last_use[k] >= static_cast<std::ptrdiff_t>(k)) {
      const ad::Var row = ad::slice_rows(states, k, k + 1);
      if (active.empty()) {
        s = row;
      } else {
        const ad::Var both[] = {s, row};
        s = ad::concat_rows(both);
      }
      active.push_back(k);
    }
    std::vector<std::size_t> pos;
    for (; p < pairs.size() && pairs.target[p] == k; ++p)
      pos.push_back(static_cast<std::size_t>(
          std::lower_bound(active.begin(), active.end(), pairs.origin[p]) - active.begin()));
    if (!pos.empty()) {
      bool identity = pos.size() == active.size();
      for (std::size_t q = 0; identity && q < pos.size(); ++q) identity = pos[q] == q;
      parts.push_back(identity ? s : ad::gather_rows(s, pos));
    }
    std::vector<std::size_t> keep;
    std::vector<std::size_t> kept_origins;
    for (std::size_t q = 0; q < active.size(); ++q)
      if (last_use[active[q]] > static_cast<std::ptrdiff_t>(k)) {
        keep.push_back(q);
        kept_origins.push_back(active[q]);
      }
    if (keep.size() != active.size()) {
      if (!keep.empty()) s = ad::gather_rows(s, keep);
      active = std::move(kept_origins);
    }
  }
  return parts.size() == 1 ? parts[0] : ad::concat_rows(parts);
}

struct Batch {
  std::vector<Tensor> x, y;
};

Batch full_batch(const std::vector<domains::Domain>& data) {
  Batch b;
  for (const auto& d : data) {
    b.x.push_back(d.x);
    b.y.push_back(d.y);
  }
  return b;
}

struct Terms {
  std::optional<ad::Var> intri, integ, recon, dyna, consis;
};

struct TermMask {
  bool intri = true, integ = true, recon = true, dyna = true, consis = true;
};

ad::Var sum_scalars(std::vector<ad::Var>& scalars) {
  return scalars.size() == 1 ? scalars[0] : ad::sum(ad::concat_cols(scalars));
}

Terms build_terms(ad::Graph& g, const KoodosSystem& sys, const Bound& b, const Batch& batch,
                  const PairSet& pairs, TermMask mask) {
  const KoodosConfig& cfg = sys.config;
  const nets::MlpSpec& spec = cfg.model;
  const nets::ParamLayout layout = nets::ParamLayout::for_spec(spec);
  const std::size_t t_count = sys.timestamps.size();
  const bool koopman = !cfg.ablation.no_koopman;
  if (!koopman) mask.recon = mask.dyna = false;
  const bool need_pairs = pairs.size() > 0 && (mask.integ || mask.dyna || mask.consis);

  std::vector<ad::Var> xs, ys;
  if (mask.intri || (need_pairs && mask.integ))
    for (std::size_t i = 0; i < t_count; ++i) {
      xs.push_back(g.constant(batch.x[i]));
      ys.push_back(g.constant(batch.y[i]));
    }

  Terms out;
  if (mask.intri) {
    std::vector<ad::Var> per;
    for (std::size_t i = 0; i < t_count; ++i) {
      const ad::Var th = ad::slice_rows(b.theta, i, i + 1);
      per.push_back(task_loss_var(spec.task, nets::forward_logits(spec, layout, th, xs[i]), ys[i]));
    }
    out.intri = sum_scalars(per);
  }

  ad::Var z;
  if (koopman && (mask.recon || need_pairs)) z = nets::forward(b.enc, b.theta);
  if (mask.recon) out.recon = ad::sum(ad::row_norms(ad::sub(b.theta, nets::forward(b.dec, z))));

  if (need_pairs) {
    const ad::Var pred = predict_pairs(sys, b, koopman ? z : b.theta, pairs);
    if (mask.dyna) out.dyna = ad::sum(ad::row_norms(ad::sub(ad::gather_rows(z, pairs.target), pred)));
    ad::Var theta_hat;
    if (mask.consis || mask.integ) theta_hat = koopman ? nets::forward(b.dec, pred) : pred;
    if (mask.consis)
      out.consis = ad::sum(ad::row_norms(ad::sub(ad::gather_rows(b.theta, pairs.target), theta_hat)));
    if (mask.integ) {
      std::vector<ad::Var> per;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const std::size_t i = pairs.target[p];
        const ad::Var th = ad::slice_rows(theta_hat, p, p + 1);
        per.push_back(task_loss_var(spec.task, nets::forward_logits(spec, layout, th, xs[i]), ys[i]));
      }
      out.integ = sum_scalars(per);
    }
  } else if (pairs.size() == 0) {
    // An empty pair set contributes exact zeros.
    const ad::Var zero = g.constant(Tensor(1, 1));
    if (mask.integ) out.integ = zero;
    if (mask.dyna) out.dyna = zero;
    if (mask.consis) out.consis = zero;
  }
  return out;
}

double value_or_zero(const std::optional<ad::Var>& v) { return v ? v->value().item() : 0.0; }

void require_koopman(const KoodosSystem& sys, const char* what) {
  if (sys.config.ablation.no_koopman)
    throw InvalidArgument(std::string(what) + " is undefined without the Koopman pipeline");
}

double evaluate_term(const KoodosSystem& sys, const std::vector<domains::Domain>* data, const PairSet& pairs,
                     TermMask mask, std::optional<ad::Var> Terms::*which) {
  ad::Graph g;
  const Bound b = bind_system(g, sys, false);
  Batch batch;
  if (data != nullptr) {
    if (data->size() != sys.domain_count())
      throw InvalidArgument("expected " + std::to_string(sys.domain_count()) + " domains, got " +
                            std::to_string(data->size()));
    for (const auto& d : *data) check_domain_for_model(d, sys.config.model);
    batch = full_batch(*data);
  }
  const Terms t = build_terms(g, sys, b, batch, pairs, mask);
  return value_or_zero(t.*which);
}

}  // namespace

double loss_intri(const KoodosSystem& sys, const std::vector<domains::Domain>& data) {
  return evaluate_term(sys, &data, PairSet{}, {true, false, false, false, false}, &Terms::intri);
}

double loss_recon(const KoodosSystem& sys) {
  require_koopman(sys, "loss_recon");
  return evaluate_term(sys, nullptr, PairSet{}, {false, false, true, false, false}, &Terms::recon);
}

double loss_dyna(const KoodosSystem& sys, const PairSet& pairs) {
  require_koopman(sys, "loss_dyna");
  return evaluate_term(sys, nullptr, pairs, {false, false, false, true, false}, &Terms::dyna);
}

double loss_consis(const KoodosSystem& sys, const PairSet& pairs) {
  return evaluate_term(sys, nullptr, pairs, {false, false, false, false, true}, &Terms::consis);
}

double loss_integ(const KoodosSystem& sys, const std::vector<domains::Domain>& data, const PairSet& pairs) {
  return evaluate_term(sys, &data, pairs, {false, true, false, false, false}, &Terms::integ);
}

// ---------------------------------------------------------------------------
// Training

KoodosSystem assemble_system(const KoodosConfig& config, std::vector<double> timestamps, Tensor thetas) {
  config.validate();
  const std::size_t p_count = nets::ParamLayout::for_spec(config.model).parameter_count;
  if (thetas.rows() != timestamps.size() || thetas.cols() != p_count)
    throw ShapeError("assemble_system: parameters " + thetas.shape_str() + " for " +
                     std::to_string(timestamps.size()) + " timestamps and " + std::to_string(p_count) +
                     " parameters per model");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (!(timestamps[i] > timestamps[i - 1]))
      throw InvalidArgument("timestamps must be strictly increasing: t[" + std::to_string(i - 1) +
                            "]=" + std::to_string(timestamps[i - 1]) + ", t[" + std::to_string(i) +
                            "]=" + std::to_string(timestamps[i]));
  KoodosSystem sys;
  sys.config = config;
  sys.timestamps = std::move(timestamps);
  sys.thetas = std::move(thetas);
  if (config.ablation.no_koopman) {
    std::mt19937_64 rng(derive_seed(config.seed, kStreamDirect));
    sys.direct = nets::init_direct_dynamics(p_count, config.direct_hidden, rng);
  } else {
    std::mt19937_64 ae_rng(derive_seed(config.seed, kStreamAutoencoder));
    sys.autoencoder = nets::init_autoencoder(nets::AutoencoderSpec{p_count, config.autoencoder_widths}, ae_rng);
    std::mt19937_64 op_rng(derive_seed(config.seed, kStreamOperator));
    sys.op = nets::init_operator(config.operator_kind, config.latent_dim(), config.operator_rank, op_rng);
  }
  return sys;
}

namespace {

Tensor warm_start(const std::vector<domains::Domain>& data, const KoodosConfig& cfg) {
  const std::size_t p_count = nets::ParamLayout::for_spec(cfg.model).parameter_count;
  std::mt19937_64 init_rng(derive_seed(cfg.seed, kStreamInit));
  const Tensor shared = nets::flatten(nets::init_predictive(cfg.model, init_rng), cfg.model).theta;
  Tensor thetas(data.size(), p_count);
  Tensor prev = shared;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Tensor& init = cfg.warm_start == WarmStart::Chained ? prev : shared;
    const nets::FlatParams th =
        erm_pretrain(data[i], cfg.model, cfg.warm_epochs, cfg.lr_predictive, derive_seed(cfg.seed, kStreamWarm + i), &init);
    std::copy_n(th.theta.data(), p_count, thetas.data() + i * p_count);
    prev = th.theta;
  }
  return thetas;
}

Batch sample_batch(const std::vector<domains::Domain>& data, std::size_t batch_size, std::mt19937_64& rng) {
  Batch b;
  std::vector<std::size_t> idx;
  for (const auto& d : data) {
    if (batch_size == 0 || batch_size >= d.size()) {
      b.x.push_back(d.x);
      b.y.push_back(d.y);
      continue;
    }
    std::uniform_int_distribution<std::size_t> u(0, d.size() - 1);
    idx.resize(batch_size);
    for (auto& i : idx) i = u(rng);
    b.x.push_back(gather(d.x, idx));
    b.y.push_back(gather(d.y, idx));
  }
  return b;
}

}  // namespace

namespace {

struct Step {
  HistoryRow row;
  std::vector<Tensor> grads;  // trainable_tensors order
};

Step objective_step(const KoodosSystem& sys, const Batch& batch, const PairSet& pairs, bool with_grads) {
  const KoodosConfig& config = sys.config;
  const Ablation& abl = config.ablation;
  const TermMask mask{true, !abl.no_integ, !abl.no_recon, !abl.no_dyna, !abl.no_consis};
  ad::Graph g;
  const Bound b = bind_system(g, sys, true);
  const Terms t = build_terms(g, sys, b, batch, pairs, mask);

  std::vector<ad::Var> weighted;
  auto add_term = [&](const std::optional<ad::Var>& v, double w) {
    if (v && w != 0.0) weighted.push_back(ad::scale(*v, w));
  };
  add_term(t.intri, config.alpha);
  add_term(t.integ, config.alpha);
  add_term(t.recon, config.beta);
  add_term(t.consis, config.beta);
  add_term(t.dyna, config.gamma);
  if (weighted.empty()) throw InvalidArgument("every loss term is disabled or has zero weight");
  const ad::Var combined = sum_scalars(weighted);

  Step step;
  step.row.intri = value_or_zero(t.intri);
  step.row.integ = value_or_zero(t.integ);
  step.row.recon = value_or_zero(t.recon);
  step.row.dyna = value_or_zero(t.dyna);
  step.row.consis = value_or_zero(t.consis);
  step.row.combined = combined.value().item();
  if (!with_grads) return step;

  const ad::Gradients grads = g.backward(combined);
  std::vector<ad::Var> vars{b.theta};
  if (abl.no_koopman) {
    for (const ad::Var& v : nets::all_vars(b.direct)) vars.push_back(v);
  } else {
    for (const ad::Var& v : nets::all_vars(b.enc)) vars.push_back(v);
    for (const ad::Var& v : nets::all_vars(b.dec)) vars.push_back(v);
    for (const ad::Var& v : nets::all_vars(b.op)) vars.push_back(v);
  }
  for (const ad::Var& v : vars) step.grads.push_back(grads.of(v));
  return step;
}

}  // namespace

std::vector<Tensor*> trainable_tensors(KoodosSystem& sys) {
  std::vector<Tensor*> out{&sys.thetas};
  if (sys.config.ablation.no_koopman) {
    if (!sys.direct) throw InvalidArgument("system has no direct-dynamics network");
    for (Tensor* t : nets::all_tensors(sys.direct->net)) out.push_back(t);
  } else {
    for (Tensor* t : nets::all_tensors(sys.autoencoder.encoder)) out.push_back(t);
    for (Tensor* t : nets::all_tensors(sys.autoencoder.decoder)) out.push_back(t);
    for (Tensor* t : nets::all_tensors(sys.op)) out.push_back(t);
  }
  return out;
}

Objective objective(const KoodosSystem& sys, const std::vector<domains::Domain>& data, const PairSet& pairs,
                    bool with_gradients) {
  if (data.size() != sys.domain_count())
    throw InvalidArgument("expected " + std::to_string(sys.domain_count()) + " domains, got " +
                          std::to_string(data.size()));
  for (const auto& d : data) check_domain_for_model(d, sys.config.model);
  Step step = objective_step(sys, full_batch(data), pairs, with_gradients);
  return Objective{step.row, std::move(step.grads)};
}

KoodosSystem train_joint(const std::vector<domains::Domain>& data, const KoodosConfig& config) {
  config.validate();
  if (data.empty()) throw InvalidArgument("train_joint: no domains");
  std::vector<double> ts;
  for (const auto& d : data) {
    check_domain_for_model(d, config.model);
    ts.push_back(d.t);
  }
  Tensor thetas = warm_start(data, config);
  KoodosSystem sys = assemble_system(config, std::move(ts), std::move(thetas));
  if (data.size() == 1) {
    sys.static_model = true;
    sys.warnings.push_back("single domain: no dynamics learnable");
    return sys;
  }

  const PairSet pairs = PairSet::schedule(data.size(), config.pairs, config.window);
  std::vector<Tensor*> params = trainable_tensors(sys);
  const std::span<Tensor* const> theta_param(params.data(), 1);
  const std::span<Tensor* const> other_params(params.data() + 1, params.size() - 1);
  AdamState theta_state(AdamHyper{.lr = config.lr_predictive});
  AdamState other_state(AdamHyper{.lr = config.lr_other});
  std::mt19937_64 batch_rng(derive_seed(config.seed, kStreamBatches));

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  for (std::size_t epoch = 0; epoch < config.joint_epochs; ++epoch) {
    const Batch batch = sample_batch(data, config.batch_size, batch_rng);
    Step step = objective_step(sys, batch, pairs, true);
    step.row.epoch = epoch;
    sys.history.push_back(step.row);

    const double factor = config.lr_schedule == LrSchedule::Cosine
                              ? 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(epoch) /
                                                      static_cast<double>(config.joint_epochs)))
                              : 1.0;
    theta_state.hyper.lr = config.lr_predictive * factor;
    other_state.hyper.lr = config.lr_other * factor;
    std::vector<const Tensor*> grads;
    for (const Tensor& gr : step.grads) grads.push_back(&gr);
    if (epoch >= config.theta_freeze_epochs)
      adam_step(theta_param, std::span<const Tensor* const>(grads.data(), 1), theta_state);
    adam_step(other_params, std::span<const Tensor* const>(grads.data() + 1, grads.size() - 1), other_state);

    if (config.early_stop_patience > 0) {
      if (step.row.combined < best * (1.0 - config.early_stop_rel)) {
        best = step.row.combined;
        best_epoch = epoch;
      } else if (epoch - best_epoch >= config.early_stop_patience) {
        break;
      }
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Inference

std::size_t anchor_index(const KoodosSystem& sys, double s) {
  const auto& ts = sys.timestamps;
  if (ts.empty()) throw InvalidArgument("system has no observations");
  if (sys.config.anchor == Anchor::Nearest) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < ts.size(); ++i)
      if (std::abs(ts[i] - s) < std::abs(ts[best] - s)) best = i;
    return best;
  }
  const auto it = std::upper_bound(ts.begin(), ts.end(), s);
  return it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
}

Tensor latent_at(const KoodosSystem& sys, double s) {
  require_koopman(sys, "latent_at");
  const std::size_t a = anchor_index(sys, s);
  const Tensor z = nets::encode(sys.autoencoder, Tensor::row(sys.thetas.row_span(a)));
  if (sys.op.is_linear())
    return ode::integrate_linear(nets::materialize_operator(sys.op), z, sys.timestamps[a], s, sys.config.integration);
  ode::IntegrationConfig rk = sys.config.integration;
  rk.method = ode::Method::Rk4;
  const ode::PlainField f = [&](const Tensor& x, double) { return nets::forward(sys.op.net, x); };
  return ode::integrate_field(f, z, sys.timestamps[a], s, rk);
}

nets::FlatParams generalize(const KoodosSystem& sys, double s) {
  if (!std::isfinite(s)) throw InvalidArgument("query time must be finite");
  const std::size_t a = anchor_index(sys, s);
  if (sys.static_model) return sys.theta(a);
  if (sys.config.ablation.no_koopman) {
    ode::IntegrationConfig rk = sys.config.integration;
    rk.method = ode::Method::Rk4;
    const ode::PlainField f = [&](const Tensor& x, double t) { return nets::direct_dynamics(*sys.direct, x, t); };
    return nets::FlatParams::from_row(
        ode::integrate_field(f, Tensor::row(sys.thetas.row_span(a)), sys.timestamps[a], s, rk), sys.config.model);
  }
  return nets::decode(sys.autoencoder, latent_at(sys, s), sys.config.model);
}

// ---------------------------------------------------------------------------
// Evaluation

std::string to_string(Metric m) {
  switch (m) {
    case Metric::ErrorRate: return "error_rate";
    case Metric::Mae: return "mae";
    case Metric::Auc: return "auc";
  }
  return "error_rate";
}

Metric metric_from_string(const std::string& s) {
  return parse_enum<Metric>(s, {{"error_rate", Metric::ErrorRate}, {"mae", Metric::Mae}, {"auc", Metric::Auc}},
                            "metric");
}

double auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size()) throw ShapeError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + j + 1);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1.0) {
        pos_rank_sum += mid_rank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InvalidArgument("auc needs both positive and negative labels");
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1) / 2) / (np * static_cast<double>(n_neg));
}

double score(const nets::FlatParams& params, const domains::Domain& domain, Metric metric) {
  check_domain_for_model(domain, params.spec);
  const Tensor out = nets::predict(params, domain.x);
  const bool binary = params.spec.task == nets::TaskKind::BinaryClassification;
  switch (metric) {
    case Metric::ErrorRate: {
      if (!binary) throw InvalidArgument("error_rate needs a binary-classification task");
      std::size_t wrong = 0;
      for (std::size_t i = 0; i < out.rows(); ++i) wrong += (out[i] > 0.5 ? 1.0 : 0.0) != domain.y[i];
      return 100.0 * static_cast<double>(wrong) / static_cast<double>(out.rows());
    }
    case Metric::Mae: {
      double s = 0.0;
      for (std::size_t i = 0; i < out.rows(); ++i) s += std::abs(out[i] - domain.y[i]);
      return s / static_cast<double>(out.rows());
    }
    case Metric::Auc: {
      if (!binary) throw InvalidArgument("auc needs a binary-classification task");
      return auc({out.values().begin(), out.values().end()}, {domain.y.values().begin(), domain.y.values().end()});
    }
  }
  return 0.0;
}

namespace {

Evaluation finish(Evaluation e) {
  double s = 0.0;
  for (const auto& [t, v] : e.per_domain) s += v;
  e.aggregate = e.per_domain.empty() ? 0.0 : s / static_cast<double>(e.per_domain.size());
  return e;
}

}  // namespace

Evaluation evaluate(const KoodosSystem& sys, const std::vector<domains::Domain>& test, Metric metric) {
  Evaluation e;
  e.metric = metric;
  for (const auto& d : test) e.per_domain.emplace_back(d.t, score(generalize(sys, d.t), d, metric));
  return finish(std::move(e));
}

Evaluation evaluate_fixed(const nets::FlatParams& params, const std::vector<domains::Domain>& test, Metric metric) {
  Evaluation e;
  e.metric = metric;
  for (const auto& d : test) e.per_domain.emplace_back(d.t, score(params, d, metric));
  return finish(std::move(e));
}

// ---------------------------------------------------------------------------
// Baselines

nets::FlatParams baseline_offline(const std::vector<domains::Domain>& data, const KoodosConfig& config) {
  config.validate();
  if (data.empty()) throw InvalidArgument("baseline_offline: no domains");
  for (const auto& d : data) check_domain_for_model(d, config.model);
  const domains::Domain pooled = domains::pool_domains(data);
  return erm_pretrain(pooled, config.model, config.warm_epochs, config.lr_predictive,
                      derive_seed(config.seed, kStreamBaseline));
}

nets::FlatParams baseline_lastdomain(const std::vector<domains::Domain>& data, const KoodosConfig& config) {
  config.validate();
  if (data.empty()) throw InvalidArgument("baseline_lastdomain: no domains");
  return erm_pretrain(data.back(), config.model, config.warm_epochs, config.lr_predictive,
                      derive_seed(config.seed, kStreamBaseline));
}

void write_history_csv(const KoodosSystem& sys, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "epoch,L_intri,L_integ,L_recon,L_dyna,L_consis,combined\n";
  char buf[256];
  for (const HistoryRow& h : sys.history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", h.epoch, h.intri, h.integ, h.recon,
                  h.dyna, h.consis, h.combined);
    out << buf;
  }
  if (!out) throw IoError("failed writing " + file.string());
}

}  // namespace koodos
