// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Joint training of per-domain predictive parameters, a Koopman
// autoencoder and a latent linear operator, plus inference at arbitrary
// times and the two ERM baselines.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "koodos/autodiff.hpp"
#include "koodos/domains.hpp"
#include "koodos/nets.hpp"
#include "koodos/odeflow.hpp"

namespace koodos {

enum class PairScheduleKind { AllPairs, Window, Chain };
enum class WarmStart { Chained, Independent };
enum class Anchor { Latest, Nearest };
enum class LrSchedule { Constant, Cosine };

std::string to_string(PairScheduleKind k);
std::string to_string(WarmStart w);
std::string to_string(Anchor a);
std::string to_string(LrSchedule s);
PairScheduleKind pair_schedule_from_string(const std::string& s);
WarmStart warm_start_from_string(const std::string& s);
Anchor anchor_from_string(const std::string& s);
LrSchedule lr_schedule_from_string(const std::string& s);

struct Ablation {
  bool no_integ = false;
  bool no_recon = false;
  bool no_dyna = false;
  bool no_consis = false;
  /// Replace encoder, operator and decoder by a network integrating θ
  /// directly.
  bool no_koopman = false;
  friend bool operator==(const Ablation&, const Ablation&) = default;
};

struct KoodosConfig {
  double alpha = 1.0;    // L_intri, L_integ
  double beta = 100.0;   // L_recon, L_consis
  double gamma = 10.0;   // L_dyna
  double lr_predictive = 1e-2;
  double lr_other = 1e-3;
  LrSchedule lr_schedule = LrSchedule::Constant;
  std::size_t warm_epochs = 200;
  std::size_t joint_epochs = 500;
  /// Leading joint epochs that update only the Koopman networks while θ
  /// keeps its warm-start values.
  std::size_t theta_freeze_epochs = 0;
  /// Instances sampled (with replacement) per domain for each joint step;
  /// 0 uses every instance.
  std::size_t batch_size = 0;
  PairScheduleKind pairs = PairScheduleKind::AllPairs;
  std::size_t window = 1;
  Ablation ablation;
  nets::MlpSpec model{{2, 50, 50, 50, 1}, nets::TaskKind::BinaryClassification};
  std::vector<std::size_t> autoencoder_widths{1024, 512, 128, 32};
  nets::OperatorKind operator_kind = nets::OperatorKind::Full;
  std::size_t operator_rank = 0;
  std::vector<std::size_t> direct_hidden{64, 64};
  ode::IntegrationConfig integration;
  /// Independent: every domain starts ERM from the shared initialization.
  /// Chained: domain i starts from the warm-start result of domain i−1.
  WarmStart warm_start = WarmStart::Independent;
  Anchor anchor = Anchor::Latest;
  /// Stop once the best combined loss has not improved by this relative
  /// amount for `early_stop_patience` epochs; patience 0 disables.
  double early_stop_rel = 1e-5;
  std::size_t early_stop_patience = 50;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t latent_dim() const { return autoencoder_widths.back(); }
};

/// Ordered (origin j, target i) pairs with j ≤ i, sorted by target then
/// origin.
struct PairSet {
  std::vector<std::size_t> origin;
  std::vector<std::size_t> target;
  std::size_t size() const { return origin.size(); }
  static PairSet schedule(std::size_t domain_count, PairScheduleKind kind, std::size_t window = 1);
  static PairSet self_pairs(std::size_t domain_count);
};

struct HistoryRow {
  std::size_t epoch = 0;
  double intri = 0, integ = 0, recon = 0, dyna = 0, consis = 0, combined = 0;
};

struct KoodosSystem {
  KoodosConfig config;
  std::vector<double> timestamps;
  Tensor thetas;  // T×P, row i belongs to timestamps[i]
  nets::Autoencoder autoencoder;
  nets::OperatorSpec op;
  std::optional<nets::DirectDynamics> direct;  // no_koopman systems
  /// Set for single-domain systems: generalize returns the anchor θ.
  bool static_model = false;
  std::vector<HistoryRow> history;
  std::vector<std::string> warnings;
  std::optional<Tensor> baseline_offline;     // 1×P
  std::optional<Tensor> baseline_lastdomain;  // 1×P

  std::size_t domain_count() const { return timestamps.size(); }
  nets::FlatParams theta(std::size_t i) const;
};

/// Per-domain ERM with Adam. batch_size 0 means one full-batch step per
/// epoch; otherwise each epoch is a shuffled pass of minibatches.
nets::FlatParams erm_pretrain(const domains::Domain& domain, const nets::MlpSpec& spec,
                              std::size_t epochs, double lr, std::uint64_t seed,
                              const Tensor* init = nullptr, std::size_t batch_size = 0);

/// Mean task loss of parameters on a dataset: BCE for binary tasks, MSE for
/// regression.
double task_loss(const nets::FlatParams& params, const domains::Domain& domain);

// Loss terms evaluated on a system (no minibatching).
double loss_intri(const KoodosSystem& sys, const std::vector<domains::Domain>& data);
double loss_recon(const KoodosSystem& sys);
double loss_dyna(const KoodosSystem& sys, const PairSet& pairs);
double loss_consis(const KoodosSystem& sys, const PairSet& pairs);
double loss_integ(const KoodosSystem& sys, const std::vector<domains::Domain>& data, const PairSet& pairs);

/// Weighted training objective on full batches. `terms` holds the raw loss
/// values; gradients follow trainable_tensors order.
struct Objective {
  HistoryRow terms;
  std::vector<Tensor> gradients;
};
Objective objective(const KoodosSystem& sys, const std::vector<domains::Domain>& data, const PairSet& pairs,
                    bool with_gradients = true);

/// θ rows first, then the autoencoder and operator tensors (or the
/// direct-dynamics network).
std::vector<Tensor*> trainable_tensors(KoodosSystem& sys);

/// Warm start followed by joint optimisation.
KoodosSystem train_joint(const std::vector<domains::Domain>& data, const KoodosConfig& config);

/// Untrained system around given per-domain parameters; used to evaluate
/// losses on hand-built configurations.
KoodosSystem assemble_system(const KoodosConfig& config, std::vector<double> timestamps, Tensor thetas);

/// Index of the anchor observation for query time s.
std::size_t anchor_index(const KoodosSystem& sys, double s);
/// Latent state at time s flowed from the anchor (Koopman systems only).
Tensor latent_at(const KoodosSystem& sys, double s);
nets::FlatParams generalize(const KoodosSystem& sys, double s);

enum class Metric { ErrorRate, Mae, Auc };
std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

/// Error rate in percent, mean absolute error, or ROC AUC.
double score(const nets::FlatParams& params, const domains::Domain& domain, Metric metric);
double auc(const std::vector<double>& scores, const std::vector<double>& labels);

struct Evaluation {
  Metric metric = Metric::ErrorRate;
  std::vector<std::pair<double, double>> per_domain;  // (t, value)
  double aggregate = 0.0;                              // mean over domains
};
Evaluation evaluate(const KoodosSystem& sys, const std::vector<domains::Domain>& test, Metric metric);
Evaluation evaluate_fixed(const nets::FlatParams& params, const std::vector<domains::Domain>& test,
                          Metric metric);

nets::FlatParams baseline_offline(const std::vector<domains::Domain>& data, const KoodosConfig& config);
nets::FlatParams baseline_lastdomain(const std::vector<domains::Domain>& data, const KoodosConfig& config);

void write_history_csv(const KoodosSystem& sys, const std::filesystem::path& file);

}  // namespace koodos
