// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtune/data.hpp"
#include "rtune/eval.hpp"
#include "rtune/forecaster.hpp"

namespace rtune {

// Losses ----------------------------------------------------------------------

/// Cross-entropy -sum_j p_old[j] log p_new[j] of the temperature-softened
/// distributions of two logit vectors.
double distill_loss(std::span<const double> y_old, std::span<const double> y_new,
                    double tau);

/// Mean over samples of ||pred - label||^2.
double task_loss(std::span<const Vector> predictions,
                 std::span<const Vector> labels);

/// task + lambda * output + beta * theta_norm_sq.
double total_loss(double task, double output, double theta_norm_sq,
                  double lambda, double beta);

/// The composite objective of m_new on a batch, teacher held fixed. This is
/// the function grad_total differentiates.
double evaluate_total_loss(const Forecaster& m_new, const Forecaster& teacher,
                           std::span<const Vector> inputs,
                           std::span<const Vector> labels,
                           const LossWeights& weights);

// Configuration and reports -------------------------------------------------

struct TuneConfig {
  std::size_t replay_n = 2000;
  std::size_t wavelet_levels = 1;
  std::size_t discard_depth = 1;
  double alpha = 0.7;
  double tau = 3.0;
  double lambda = 0.2;
  double beta = 1e-4;
  std::size_t epochs = 10;
  double learning_rate = 1e-2;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  std::size_t rollout_steps = 10;  // closed-loop steps per replay latent

  /// Throws DomainError naming the first offending field.
  void validate() const;

  friend bool operator==(const TuneConfig&, const TuneConfig&) = default;
};

void to_json(nlohmann::json& j, const TuneConfig& c);
void from_json(const nlohmann::json& j, TuneConfig& c);

struct EpochRecord {
  double train_loss = 0.0;       // mean composite loss over the epoch's batches
  double validation_mae = 0.0;
  double validation_mse = 0.0;
};

struct TuneReport {
  std::string method;
  TuneConfig config;
  std::vector<EpochRecord> epochs;
  std::size_t selected_epoch = 0;  // 1-based; 0 when no epoch ran
  std::size_t train_size = 0;      // |D_train|
  std::size_t replay_size = 0;     // N (1 + k)
  std::size_t validation_size = 0;
  std::optional<MetricPair> old_task;
  std::optional<MetricPair> new_task;
  double wall_seconds = 0.0;
};

/// Serialized report. Wall-clock time is only included on request so that
/// seeded runs produce byte-identical documents.
nlohmann::json report_to_json(const TuneReport& report,
                              bool include_timing = false);
TuneReport report_from_json(const nlohmann::json& j);

/// Test sets evaluated after tuning. Either part may be empty.
struct EvalSets {
  std::vector<WindowedDataset> old_tests;
  std::optional<WindowedDataset> new_test;
};

struct TuneResult {
  Forecaster model;
  TuneReport report;
};

// Methods ---------------------------------------------------------------------

/// Replay tuning: synthesize replay from `frozen`, merge with the new-task
/// windows, and run mini-batch gradient descent on
/// L_task + lambda L_distill + beta ||theta||^2 against the frozen teacher.
/// The chronologically last validation_fraction of `new_data` is held out and
/// the epoch with the lowest validation MAE (earliest on ties) is returned.
TuneResult r_tune(const Forecaster& frozen, const WindowedDataset& new_data,
                  const TuneConfig& cfg, const EvalSets& eval = {});

/// Plain fine-tuning: r_tune with lambda = 0 and no replay (beta kept).
TuneResult vanilla_ft(const Forecaster& frozen, const WindowedDataset& new_data,
                      const TuneConfig& cfg, const EvalSets& eval = {});

/// Distillation-only baseline (no replay, lambda as configured).
TuneResult distill_only(const Forecaster& frozen,
                        const WindowedDataset& new_data, const TuneConfig& cfg,
                        const EvalSets& eval = {});

/// No training; evaluates `frozen` on the given sets.
TuneReport frozen_eval(const Forecaster& frozen, const EvalSets& eval);

// Pretraining of the stand-in "old" model --------------------------------------

struct PretrainOptions {
  std::size_t hidden_width = Forecaster::kDefaultHidden;
  std::size_t epochs = 30;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

/// Random initialization followed by mini-batch descent on the task loss.
Forecaster pretrain(const WindowedDataset& data, const PretrainOptions& opts);

}  // namespace rtune
