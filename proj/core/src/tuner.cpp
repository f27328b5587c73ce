// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include "rtune/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "rtune/replay.hpp"

namespace rtune {

void TuneConfig::validate() const {
  auto fail = [](const std::string& what) { throw DomainError(what); };
  if (wavelet_levels == 0) fail("wavelet_levels must be >= 1");
  if (discard_depth > wavelet_levels) {
    fail("discard_depth must not exceed wavelet_levels");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must lie in [0, 1]");
  if (!(tau > 0.0)) fail("tau must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must lie in [0, 1]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be >= 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    fail("learning_rate must be >= 0");
  }
  if (batch_size == 0) fail("batch_size must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    fail("validation_fraction must lie in (0, 1)");
  }
}

void to_json(nlohmann::json& j, const TuneConfig& c) {
  j = nlohmann::json{{"replay_n", c.replay_n},
                     {"wavelet_levels", c.wavelet_levels},
                     {"discard_depth", c.discard_depth},
                     {"alpha", c.alpha},
                     {"tau", c.tau},
                     {"lambda", c.lambda},
                     {"beta", c.beta},
                     {"epochs", c.epochs},
                     {"learning_rate", c.learning_rate},
                     {"batch_size", c.batch_size},
                     {"seed", c.seed},
                     {"validation_fraction", c.validation_fraction},
                     {"rollout_steps", c.rollout_steps}};
}

void from_json(const nlohmann::json& j, TuneConfig& c) {
  j.at("replay_n").get_to(c.replay_n);
  j.at("wavelet_levels").get_to(c.wavelet_levels);
  j.at("discard_depth").get_to(c.discard_depth);
  j.at("alpha").get_to(c.alpha);
  j.at("tau").get_to(c.tau);
  j.at("lambda").get_to(c.lambda);
  j.at("beta").get_to(c.beta);
  j.at("epochs").get_to(c.epochs);
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("batch_size").get_to(c.batch_size);
  j.at("seed").get_to(c.seed);
  j.at("validation_fraction").get_to(c.validation_fraction);
  j.at("rollout_steps").get_to(c.rollout_steps);
}

nlohmann::json report_to_json(const TuneReport& report, bool include_timing) {
  nlohmann::json epochs = nlohmann::json::array();
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const auto& r = report.epochs[e];
    epochs.push_back({{"epoch", e + 1},
                      {"train_loss", r.train_loss},
                      {"validation_mae", r.validation_mae},
                      {"validation_mse", r.validation_mse}});
  }
  nlohmann::json j{{"method", report.method},
                   {"config", report.config},
                   {"epochs", epochs},
                   {"selected_epoch", report.selected_epoch},
                   {"train_size", report.train_size},
                   {"replay_size", report.replay_size},
                   {"validation_size", report.validation_size},
                   {"old_task", nullptr},
                   {"new_task", nullptr}};
  if (report.old_task) j["old_task"] = *report.old_task;
  if (report.new_task) j["new_task"] = *report.new_task;
  if (include_timing) j["wall_seconds"] = report.wall_seconds;
  return j;
}

TuneReport report_from_json(const nlohmann::json& j) {
  TuneReport r;
  j.at("method").get_to(r.method);
  j.at("config").get_to(r.config);
  for (const auto& e : j.at("epochs")) {
    r.epochs.push_back({e.at("train_loss").get<double>(),
                        e.at("validation_mae").get<double>(),
                        e.at("validation_mse").get<double>()});
  }
  j.at("selected_epoch").get_to(r.selected_epoch);
  j.at("train_size").get_to(r.train_size);
  j.at("replay_size").get_to(r.replay_size);
  j.at("validation_size").get_to(r.validation_size);
  if (!j.at("old_task").is_null()) r.old_task = j.at("old_task").get<MetricPair>();
  if (!j.at("new_task").is_null()) r.new_task = j.at("new_task").get<MetricPair>();
  if (j.contains("wall_seconds")) j.at("wall_seconds").get_to(r.wall_seconds);
  return r;
}

namespace {

// Independent random streams of a tuning run.
enum Stream : std::uint64_t { kReplayStream = 1, kMergeStream = 2, kBatchStream = 3 };

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_geometry(const Forecaster& m, const WindowedDataset& d,
                    const char* what) {
  if (d.input_width != m.input_width() || d.horizon != m.horizon()) {
    throw ShapeError(std::string(what) + " geometry (" +
                     std::to_string(d.input_width) + ", " +
                     std::to_string(d.horizon) + ") differs from the model (" +
                     std::to_string(m.input_width()) + ", " +
                     std::to_string(m.horizon()) + ")");
  }
}

void evaluate_into(const Forecaster& model, const EvalSets& eval,
                   TuneReport& report) {
  if (!eval.old_tests.empty()) {
    MetricPair avg;
    for (const auto& d : eval.old_tests) {
      check_geometry(model, d, "old-task test set");
      const auto m = evaluate_dataset(model, d);
      avg.mae += m.mae;
      avg.mse += m.mse;
      avg.n_samples += m.n_samples;
    }
    avg.mae /= static_cast<double>(eval.old_tests.size());
    avg.mse /= static_cast<double>(eval.old_tests.size());
    report.old_task = avg;
  }
  if (eval.new_test) {
    check_geometry(model, *eval.new_test, "new-task test set");
    report.new_task = evaluate_dataset(model, *eval.new_test);
  }
}

// Chronological hold-out: windows sorted by start index, the last
// `fraction` of them validate.
std::pair<WindowedDataset, WindowedDataset> holdout_split(
    const WindowedDataset& data, double fraction) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    return data.starts[a] < data.starts[b];
  });
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(fraction * static_cast<double>(data.size()))));
  if (n_val >= data.size()) {
    throw DomainError("too few new-task windows to hold out a validation set");
  }
  const std::span<const std::size_t> all(rows);
  return {data.subset(all.first(data.size() - n_val)),
          data.subset(all.last(n_val))};
}

// Mini-batch gradient descent over `train` for one epoch. Returns the mean
// batch objective.
double run_epoch(Forecaster& model, const WindowedDataset& train,
                 const std::vector<Vector>& teacher_logits,
                 const LossWeights& weights, double learning_rate,
                 std::size_t batch_size, std::mt19937_64& rng,
                 std::size_t epoch) {
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  const bool distill = weights.lambda != 0.0;
  std::vector<Vector> xs, ys, ts;
  double loss_sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t first = 0; first < order.size(); first += batch_size) {
    const std::size_t last = std::min(order.size(), first + batch_size);
    xs.clear();
    ys.clear();
    ts.clear();
    for (std::size_t i = first; i < last; ++i) {
      xs.push_back(train.inputs[order[i]]);
      ys.push_back(train.labels[order[i]]);
      if (distill) ts.push_back(teacher_logits[order[i]]);
    }
    LossAndGradient lg;
    try {
      lg = loss_and_gradient(model, ts, xs, ys, weights);
    } catch (const NonFiniteError&) {
      throw NonFiniteError("non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batches + 1) +
                           "; lower the learning rate");
    }
    auto& theta = model.mutable_theta();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] -= learning_rate * lg.gradient[i];
    }
    loss_sum += lg.loss;
    ++batches;
  }
  if (!all_finite(model.theta())) {
    throw NonFiniteError("parameters diverged at epoch " + std::to_string(epoch));
  }
  return loss_sum / static_cast<double>(batches);
}

TuneResult tune_impl(std::string method, const Forecaster& frozen,
                     const WindowedDataset& new_data, const TuneConfig& cfg,
                     const EvalSets& eval) {
  const auto t0 = Clock::now();
  cfg.validate();
  if (new_data.empty()) throw DomainError("new-task dataset is empty");
  check_geometry(frozen, new_data, "new-task data");

  TuneReport report;
  report.method = std::move(method);
  report.config = cfg;

  auto [train_part, validation] =
      holdout_split(new_data, cfg.validation_fraction);
  report.validation_size = validation.size();

  ReplaySet replay;
  if (cfg.replay_n > 0) {
    replay = build_replay_set(
        frozen, ReplayConfig{cfg.replay_n, cfg.wavelet_levels,
                             cfg.discard_depth, cfg.alpha,
                             derive_seed(cfg.seed, kReplayStream),
                             cfg.rollout_steps});
  }
  report.replay_size = replay.samples.size();
  const auto train =
      build_train_set(train_part, replay, derive_seed(cfg.seed, kMergeStream));
  report.train_size = train.size();

  const LossWeights weights{cfg.tau, cfg.lambda, cfg.beta};
  std::vector<Vector> teacher_logits;
  if (weights.lambda != 0.0) {
    teacher_logits.reserve(train.size());
    for (const auto& x : train.inputs) teacher_logits.push_back(frozen.forward(x));
  }

  Forecaster current = frozen;
  Forecaster best = frozen;
  double best_mae = 0.0;
  std::mt19937_64 rng(derive_seed(cfg.seed, kBatchStream));
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.train_loss = run_epoch(current, train, teacher_logits, weights,
                               cfg.learning_rate, cfg.batch_size, rng, epoch);
    const auto val = evaluate_dataset(current, validation);
    rec.validation_mae = val.mae;
    rec.validation_mse = val.mse;
    report.epochs.push_back(rec);
    if (epoch == 1 || val.mae < best_mae) {
      best_mae = val.mae;
      best = current;
      report.selected_epoch = epoch;
    }
  }

  evaluate_into(best, eval, report);
  report.wall_seconds = seconds_since(t0);
  return TuneResult{std::move(best), std::move(report)};
}

}  // namespace

TuneResult r_tune(const Forecaster& frozen, const WindowedDataset& new_data,
                  const TuneConfig& cfg, const EvalSets& eval) {
  return tune_impl("r-tuning", frozen, new_data, cfg, eval);
}

TuneResult vanilla_ft(const Forecaster& frozen, const WindowedDataset& new_data,
                      const TuneConfig& cfg, const EvalSets& eval) {
  TuneConfig ft = cfg;
  ft.lambda = 0.0;
  ft.replay_n = 0;
  return tune_impl("ft", frozen, new_data, ft, eval);
}

TuneResult distill_only(const Forecaster& frozen,
                        const WindowedDataset& new_data, const TuneConfig& cfg,
                        const EvalSets& eval) {
  TuneConfig lwf = cfg;
  lwf.replay_n = 0;
  return tune_impl("lwf", frozen, new_data, lwf, eval);
}

TuneReport frozen_eval(const Forecaster& frozen, const EvalSets& eval) {
  const auto t0 = Clock::now();
  TuneReport report;
  report.method = "frozen";
  report.config.epochs = 0;
  report.config.replay_n = 0;
  evaluate_into(frozen, eval, report);
  report.wall_seconds = seconds_since(t0);
  return report;
}

Forecaster pretrain(const WindowedDataset& data, const PretrainOptions& opts) {
  if (data.empty()) throw DomainError("pretraining data is empty");
  if (opts.batch_size == 0) throw DomainError("batch_size must be >= 1");
  Forecaster model = Forecaster::random(data.input_width, data.horizon,
                                        opts.hidden_width, opts.seed);
  std::mt19937_64 rng(derive_seed(opts.seed, kBatchStream));
  const LossWeights weights{1.0, 0.0, 0.0};
  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    run_epoch(model, data, {}, weights, opts.learning_rate, opts.batch_size,
              rng, epoch);
  }
  return model;
}

}  // namespace rtune
