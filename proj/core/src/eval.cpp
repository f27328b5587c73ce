// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include "rtune/eval.hpp"

#include <cmath>
#include <numeric>

namespace rtune {
namespace {

template <typename F>
double mean_residual(std::span<const Vector> preds,
                     std::span<const Vector> labels, F&& f) {
  if (preds.empty()) throw ShapeError("metric over an empty set");
  if (preds.size() != labels.size()) {
    throw ShapeError("prediction and label counts differ");
  }
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t s = 0; s < preds.size(); ++s) {
    if (preds[s].size() != labels[s].size()) {
      throw ShapeError("prediction and label horizons differ");
    }
    for (std::size_t i = 0; i < preds[s].size(); ++i) {
      acc += f(preds[s][i] - labels[s][i]);
    }
    n += preds[s].size();
  }
  if (n == 0) throw ShapeError("metric over zero-length horizons");
  return acc / static_cast<double>(n);
}

}  // namespace

double mae(std::span<const Vector> preds, std::span<const Vector> labels) {
  return mean_residual(preds, labels, [](double r) { return std::abs(r); });
}

double mse(std::span<const Vector> preds, std::span<const Vector> labels) {
  return mean_residual(preds, labels, [](double r) { return r * r; });
}

MetricPair metrics(std::span<const Vector> preds,
                   std::span<const Vector> labels) {
  return MetricPair{mae(preds, labels), mse(preds, labels), preds.size()};
}

std::vector<Vector> predict(const Forecaster& model,
                            const WindowedDataset& data) {
  if (data.input_width != model.input_width() ||
      data.horizon != model.horizon()) {
    throw ShapeError("dataset geometry differs from the model");
  }
  std::vector<Vector> out;
  out.reserve(data.size());
  for (const auto& x : data.inputs) out.push_back(model.forward(x));
  return out;
}

MetricPair evaluate_dataset(const Forecaster& model,
                            const WindowedDataset& data) {
  return metrics(predict(model, data), data.labels);
}

std::pair<MetricPair, MetricPair> evaluate_model(
    const Forecaster& model, std::span<const WindowedDataset> old_tests,
    const WindowedDataset& new_test) {
  if (old_tests.empty()) throw ShapeError("no old-task test sets given");
  MetricPair old_avg;
  for (const auto& d : old_tests) {
    const auto m = evaluate_dataset(model, d);
    old_avg.mae += m.mae;
    old_avg.mse += m.mse;
    old_avg.n_samples += m.n_samples;
  }
  old_avg.mae /= static_cast<double>(old_tests.size());
  old_avg.mse /= static_cast<double>(old_tests.size());
  return {old_avg, evaluate_dataset(model, new_test)};
}

double relative_change(double raw, double method) {
  if (!(raw > 0.0)) throw DomainError("relative change needs raw > 0");
  // Adding 0.0 turns a rounded -0 into +0.
  return std::round((raw - method) / raw * 100.0 * 1000.0) / 1000.0 + 0.0;
}

ComparisonRow make_comparison_row(std::string method, const MetricPair& raw_old,
                                  const MetricPair& raw_new,
                                  const MetricPair& old_task,
                                  const MetricPair& new_task) {
  ComparisonRow row;
  row.method = std::move(method);
  row.old_task = old_task;
  row.new_task = new_task;
  row.old_mae_change = relative_change(raw_old.mae, old_task.mae);
  row.old_mse_change = relative_change(raw_old.mse, old_task.mse);
  row.new_mae_change = relative_change(raw_new.mae, new_task.mae);
  row.new_mse_change = relative_change(raw_new.mse, new_task.mse);
  return row;
}

SeedSummary summarize(std::span<const double> values) {
  SeedSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

void to_json(nlohmann::json& j, const MetricPair& m) {
  j = nlohmann::json{{"mae", m.mae}, {"mse", m.mse}, {"n_samples", m.n_samples}};
}

void from_json(const nlohmann::json& j, MetricPair& m) {
  j.at("mae").get_to(m.mae);
  j.at("mse").get_to(m.mse);
  j.at("n_samples").get_to(m.n_samples);
}

void to_json(nlohmann::json& j, const ComparisonRow& row) {
  j = nlohmann::json{{"method", row.method},
                     {"old", row.old_task},
                     {"new", row.new_task},
                     {"old_mae_change_pct", row.old_mae_change},
                     {"old_mse_change_pct", row.old_mse_change},
                     {"new_mae_change_pct", row.new_mae_change},
                     {"new_mse_change_pct", row.new_mse_change}};
}

}  // namespace rtune
