// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtune/data.hpp"
#include "rtune/forecaster.hpp"

namespace rtune {

struct MetricPair {
  double mae = 0.0;
  double mse = 0.0;
  std::size_t n_samples = 0;
};

// Mean over every sample and horizon step of |pred - label| / (pred - label)^2.
double mae(std::span<const Vector> preds, std::span<const Vector> labels);
double mse(std::span<const Vector> preds, std::span<const Vector> labels);
MetricPair metrics(std::span<const Vector> preds,
                   std::span<const Vector> labels);

std::vector<Vector> predict(const Forecaster& model,
                            const WindowedDataset& data);
MetricPair evaluate_dataset(const Forecaster& model,
                            const WindowedDataset& data);

/// Old-task metrics are the unweighted mean over `old_tests`; new-task
/// metrics come from `new_test`.
std::pair<MetricPair, MetricPair> evaluate_model(
    const Forecaster& model, std::span<const WindowedDataset> old_tests,
    const WindowedDataset& new_test);

/// (raw - method) / raw * 100, rounded to three decimals. Positive means the
/// method lowered the error.
double relative_change(double raw, double method);

struct ComparisonRow {
  std::string method;
  MetricPair old_task;
  MetricPair new_task;
  double old_mae_change = 0.0;
  double old_mse_change = 0.0;
  double new_mae_change = 0.0;
  double new_mse_change = 0.0;
};

ComparisonRow make_comparison_row(std::string method, const MetricPair& raw_old,
                                  const MetricPair& raw_new,
                                  const MetricPair& old_task,
                                  const MetricPair& new_task);

/// Mean and sample standard deviation (0 for a single value).
struct SeedSummary {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};
SeedSummary summarize(std::span<const double> values);

void to_json(nlohmann::json& j, const MetricPair& m);
void from_json(const nlohmann::json& j, MetricPair& m);
void to_json(nlohmann::json& j, const ComparisonRow& row);

}  // namespace rtune
