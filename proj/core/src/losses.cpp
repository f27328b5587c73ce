// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rtune/tuner.hpp"

namespace rtune {

double distill_loss(std::span<const double> y_old, std::span<const double> y_new,
                    double tau) {
  if (y_old.size() != y_new.size()) {
    throw ShapeError("distill_loss: logit vectors differ in length");
  }
  const auto p_old = soften(y_old, tau).probs;
  // log p_new[j] = (z_j - max)/tau - log sum exp((z - max)/tau)
  const double peak = *std::max_element(y_new.begin(), y_new.end());
  double z = 0.0;
  for (double v : y_new) z += std::exp((v - peak) / tau);
  const double log_z = std::log(z);
  double loss = 0.0;
  for (std::size_t j = 0; j < y_new.size(); ++j) {
    loss -= p_old[j] * ((y_new[j] - peak) / tau - log_z);
  }
  return loss;
}

double task_loss(std::span<const Vector> predictions,
                 std::span<const Vector> labels) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("task_loss: prediction and label counts differ");
  }
  if (predictions.empty()) throw ShapeError("task_loss: empty batch");
  double acc = 0.0;
  for (std::size_t s = 0; s < predictions.size(); ++s) {
    if (predictions[s].size() != labels[s].size()) {
      throw ShapeError("task_loss: horizon mismatch");
    }
    for (std::size_t i = 0; i < labels[s].size(); ++i) {
      const double r = predictions[s][i] - labels[s][i];
      acc += r * r;
    }
  }
  return acc / static_cast<double>(predictions.size());
}

double total_loss(double task, double output, double theta_norm_sq,
                  double lambda, double beta) {
  return task + lambda * output + beta * theta_norm_sq;
}

double evaluate_total_loss(const Forecaster& m_new, const Forecaster& teacher,
                           std::span<const Vector> inputs,
                           std::span<const Vector> labels,
                           const LossWeights& weights) {
  if (inputs.size() != labels.size() || inputs.empty()) {
    throw ShapeError("evaluate_total_loss: bad batch");
  }
  std::vector<Vector> preds;
  preds.reserve(inputs.size());
  double output = 0.0;
  for (const auto& x : inputs) {
    preds.push_back(m_new.forward(x));
    if (weights.lambda != 0.0) {
      output += distill_loss(teacher.forward(x), preds.back(), weights.tau);
    }
  }
  output /= static_cast<double>(inputs.size());
  const auto& theta = m_new.theta();
  const double norm_sq =
      std::inner_product(theta.begin(), theta.end(), theta.begin(), 0.0);
  return total_loss(task_loss(preds, labels), output, norm_sq, weights.lambda,
                    weights.beta);
}

}  // namespace rtune
