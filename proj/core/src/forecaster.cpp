// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include "rtune/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace rtune {

std::size_t Forecaster::parameter_count(std::size_t input_width,
                                        std::size_t horizon,
                                        std::size_t hidden_width) {
  return input_width * hidden_width + hidden_width + hidden_width * horizon +
         horizon;
}

Forecaster::Forecaster(std::size_t input_width, std::size_t horizon,
                       std::size_t hidden_width)
    : Forecaster(input_width, horizon, hidden_width,
                 Vector(parameter_count(input_width, horizon, hidden_width),
                        0.0)) {}

Forecaster::Forecaster(std::size_t input_width, std::size_t horizon,
                       std::size_t hidden_width, Vector theta)
    : input_width_(input_width),
      horizon_(horizon),
      hidden_(hidden_width),
      theta_(std::move(theta)) {
  if (input_width_ == 0 || horizon_ == 0 || hidden_ == 0) {
    throw DomainError("forecaster dimensions must be positive");
  }
  const auto expected = parameter_count(input_width_, horizon_, hidden_);
  if (theta_.size() != expected) {
    throw ShapeError("theta has " + std::to_string(theta_.size()) +
                     " entries, architecture needs " +
                     std::to_string(expected));
  }
  if (!all_finite(theta_)) {
    throw NonFiniteError("forecaster parameters must be finite");
  }
}

Forecaster Forecaster::random(std::size_t input_width, std::size_t horizon,
                              std::size_t hidden_width, std::uint64_t seed) {
  Forecaster m(input_width, horizon, hidden_width);
  std::mt19937_64 rng(seed);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(input_width));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_width));
  std::uniform_real_distribution<double> layer1(-r1, r1);
  std::uniform_real_distribution<double> layer2(-r2, r2);
  auto& t = m.theta_;
  for (std::size_t i = 0; i < m.w2_offset(); ++i) t[i] = layer1(rng);
  for (std::size_t i = m.w2_offset(); i < t.size(); ++i) t[i] = layer2(rng);
  return m;
}

Vector Forecaster::forward(std::span<const double> x) const {
  if (x.size() != input_width_) {
    throw ShapeError("forward: input has " + std::to_string(x.size()) +
                     " samples, model expects " +
                     std::to_string(input_width_));
  }
  const double* w1 = theta_.data() + w1_offset();
  const double* b1 = theta_.data() + b1_offset();
  const double* w2 = theta_.data() + w2_offset();
  const double* b2 = theta_.data() + b2_offset();

  Vector hidden(hidden_);
  for (std::size_t j = 0; j < hidden_; ++j) {
    double acc = b1[j];
    const double* row = w1 + j * input_width_;
    for (std::size_t i = 0; i < input_width_; ++i) acc += row[i] * x[i];
    hidden[j] = std::tanh(acc);
  }
  Vector y(horizon_);
  for (std::size_t o = 0; o < horizon_; ++o) {
    double acc = b2[o];
    const double* row = w2 + o * hidden_;
    for (std::size_t j = 0; j < hidden_; ++j) acc += row[j] * hidden[j];
    y[o] = acc;
  }
  return y;
}

SoftenedDistribution soften(std::span<const double> logits, double tau) {
  if (!(tau > 0.0)) {
    throw DomainError("temperature must be positive");
  }
  if (logits.empty()) {
    throw ShapeError("soften: empty logit vector");
  }
  if (!std::all_of(logits.begin(), logits.end(),
                   [](double v) { return std::isfinite(v); })) {
    throw NonFiniteError("soften: non-finite logit");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  SoftenedDistribution out;
  out.temperature = tau;
  out.probs.resize(logits.size());
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out.probs[j] = std::exp((logits[j] - peak) / tau);
    total += out.probs[j];
  }
  for (double& p : out.probs) p /= total;
  return out;
}

std::vector<Vector> soften_jacobian(std::span<const double> logits,
                                    double tau) {
  const Vector p = soften(logits, tau).probs;
  const std::size_t c = p.size();
  std::vector<Vector> jac(c, Vector(c));
  for (std::size_t j = 0; j < c; ++j) {
    for (std::size_t m = 0; m < c; ++m) {
      const double delta = (j == m) ? 1.0 : 0.0;
      jac[j][m] = p[j] * (delta - p[m]) / tau;
    }
  }
  return jac;
}

Vector grad_total(const Forecaster& m_new, const Forecaster& teacher,
                  std::span<const Vector> inputs, std::span<const Vector> labels,
                  const LossWeights& weights) {
  if (m_new.input_width() != teacher.input_width() ||
      m_new.horizon() != teacher.horizon()) {
    throw ShapeError("grad_total: student and teacher geometry differ");
  }
  std::vector<Vector> teacher_logits;
  if (weights.lambda != 0.0) {
    teacher_logits.reserve(inputs.size());
    for (const auto& x : inputs) teacher_logits.push_back(teacher.forward(x));
  }
  return loss_and_gradient(m_new, teacher_logits, inputs, labels, weights)
      .gradient;
}

LossAndGradient loss_and_gradient(const Forecaster& m_new,
                                  std::span<const Vector> teacher_logits,
                                  std::span<const Vector> inputs,
                                  std::span<const Vector> labels,
                                  const LossWeights& weights) {
  if (inputs.empty()) {
    throw ShapeError("grad_total: empty batch");
  }
  if (inputs.size() != labels.size()) {
    throw ShapeError("grad_total: inputs and labels differ in count");
  }
  const bool distill = weights.lambda != 0.0;
  if (distill && !(weights.tau > 0.0)) {
    throw DomainError("temperature must be positive");
  }
  if (distill && teacher_logits.size() != inputs.size()) {
    throw ShapeError("grad_total: need one teacher forecast per input");
  }

  const std::size_t w = m_new.input_width();
  const std::size_t hd = m_new.hidden_width();
  const std::size_t hz = m_new.horizon();
  const Vector& theta = m_new.theta();
  const double* w1 = theta.data() + m_new.w1_offset();
  const double* b1 = theta.data() + m_new.b1_offset();
  const double* w2 = theta.data() + m_new.w2_offset();
  const double* b2 = theta.data() + m_new.b2_offset();

  LossAndGradient out;
  out.gradient.assign(theta.size(), 0.0);
  Vector& grad = out.gradient;
  double* gw1 = grad.data() + m_new.w1_offset();
  double* gb1 = grad.data() + m_new.b1_offset();
  double* gw2 = grad.data() + m_new.w2_offset();
  double* gb2 = grad.data() + m_new.b2_offset();

  const double inv_batch = 1.0 / static_cast<double>(inputs.size());
  Vector hidden(hd);
  Vector y(hz);
  Vector dy(hz);
  Vector dpre(hd);
  double task = 0.0;
  double output = 0.0;

  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const Vector& x = inputs[s];
    const Vector& label = labels[s];
    if (x.size() != w || label.size() != hz) {
      throw ShapeError("grad_total: sample " + std::to_string(s) +
                       " does not match model geometry");
    }

    for (std::size_t j = 0; j < hd; ++j) {
      double acc = b1[j];
      const double* row = w1 + j * w;
      for (std::size_t i = 0; i < w; ++i) acc += row[i] * x[i];
      hidden[j] = std::tanh(acc);
    }
    for (std::size_t o = 0; o < hz; ++o) {
      double acc = b2[o];
      const double* row = w2 + o * hd;
      for (std::size_t j = 0; j < hd; ++j) acc += row[j] * hidden[j];
      y[o] = acc;
    }

    // d/dy of ||y - label||^2 averaged over the batch.
    for (std::size_t o = 0; o < hz; ++o) {
      const double r = y[o] - label[o];
      task += r * r;
      dy[o] = 2.0 * r * inv_batch;
    }
    // d/dy of -sum p_old log p_new is (p_new - p_old) / tau.
    if (distill) {
      const Vector p_old = soften(teacher_logits[s], weights.tau).probs;
      const Vector p_new = soften(y, weights.tau).probs;
      const double scale = weights.lambda * inv_batch / weights.tau;
      for (std::size_t o = 0; o < hz; ++o) {
        output -= p_old[o] * std::log(p_new[o]);
        dy[o] += scale * (p_new[o] - p_old[o]);
      }
    }

    std::fill(dpre.begin(), dpre.end(), 0.0);
    for (std::size_t o = 0; o < hz; ++o) {
      gb2[o] += dy[o];
      double* grow = gw2 + o * hd;
      const double* row = w2 + o * hd;
      for (std::size_t j = 0; j < hd; ++j) {
        grow[j] += dy[o] * hidden[j];
        dpre[j] += dy[o] * row[j];
      }
    }
    for (std::size_t j = 0; j < hd; ++j) {
      const double d = dpre[j] * (1.0 - hidden[j] * hidden[j]);
      gb1[j] += d;
      double* grow = gw1 + j * w;
      for (std::size_t i = 0; i < w; ++i) grow[i] += d * x[i];
    }
  }

  double norm_sq = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    norm_sq += theta[i] * theta[i];
    if (weights.beta != 0.0) grad[i] += 2.0 * weights.beta * theta[i];
  }
  out.loss = task * inv_batch + weights.lambda * output * inv_batch +
             weights.beta * norm_sq;
  if (!std::isfinite(out.loss) || !all_finite(grad)) {
    throw NonFiniteError("grad_total: non-finite loss or gradient");
  }
  return out;
}

}  // namespace rtune
