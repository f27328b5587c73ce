// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "rtune/types.hpp"

namespace rtune {

/// One-hidden-layer perceptron mapping a W-sample input window to an
/// H-sample forecast: y = W2 tanh(W1 x + b1) + b2.
///
/// Parameters live in one flat vector laid out as
/// [W1 (hidden x W, row-major) | b1 (hidden) | W2 (H x hidden, row-major) | b2 (H)].
class Forecaster {
 public:
  static constexpr std::size_t kDefaultHidden = 32;

  /// All-zero parameters.
  Forecaster(std::size_t input_width, std::size_t horizon,
             std::size_t hidden_width = kDefaultHidden);
  Forecaster(std::size_t input_width, std::size_t horizon,
             std::size_t hidden_width, Vector theta);

  /// Seeded uniform initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per
  /// layer (biases use their layer's fan-in).
  static Forecaster random(std::size_t input_width, std::size_t horizon,
                           std::size_t hidden_width, std::uint64_t seed);

  static std::size_t parameter_count(std::size_t input_width,
                                     std::size_t horizon,
                                     std::size_t hidden_width);

  std::size_t input_width() const { return input_width_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t hidden_width() const { return hidden_; }

  const Vector& theta() const { return theta_; }
  Vector& mutable_theta() { return theta_; }

  Vector forward(std::span<const double> x) const;

  // Offsets into theta.
  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return hidden_ * input_width_; }
  std::size_t w2_offset() const { return b1_offset() + hidden_; }
  std::size_t b2_offset() const { return w2_offset() + horizon_ * hidden_; }

  friend bool operator==(const Forecaster&, const Forecaster&) = default;

 private:
  std::size_t input_width_;
  std::size_t horizon_;
  std::size_t hidden_;
  Vector theta_;
};

/// Free-function spelling of Forecaster::forward.
inline Vector forward(const Forecaster& m, std::span<const double> x) {
  return m.forward(x);
}

/// Temperature-softened probabilities. Entries are positive and sum to 1.
struct SoftenedDistribution {
  Vector probs;
  double temperature = 1.0;
};

/// probs[j] = exp(z_j / tau) / sum_k exp(z_k / tau), evaluated after
/// subtracting max(z) so large logits do not overflow.
SoftenedDistribution soften(std::span<const double> logits, double tau);

/// Row-major C x C matrix J with J(j, m) = (1/tau) p[j] (delta_jm - p[m]).
std::vector<Vector> soften_jacobian(std::span<const double> logits,
                                    double tau);

/// Weights of the composite objective
///   L = L_task + lambda * L_distill + beta * ||theta||^2.
struct LossWeights {
  double tau = 3.0;
  double lambda = 0.2;
  double beta = 1e-4;
};

/// Analytic gradient of the composite objective over a batch with respect to
/// m_new's parameters. `teacher` is held constant. The task and distillation
/// terms are averaged over the batch; forecasts act as distillation logits.
Vector grad_total(const Forecaster& m_new, const Forecaster& teacher,
                  std::span<const Vector> inputs, std::span<const Vector> labels,
                  const LossWeights& weights);

struct LossAndGradient {
  double loss = 0.0;
  Vector gradient;
};

/// Same objective with the teacher's forecasts precomputed (one per input);
/// `teacher_logits` may be empty when weights.lambda == 0. Also returns the
/// objective value at the current parameters.
LossAndGradient loss_and_gradient(const Forecaster& m_new,
                                  std::span<const Vector> teacher_logits,
                                  std::span<const Vector> inputs,
                                  std::span<const Vector> labels,
                                  const LossWeights& weights);

// Checkpoints ---------------------------------------------------------------
//
// Binary layout, all integers and doubles little-endian:
//   bytes 0..7   magic "RTUNECKP"
//   u32          format version (1)
//   u32          input width W
//   u32          horizon H
//   u32          hidden width
//   u64          parameter count P
//   P x f64      theta (IEEE-754 binary64)
// Save/load round trips are bit-exact.

void save_checkpoint(const Forecaster& m, std::ostream& out);
void save_checkpoint(const Forecaster& m, const std::filesystem::path& path);
Forecaster load_checkpoint(std::istream& in);
Forecaster load_checkpoint(const std::filesystem::path& path);

}  // namespace rtune
