// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rtune/data.hpp"
#include "rtune/forecaster.hpp"
#include "rtune/wavelet.hpp"

namespace rtune {

/// n standard-normal d-vectors drawn from a generator seeded with `seed`.
struct LatentBatch {
  std::vector<Vector> vectors;
  std::uint64_t seed = 0;
};

LatentBatch sample_latents(std::size_t n, std::size_t d, std::uint64_t seed);

/// discarded == 0 marks the full-spectrum sample; otherwise the sample is the
/// variant reconstructed with `discarded` detail levels zeroed.
struct VariantTag {
  std::size_t discarded = 0;

  bool full_spectrum() const { return discarded == 0; }
  /// "full" or "filtered(j)".
  std::string label() const;

  friend bool operator==(const VariantTag&, const VariantTag&) = default;
};

/// A synthetic sequence of length W + H with its pseudo-label, the frozen
/// model's forecast on the first W samples.
struct SyntheticSample {
  Vector sequence;
  VariantTag tag;
  Vector pseudo_label;
  std::size_t input_width = 0;

  std::span<const double> input_window() const {
    return std::span<const double>(sequence).first(input_width);
  }
};

/// Closed-loop forecasts run on a smoothed latent before it becomes a
/// replay context.
inline constexpr std::size_t kDefaultRollout = 10;

struct ReplayConfig {
  std::size_t count = 2000;        // N
  std::size_t levels = 1;          // wavelet depth
  std::size_t discard_depth = 1;   // k
  double alpha = 0.7;
  std::uint64_t seed = 0;
  std::size_t rollout_steps = kDefaultRollout;
};

/// N full-spectrum samples followed by their k filtered variants each.
struct ReplaySet {
  std::vector<SyntheticSample> samples;
  ReplayConfig provenance;
};

/// Five-tap circular moving average; turns a white latent into a context
/// window.
Vector smooth_latent(std::span<const double> z);

/// Turns a latent into a synthetic sample of length W + H.
///
/// The context starts as smooth_latent(z). With rollout_steps > 0 the frozen
/// model is run closed-loop that many times (each forecast appended to the
/// buffer and the next one made from its last W samples) and the context
/// becomes the last W samples of the buffer. The sequence is that context
/// followed by frozen.forward(context), which is also the pseudo-label.
/// rollout_steps = 0 uses the smoothed latent directly.
///
/// The latent dimension must equal the model's input width.
SyntheticSample generate_sequence(const Forecaster& frozen,
                                  std::span<const double> z,
                                  std::size_t rollout_steps = kDefaultRollout);

/// Variants j = 1..k, each reconstructing the whole sequence with
/// keep_levels = levels - j and the given alpha, then relabelled by the
/// frozen model on the variant's input window.
std::vector<SyntheticSample> expand_variants(const SyntheticSample& s,
                                             const Forecaster& frozen,
                                             std::size_t levels, std::size_t k,
                                             double alpha,
                                             const FilterBank& bank);

/// Latents -> sequences -> variants for the whole replay budget.
ReplaySet build_replay_set(const Forecaster& frozen, const ReplayConfig& cfg);

/// Replay count N such that N (1 + k) = round(ratio_percent/100 * new_size),
/// rounded to the nearest integer.
std::size_t replay_count_for_ratio(double ratio_percent, std::size_t new_size,
                                   std::size_t k);

/// Union of new windows (ground-truth labels, Origin::kNew) and replay samples
/// (pseudo-labels, Origin::kReplay), in a seeded random order.
WindowedDataset build_train_set(const WindowedDataset& new_data,
                                const ReplaySet& replay, std::uint64_t seed);

/// CSV with header `tag,x0..x{T-1},y0..y{H-1}`; one row per sample.
void write_replay_csv(const ReplaySet& replay, std::ostream& out);

}  // namespace rtune
