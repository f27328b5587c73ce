// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rtune/types.hpp"

namespace rtune {

/// The 4-tap Daubechies filter bank.
///
/// `g`/`h` are the analysis low/high-pass taps, `g_tilde`/`h_tilde` the
/// synthesis taps, with h[k] = (-1)^k g[3-k], g_tilde = g and
/// h_tilde[k] = (-1)^k g[k].
struct FilterBank {
  static constexpr std::size_t kTaps = 4;
  using Taps = std::array<double, kTaps>;

  Taps g{};
  Taps h{};
  Taps g_tilde{};
  Taps h_tilde{};
};

/// Builds the bank from the closed forms (1±√3)/(4√2), (3±√3)/(4√2).
FilterBank build_db4_bank();

/// Redundant (undecimated, à-trous) pyramid of a signal.
///
/// Every coefficient sequence has the length of the input signal.
/// `details[l - 1]` holds D^l; `approx` holds A^L for L = levels().
class WaveletDecomposition {
 public:
  WaveletDecomposition(Vector approx, std::vector<Vector> details,
                       FilterBank bank);

  std::size_t levels() const { return details_.size(); }
  std::size_t length() const { return approx_.size(); }
  const Vector& approx() const { return approx_; }
  const std::vector<Vector>& details() const { return details_; }
  const Vector& detail(std::size_t level) const;  // 1-based level
  const FilterBank& filter_bank() const { return bank_; }

 private:
  Vector approx_;
  std::vector<Vector> details_;
  FilterBank bank_;
};

/// Minimum signal length accepted for a decomposition of the given depth:
/// 4 * 2^(levels-1).
std::size_t min_signal_length(std::size_t levels);

/// Forward transform. Level l convolves A^{l-1} circularly with the base
/// taps dilated by 2^(l-1):
///   D^l[n] = sum_k h[k] A^{l-1}[n - 2^(l-1) k]
///   A^l[n] = sum_k g[k] A^{l-1}[n - 2^(l-1) k]
WaveletDecomposition rwt_decompose(std::span<const double> x,
                                   std::size_t levels,
                                   const FilterBank& bank);

/// Inverse transform with detail scaling.
///
/// Runs l = L..1, keeping D^l when l <= keep_levels and substituting zeros
/// otherwise. Each step is half the adjoint of the analysis step:
///   A^{l-1}[n] = 1/2 ( sum_k g~[k] A^l[n + s k]
///                      - alpha sum_k h~[k] D~^l[n + s (3 - k)] ),  s = 2^(l-1)
/// which, since h[k] = -h~[3-k], is 1/2 (G^T A + alpha H^T D). With alpha = 1
/// and every level kept this inverts rwt_decompose exactly (up to rounding).
Vector rwt_reconstruct(const WaveletDecomposition& d, double alpha,
                       std::size_t keep_levels);

/// Level-dependent variant: `alphas[l - 1]` scales the detail branch of
/// level l. Must hold exactly d.levels() entries.
Vector rwt_reconstruct(const WaveletDecomposition& d,
                       std::span<const double> alphas,
                       std::size_t keep_levels);

}  // namespace rtune
