// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include "rtune/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rtune {

bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

FilterBank build_db4_bank() {
  const double r3 = std::sqrt(3.0);
  const double denom = 4.0 * std::sqrt(2.0);

  FilterBank bank;
  bank.g = {(1.0 + r3) / denom, (3.0 + r3) / denom, (3.0 - r3) / denom,
            (1.0 - r3) / denom};
  for (std::size_t k = 0; k < FilterBank::kTaps; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    bank.h[k] = sign * bank.g[FilterBank::kTaps - 1 - k];
    bank.g_tilde[k] = bank.g[k];
    bank.h_tilde[k] = sign * bank.g[k];
  }
  return bank;
}

WaveletDecomposition::WaveletDecomposition(Vector approx,
                                           std::vector<Vector> details,
                                           FilterBank bank)
    : approx_(std::move(approx)),
      details_(std::move(details)),
      bank_(bank) {
  if (details_.empty()) {
    throw DomainError("wavelet decomposition needs at least one level");
  }
  for (const auto& d : details_) {
    if (d.size() != approx_.size()) {
      throw ShapeError("detail length " + std::to_string(d.size()) +
                       " differs from approximation length " +
                       std::to_string(approx_.size()));
    }
  }
}

const Vector& WaveletDecomposition::detail(std::size_t level) const {
  if (level == 0 || level > details_.size()) {
    throw DomainError("detail level " + std::to_string(level) +
                      " out of range");
  }
  return details_[level - 1];
}

std::size_t min_signal_length(std::size_t levels) {
  return levels == 0 ? 0 : std::size_t{4} << (levels - 1);
}

namespace {

// Wraps a possibly negative offset into [0, n).
inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  i %= m;
  return static_cast<std::size_t>(i < 0 ? i + m : i);
}

// y[n] = sum_k taps[k] x[n - stride k], circular.
void dilated_convolve(std::span<const double> x, const FilterBank::Taps& taps,
                      std::size_t stride, Vector& y) {
  const std::size_t n_len = x.size();
  y.assign(n_len, 0.0);
  for (std::size_t n = 0; n < n_len; ++n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
      const auto lag = static_cast<std::ptrdiff_t>(n) -
                       static_cast<std::ptrdiff_t>(stride * k);
      acc += taps[k] * x[wrap(lag, n_len)];
    }
    y[n] = acc;
  }
}

}  // namespace

WaveletDecomposition rwt_decompose(std::span<const double> x,
                                   std::size_t levels,
                                   const FilterBank& bank) {
  if (levels == 0) {
    throw DomainError("decomposition depth must be at least 1");
  }
  if (x.size() < min_signal_length(levels)) {
    throw DomainError("signal of length " + std::to_string(x.size()) +
                      " is too short for " + std::to_string(levels) +
                      " levels (needs " +
                      std::to_string(min_signal_length(levels)) + ")");
  }
  if (!std::all_of(x.begin(), x.end(),
                   [](double v) { return std::isfinite(v); })) {
    throw NonFiniteError("non-finite value in wavelet input");
  }

  Vector approx(x.begin(), x.end());
  std::vector<Vector> details(levels);
  Vector next;
  for (std::size_t level = 1; level <= levels; ++level) {
    const std::size_t stride = std::size_t{1} << (level - 1);
    dilated_convolve(approx, bank.h, stride, details[level - 1]);
    dilated_convolve(approx, bank.g, stride, next);
    approx.swap(next);
  }
  return WaveletDecomposition(std::move(approx), std::move(details), bank);
}

Vector rwt_reconstruct(const WaveletDecomposition& d, double alpha,
                       std::size_t keep_levels) {
  const Vector alphas(d.levels(), alpha);
  return rwt_reconstruct(d, alphas, keep_levels);
}

Vector rwt_reconstruct(const WaveletDecomposition& d,
                       std::span<const double> alphas,
                       std::size_t keep_levels) {
  if (keep_levels > d.levels()) {
    throw ShapeError("keep_levels " + std::to_string(keep_levels) +
                     " exceeds stored depth " + std::to_string(d.levels()));
  }
  if (alphas.size() != d.levels()) {
    throw ShapeError("expected one alpha per level");
  }
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw DomainError("alpha must lie in [0, 1]");
    }
  }

  const FilterBank& bank = d.filter_bank();
  const std::size_t n_len = d.length();
  constexpr auto last = static_cast<std::ptrdiff_t>(FilterBank::kTaps - 1);

  Vector approx = d.approx();
  Vector prev(n_len);
  for (std::size_t level = d.levels(); level >= 1; --level) {
    const bool keep = level <= keep_levels;
    const Vector& detail = d.detail(level);
    const double alpha = alphas[level - 1];
    const auto stride = static_cast<std::ptrdiff_t>(std::size_t{1}
                                                    << (level - 1));
    for (std::size_t n = 0; n < n_len; ++n) {
      const auto base = static_cast<std::ptrdiff_t>(n);
      double low = 0.0;
      double high = 0.0;
      for (std::size_t k = 0; k < FilterBank::kTaps; ++k) {
        const auto kk = static_cast<std::ptrdiff_t>(k);
        low += bank.g_tilde[k] * approx[wrap(base + stride * kk, n_len)];
        if (keep) {
          high += bank.h_tilde[k] *
                  detail[wrap(base + stride * (last - kk), n_len)];
        }
      }
      prev[n] = 0.5 * (low - alpha * high);
    }
    approx.swap(prev);
  }
  return approx;
}

}  // namespace rtune
