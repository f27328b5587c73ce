// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include "rtune/replay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace rtune {

std::string VariantTag::label() const {
  return full_spectrum() ? "full"
                         : "filtered(" + std::to_string(discarded) + ")";
}

LatentBatch sample_latents(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) {
    throw DomainError("latent batch needs n >= 1 and d >= 1");
  }
  LatentBatch batch;
  batch.seed = seed;
  batch.vectors.assign(n, Vector(d));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : batch.vectors) {
    for (auto& x : v) x = normal(rng);
  }
  return batch;
}

Vector smooth_latent(std::span<const double> z) {
  constexpr std::ptrdiff_t kHalf = 2;
  const auto n = static_cast<std::ptrdiff_t>(z.size());
  Vector out(z.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t o = -kHalf; o <= kHalf; ++o) {
      acc += z[static_cast<std::size_t>(((i + o) % n + n) % n)];
    }
    out[static_cast<std::size_t>(i)] = acc / (2 * kHalf + 1);
  }
  return out;
}

SyntheticSample generate_sequence(const Forecaster& frozen,
                                  std::span<const double> z,
                                  std::size_t rollout_steps) {
  if (z.size() != frozen.input_width()) {
    throw ShapeError("latent dimension " + std::to_string(z.size()) +
                     " differs from model input width " +
                     std::to_string(frozen.input_width()));
  }
  SyntheticSample s;
  s.input_width = frozen.input_width();
  s.sequence = smooth_latent(z);
  if (rollout_steps > 0) {
    const std::size_t w = frozen.input_width();
    for (std::size_t r = 0; r < rollout_steps; ++r) {
      const auto f =
          frozen.forward(std::span<const double>(s.sequence).last(w));
      s.sequence.insert(s.sequence.end(), f.begin(), f.end());
    }
    s.sequence.erase(s.sequence.begin(),
                     s.sequence.end() - static_cast<std::ptrdiff_t>(w));
  }
  s.pseudo_label = frozen.forward(s.sequence);
  s.sequence.insert(s.sequence.end(), s.pseudo_label.begin(),
                    s.pseudo_label.end());
  return s;
}

std::vector<SyntheticSample> expand_variants(const SyntheticSample& s,
                                             const Forecaster& frozen,
                                             std::size_t levels, std::size_t k,
                                             double alpha,
                                             const FilterBank& bank) {
  if (k > levels) {
    throw DomainError("discard depth " + std::to_string(k) +
                      " exceeds wavelet depth " + std::to_string(levels));
  }
  std::vector<SyntheticSample> variants;
  if (k == 0) return variants;

  const auto decomposition = rwt_decompose(s.sequence, levels, bank);
  variants.reserve(k);
  for (std::size_t j = 1; j <= k; ++j) {
    SyntheticSample v;
    v.input_width = s.input_width;
    v.tag.discarded = j;
    v.sequence = rwt_reconstruct(decomposition, alpha, levels - j);
    v.pseudo_label = frozen.forward(v.input_window());
    variants.push_back(std::move(v));
  }
  return variants;
}

ReplaySet build_replay_set(const Forecaster& frozen, const ReplayConfig& cfg) {
  ReplaySet replay;
  replay.provenance = cfg;
  if (cfg.count == 0) return replay;
  if (cfg.discard_depth > cfg.levels) {
    throw DomainError("discard depth exceeds wavelet depth");
  }

  const auto bank = build_db4_bank();
  const auto latents =
      sample_latents(cfg.count, frozen.input_width(), cfg.seed);
  replay.samples.reserve(cfg.count * (1 + cfg.discard_depth));
  std::vector<SyntheticSample> variants;
  for (const auto& z : latents.vectors) {
    replay.samples.push_back(generate_sequence(frozen, z, cfg.rollout_steps));
    auto expanded = expand_variants(replay.samples.back(), frozen, cfg.levels,
                                    cfg.discard_depth, cfg.alpha, bank);
    std::move(expanded.begin(), expanded.end(), std::back_inserter(variants));
  }
  std::move(variants.begin(), variants.end(),
            std::back_inserter(replay.samples));
  return replay;
}

std::size_t replay_count_for_ratio(double ratio_percent, std::size_t new_size,
                                   std::size_t k) {
  if (!(ratio_percent >= 0.0 && ratio_percent <= 100.0)) {
    throw DomainError("replay ratio must lie in [0, 100] percent");
  }
  const double total =
      std::round(ratio_percent / 100.0 * static_cast<double>(new_size));
  return static_cast<std::size_t>(
      std::llround(total / static_cast<double>(1 + k)));
}

WindowedDataset build_train_set(const WindowedDataset& new_data,
                                const ReplaySet& replay, std::uint64_t seed) {
  WindowedDataset merged = new_data;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    merged.origins[i] = Origin::kNew;
  }
  for (const auto& s : replay.samples) {
    if (s.input_width != new_data.input_width ||
        s.pseudo_label.size() != new_data.horizon) {
      throw ShapeError("replay sample geometry differs from the new data");
    }
    const auto in = s.input_window();
    merged.push_back(Vector(in.begin(), in.end()), s.pseudo_label,
                     Origin::kReplay, 0);
  }
  std::vector<std::size_t> rows(merged.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  return merged.subset(rows);
}

void write_replay_csv(const ReplaySet& replay, std::ostream& out) {
  const std::size_t t =
      replay.samples.empty() ? 0 : replay.samples.front().sequence.size();
  const std::size_t h =
      replay.samples.empty() ? 0 : replay.samples.front().pseudo_label.size();
  out << "tag";
  for (std::size_t i = 0; i < t; ++i) out << ",x" << i;
  for (std::size_t i = 0; i < h; ++i) out << ",y" << i;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& s : replay.samples) {
    out << s.tag.label();
    for (double v : s.sequence) out << ',' << v;
    for (double v : s.pseudo_label) out << ',' << v;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace rtune
