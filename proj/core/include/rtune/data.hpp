// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rtune/types.hpp"

namespace rtune {

/// A univariate series. Multivariate CSVs load as one RawSeries per column.
struct RawSeries {
  std::string name;
  std::string frequency_label;
  std::size_t variable_count = 1;
  Vector values;
};

/// Mean/standard deviation of a training portion. Only zscore_fit can create
/// one, so normalization parameters always come from fitted training data.
class NormalizationParams {
 public:
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }

 private:
  NormalizationParams(double mu, double sigma) : mu_(mu), sigma_(sigma) {}
  friend NormalizationParams zscore_fit(std::span<const double> train);

  double mu_;
  double sigma_;
};

/// Population mean and standard deviation. Throws DomainError for fewer than
/// two values or zero variance.
NormalizationParams zscore_fit(std::span<const double> train);
Vector zscore_apply(std::span<const double> x, const NormalizationParams& p);
Vector zscore_invert(std::span<const double> x, const NormalizationParams& p);

enum class Origin : std::uint8_t { kNew, kReplay };

/// Supervised (input window, label window) pairs of fixed geometry.
///
/// `starts[i]` is the series index where window i's input begins (0 for
/// synthetic samples); it orders windows chronologically.
struct WindowedDataset {
  std::size_t input_width = 0;
  std::size_t horizon = 0;
  std::vector<Vector> inputs;
  std::vector<Vector> labels;
  std::vector<Origin> origins;
  std::vector<std::size_t> starts;

  WindowedDataset() = default;
  WindowedDataset(std::size_t w, std::size_t h) : input_width(w), horizon(h) {}

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }

  void push_back(Vector input, Vector label, Origin origin = Origin::kNew,
                 std::size_t start = 0);

  /// Rows in the given order.
  WindowedDataset subset(std::span<const std::size_t> rows) const;
  std::size_t count(Origin origin) const;
};

/// Window i takes input series[i*stride, i*stride + W) and label
/// series[i*stride + W, i*stride + W + H).
WindowedDataset make_windows(std::span<const double> series, std::size_t w,
                             std::size_t h, std::size_t stride = 1);

/// Seeded shuffle of windows, first round(fraction * n) become train. Both
/// sides are non-empty or DomainError is thrown.
std::pair<WindowedDataset, WindowedDataset> split_train_test(
    const WindowedDataset& windows, double train_fraction, std::uint64_t seed);

/// Seeded uniform subsample without replacement of round(fraction * n)
/// windows.
WindowedDataset few_shot_subsample(const WindowedDataset& train,
                                   double fraction, std::uint64_t seed);

/// Series values at every index touched by some window of `windows`
/// (inputs or labels), in series order. Used to fit normalization on exactly
/// the training portion.
Vector covered_values(std::span<const double> series,
                      const WindowedDataset& windows);

/// Applies z-scoring to every input and label.
WindowedDataset normalize(const WindowedDataset& windows,
                          const NormalizationParams& params);

/// Normalized train/test windows of one task.
struct TaskData {
  WindowedDataset train;
  WindowedDataset test;
  NormalizationParams params;
};

/// Windows the series, splits 80/20 (or as given), fits z-score on the
/// training windows' values and normalizes both sides.
TaskData prepare_task(std::span<const double> series, std::size_t w,
                      std::size_t h, std::size_t stride, double train_fraction,
                      std::uint64_t seed);

// Synthetic benchmark ---------------------------------------------------------

struct BenchmarkSpec {
  std::size_t old_length = 4000;
  std::size_t new_length = 20000;
  double noise_sigma = 0.1;
};

struct BenchmarkTasks {
  RawSeries old_task;
  RawSeries new_task;
  /// Generator parameters (periods, amplitudes, phases, slope, noise).
  std::vector<std::pair<std::string, double>> parameters;
};

/// Old task: two sinusoids + linear trend + Gaussian noise. New task: a
/// sinusoid at a period the old task does not use plus a square wave, plus
/// noise. Fully determined by (seed, spec).
BenchmarkTasks gen_benchmark_tasks(std::uint64_t seed,
                                   const BenchmarkSpec& spec = {});

// CSV ---------------------------------------------------------------------------

/// Parses a CSV with a header row. A first column named date/time/timestamp,
/// or whose first data cell is not numeric, is treated as a timestamp and
/// skipped. Every other column becomes one RawSeries. Malformed rows throw
/// FormatError naming the line.
std::vector<RawSeries> parse_csv(std::istream& in, const std::string& source);
std::vector<RawSeries> load_csv(const std::filesystem::path& path);

}  // namespace rtune
