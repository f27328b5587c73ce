// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rtune/data.hpp"
#include "rtune/forecaster.hpp"
#include "rtune/tuner.hpp"

namespace rtune {

/// Two-task forgetting benchmark: pretrain a forecaster on the synthetic old
/// task, then adapt it with a few-shot slice of the new task.
struct BenchmarkSetup {
  std::size_t input_width = 48;
  std::size_t horizon = 12;
  std::size_t stride = 1;
  BenchmarkSpec series;
  PretrainOptions pretrain;
  double train_fraction = 0.8;
  double few_shot_fraction = 0.1;
};

struct PreparedBenchmark {
  Forecaster frozen;
  WindowedDataset new_train;  // few-shot, normalized
  EvalSets eval;              // old-task test set, new-task test set
  std::vector<std::pair<std::string, double>> parameters;
};

/// Tuning configuration used on the benchmark: library defaults except a
/// learning rate of 0.05, so ten epochs of plain descent reach the few-shot
/// optimum at this geometry.
TuneConfig benchmark_tune_config(std::uint64_t seed);

/// Deterministic in (seed, setup). The frozen model's seed, the split seeds
/// and the series seed are all derived from `seed`.
PreparedBenchmark prepare_benchmark(std::uint64_t seed,
                                    const BenchmarkSetup& setup = {});

}  // namespace rtune
