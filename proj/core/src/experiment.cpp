// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include "rtune/experiment.hpp"

namespace rtune {
namespace {
enum Stream : std::uint64_t {
  kSeriesStream = 11,
  kOldSplitStream = 12,
  kNewSplitStream = 13,
  kFewShotStream = 14,
  kPretrainStream = 15,
};
}  // namespace

TuneConfig benchmark_tune_config(std::uint64_t seed) {
  TuneConfig cfg;
  cfg.seed = seed;
  cfg.learning_rate = 0.05;
  return cfg;
}

PreparedBenchmark prepare_benchmark(std::uint64_t seed,
                                    const BenchmarkSetup& setup) {
  const auto tasks =
      gen_benchmark_tasks(derive_seed(seed, kSeriesStream), setup.series);
  const auto old_task =
      prepare_task(tasks.old_task.values, setup.input_width, setup.horizon,
                   setup.stride, setup.train_fraction,
                   derive_seed(seed, kOldSplitStream));
  const auto new_task =
      prepare_task(tasks.new_task.values, setup.input_width, setup.horizon,
                   setup.stride, setup.train_fraction,
                   derive_seed(seed, kNewSplitStream));

  PretrainOptions opts = setup.pretrain;
  opts.seed = derive_seed(seed, kPretrainStream);

  PreparedBenchmark out{
      pretrain(old_task.train, opts),
      few_shot_subsample(new_task.train, setup.few_shot_fraction,
                         derive_seed(seed, kFewShotStream)),
      EvalSets{{old_task.test}, new_task.test},
      tasks.parameters};
  return out;
}

}  // namespace rtune
