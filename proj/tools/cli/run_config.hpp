// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtune/data.hpp"
#include "rtune/experiment.hpp"
#include "rtune/tuner.hpp"

namespace rtune::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run needs. Serialized as one flat JSON object.
struct RunConfig {
  TuneConfig tune = benchmark_tune_config(0);
  std::string method = "r-tuning";  // r-tuning | ft | frozen | lwf

  // Benchmark mode synthesizes both tasks from the seed and leaves timing
  // out of every artifact.
  bool benchmark = true;
  std::size_t old_length = 4000;
  std::size_t new_length = 20000;
  double noise_sigma = 0.1;

  // File mode.
  std::vector<std::string> old_data;
  std::string new_data;
  std::string column;             // empty: last value column
  std::string frozen_checkpoint;  // empty: pretrain on the old tasks

  std::size_t input_width = 48;
  std::size_t horizon = 12;
  std::size_t stride = 1;
  double train_fraction = 0.8;
  double few_shot_fraction = 0.1;

  std::size_t hidden_width = 32;
  std::size_t pretrain_epochs = 30;
  double pretrain_learning_rate = 0.05;
  std::size_t pretrain_batch_size = 32;

  std::string output_dir = "runs";
  std::vector<std::uint64_t> seeds;  // sweeps; empty means {tune.seed}

  /// Throws ConfigError or DomainError.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Missing keys keep their defaults; unknown keys throw ConfigError.
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_run_config(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
/// Hex FNV-1a digest of the canonical JSON form.
std::string config_digest(const nlohmann::json& j);

/// Named column of a parsed CSV; an empty name picks the last column.
Vector select_column(const std::vector<RawSeries>& columns,
                     const std::string& wanted, const std::string& source);

BenchmarkSetup benchmark_setup(const RunConfig& c);

/// Frozen model, few-shot training data and evaluation sets for one seed.
PreparedBenchmark prepare_run(const RunConfig& c, std::uint64_t seed);

}  // namespace rtune::cli
