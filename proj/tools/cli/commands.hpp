// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "run_config.hpp"

namespace rtune::cli {

/// Worker count: the request (or hardware concurrency), capped by
/// RTUNE_THREADS when set, never below one.
std::size_t worker_count(std::optional<std::size_t> requested);

struct DecomposeOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::string column;  // empty: last value column
  std::size_t levels = 1;
  double alpha = 0.7;
  std::optional<std::size_t> keep;  // default: all levels
};

/// Writes columns x, A1..AL, D1..DL, reconstruction.
void decompose(const DecomposeOptions& opts);

struct SynthOptions {
  RunConfig config;
  std::filesystem::path output;
};

/// Writes the replay CSV plus a sidecar `<output>.json` with the config echo.
void synth(const SynthOptions& opts);

struct TuneOutcome {
  std::filesystem::path directory;
  nlohmann::json report;
};

/// Runs `config.method` for `config.tune.seed` and writes config.json,
/// report.json and (except for frozen) model.ckpt into
/// `<output_dir>/tune-<digest>`.
TuneOutcome tune(const RunConfig& config);

struct SweepRow {
  std::uint64_t seed = 0;
  double ratio = 0.0;
  std::size_t replay_n = 0;
  std::size_t replay_size = 0;
  MetricPair old_task;
  MetricPair new_task;
};

struct SweepOutcome {
  std::filesystem::path directory;
  std::vector<SweepRow> rows;  // seed-major, ratios in request order
};

/// One run per (seed, ratio); ratio 0 runs the vanilla fine-tuning arm.
/// Writes config.json, sweep.csv and sweep_summary.csv into
/// `<output_dir>/sweep-<digest>`.
SweepOutcome sweep(const RunConfig& config, const std::vector<double>& ratios,
                   std::size_t workers);

/// Evaluates a checkpoint on the config's test sets next to the frozen model.
nlohmann::json evaluate_checkpoint(const RunConfig& config,
                                   const std::filesystem::path& checkpoint);

/// Method-grouped comparison table from report.json files.
void write_report_table(const std::vector<nlohmann::json>& reports,
                        bool scale10, bool csv, std::ostream& out);

/// Parses argv and dispatches. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace rtune::cli
