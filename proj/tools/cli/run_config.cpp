// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include "run_config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

#include "rtune/data.hpp"

namespace rtune::cli {
namespace {

template <typename T>
void read(const nlohmann::json& j, const std::string& key, T& out) {
  try {
    j.get_to(out);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type: " + j.dump());
  }
}

using Setter = std::function<void(const nlohmann::json&, RunConfig&)>;

const std::map<std::string, Setter>& setters() {
#define RTUNE_KEY(name, member) \
  {name, [](const nlohmann::json& v, RunConfig& c) { read(v, name, c.member); }}
  static const std::map<std::string, Setter> table{
      RTUNE_KEY("replay_n", tune.replay_n),
      RTUNE_KEY("wavelet_levels", tune.wavelet_levels),
      RTUNE_KEY("discard_depth", tune.discard_depth),
      RTUNE_KEY("alpha", tune.alpha),
      RTUNE_KEY("tau", tune.tau),
      RTUNE_KEY("lambda", tune.lambda),
      RTUNE_KEY("beta", tune.beta),
      RTUNE_KEY("epochs", tune.epochs),
      RTUNE_KEY("learning_rate", tune.learning_rate),
      RTUNE_KEY("batch_size", tune.batch_size),
      RTUNE_KEY("seed", tune.seed),
      RTUNE_KEY("validation_fraction", tune.validation_fraction),
      RTUNE_KEY("rollout_steps", tune.rollout_steps),
      RTUNE_KEY("method", method),
      RTUNE_KEY("benchmark", benchmark),
      RTUNE_KEY("old_length", old_length),
      RTUNE_KEY("new_length", new_length),
      RTUNE_KEY("noise_sigma", noise_sigma),
      RTUNE_KEY("old_data", old_data),
      RTUNE_KEY("new_data", new_data),
      RTUNE_KEY("column", column),
      RTUNE_KEY("frozen_checkpoint", frozen_checkpoint),
      RTUNE_KEY("input_width", input_width),
      RTUNE_KEY("horizon", horizon),
      RTUNE_KEY("stride", stride),
      RTUNE_KEY("train_fraction", train_fraction),
      RTUNE_KEY("few_shot_fraction", few_shot_fraction),
      RTUNE_KEY("hidden_width", hidden_width),
      RTUNE_KEY("pretrain_epochs", pretrain_epochs),
      RTUNE_KEY("pretrain_learning_rate", pretrain_learning_rate),
      RTUNE_KEY("pretrain_batch_size", pretrain_batch_size),
      RTUNE_KEY("output_dir", output_dir),
      RTUNE_KEY("seeds", seeds),
  };
#undef RTUNE_KEY
  return table;
}

enum Stream : std::uint64_t {
  kOldSplitStream = 21,
  kNewSplitStream = 22,
  kFewShotStream = 23,
  kPretrainStream = 24,
};

}  // namespace

Vector select_column(const std::vector<RawSeries>& columns,
                     const std::string& wanted, const std::string& source) {
  if (wanted.empty()) return columns.back().values;
  for (const auto& s : columns) {
    if (s.name == wanted) return s.values;
  }
  throw ConfigError(source + ": no column named '" + wanted + "'");
}

void RunConfig::validate() const {
  tune.validate();
  if (method != "r-tuning" && method != "ft" && method != "frozen" &&
      method != "lwf") {
    throw ConfigError("method must be one of r-tuning, ft, frozen, lwf (got '" +
                      method + "')");
  }
  if (input_width == 0 || horizon == 0 || stride == 0) {
    throw ConfigError("input_width, horizon and stride must be positive");
  }
  if (hidden_width == 0) throw ConfigError("hidden_width must be positive");
  if (!benchmark) {
    if (new_data.empty()) throw ConfigError("new_data is required outside benchmark mode");
    if (old_data.empty() && frozen_checkpoint.empty()) {
      throw ConfigError("old_data is required outside benchmark mode");
    }
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = c.tune;
  j["method"] = c.method;
  j["benchmark"] = c.benchmark;
  j["old_length"] = c.old_length;
  j["new_length"] = c.new_length;
  j["noise_sigma"] = c.noise_sigma;
  j["old_data"] = c.old_data;
  j["new_data"] = c.new_data;
  j["column"] = c.column;
  j["frozen_checkpoint"] = c.frozen_checkpoint;
  j["input_width"] = c.input_width;
  j["horizon"] = c.horizon;
  j["stride"] = c.stride;
  j["train_fraction"] = c.train_fraction;
  j["few_shot_fraction"] = c.few_shot_fraction;
  j["hidden_width"] = c.hidden_width;
  j["pretrain_epochs"] = c.pretrain_epochs;
  j["pretrain_learning_rate"] = c.pretrain_learning_rate;
  j["pretrain_batch_size"] = c.pretrain_batch_size;
  j["output_dir"] = c.output_dir;
  j["seeds"] = c.seeds;
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(value, c);
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  RunConfig c;
  from_json(j, c);
  return c;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_digest(const nlohmann::json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

BenchmarkSetup benchmark_setup(const RunConfig& c) {
  BenchmarkSetup s;
  s.input_width = c.input_width;
  s.horizon = c.horizon;
  s.stride = c.stride;
  s.series = BenchmarkSpec{c.old_length, c.new_length, c.noise_sigma};
  s.pretrain = PretrainOptions{c.hidden_width, c.pretrain_epochs,
                               c.pretrain_learning_rate, c.pretrain_batch_size, 0};
  s.train_fraction = c.train_fraction;
  s.few_shot_fraction = c.few_shot_fraction;
  return s;
}

PreparedBenchmark prepare_run(const RunConfig& c, std::uint64_t seed) {
  if (c.benchmark) {
    auto prepared = prepare_benchmark(seed, benchmark_setup(c));
    if (!c.frozen_checkpoint.empty()) {
      prepared.frozen = load_checkpoint(std::filesystem::path(c.frozen_checkpoint));
    }
    return prepared;
  }

  EvalSets eval;
  WindowedDataset old_train(c.input_width, c.horizon);
  for (std::size_t i = 0; i < c.old_data.size(); ++i) {
    const auto& path = c.old_data[i];
    const auto series = select_column(load_csv(path), c.column, path);
    auto task = prepare_task(series, c.input_width, c.horizon, c.stride,
                             c.train_fraction,
                             derive_seed(seed, kOldSplitStream + 16 * i));
    for (std::size_t r = 0; r < task.train.size(); ++r) {
      old_train.push_back(task.train.inputs[r], task.train.labels[r]);
    }
    eval.old_tests.push_back(std::move(task.test));
  }

  const auto series = select_column(load_csv(c.new_data), c.column, c.new_data);
  auto new_task = prepare_task(series, c.input_width, c.horizon, c.stride,
                               c.train_fraction, derive_seed(seed, kNewSplitStream));
  eval.new_test = std::move(new_task.test);

  Forecaster frozen(c.input_width, c.horizon, c.hidden_width);
  if (!c.frozen_checkpoint.empty()) {
    frozen = load_checkpoint(std::filesystem::path(c.frozen_checkpoint));
  } else {
    frozen = pretrain(old_train,
                      PretrainOptions{c.hidden_width, c.pretrain_epochs,
                                      c.pretrain_learning_rate,
                                      c.pretrain_batch_size,
                                      derive_seed(seed, kPretrainStream)});
  }
  return PreparedBenchmark{
      std::move(frozen),
      few_shot_subsample(new_task.train, c.few_shot_fraction,
                         derive_seed(seed, kFewShotStream)),
      std::move(eval),
      {}};
}

}  // namespace rtune::cli
