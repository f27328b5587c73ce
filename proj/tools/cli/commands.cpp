// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "rtune/data.hpp"
#include "rtune/eval.hpp"
#include "rtune/replay.hpp"
#include "rtune/wavelet.hpp"

namespace rtune::cli {
namespace {

namespace fs = std::filesystem;

// The stream tune() draws replay latents from.
constexpr std::uint64_t kReplayStream = 1;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  return out;
}

void require_finite(const std::optional<MetricPair>& m, const char* what) {
  if (m && !(std::isfinite(m->mae) && std::isfinite(m->mse))) {
    throw NonFiniteError(std::string(what) + " metrics are not finite");
  }
}

nlohmann::json metrics_json(const TuneReport& r) {
  nlohmann::json j{{"old_task", nullptr}, {"new_task", nullptr}};
  if (r.old_task) j["old_task"] = *r.old_task;
  if (r.new_task) j["new_task"] = *r.new_task;
  return j;
}

// Runs fn(0..n-1) on up to `workers` threads; rethrows the first failure.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const std::size_t count = std::max<std::size_t>(1, std::min(workers, n));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::size_t worker_count(std::optional<std::size_t> requested) {
  std::size_t n = requested.value_or(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("RTUNE_THREADS")) {
    char* end = nullptr;
    const unsigned long long cap = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) {
      n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
    }
  }
  return std::max<std::size_t>(1, n);
}

void decompose(const DecomposeOptions& opts) {
  const auto x =
      select_column(load_csv(opts.input), opts.column, opts.input.string());
  const auto bank = build_db4_bank();
  const auto full = rwt_decompose(x, opts.levels, bank);
  const std::size_t keep = opts.keep.value_or(opts.levels);
  const auto recon = rwt_reconstruct(full, opts.alpha, keep);

  std::vector<Vector> approx;
  for (std::size_t l = 1; l < opts.levels; ++l) {
    approx.push_back(rwt_decompose(x, l, bank).approx());
  }
  approx.push_back(full.approx());

  auto out = open_output(opts.output);
  out << "t,x";
  for (std::size_t l = 1; l <= opts.levels; ++l) out << ",A" << l;
  for (std::size_t l = 1; l <= opts.levels; ++l) out << ",D" << l;
  out << ",reconstruction\n";
  for (std::size_t t = 0; t < x.size(); ++t) {
    out << t << ',' << x[t];
    for (const auto& a : approx) out << ',' << a[t];
    for (std::size_t l = 1; l <= opts.levels; ++l) out << ',' << full.detail(l)[t];
    out << ',' << recon[t] << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + opts.output.string());

  write_json(fs::path(opts.output.string() + ".json"),
             {{"input", opts.input.string()},
              {"column", opts.column},
              {"levels", opts.levels},
              {"alpha", opts.alpha},
              {"keep", keep}});
}

void synth(const SynthOptions& opts) {
  const auto& c = opts.config;
  c.validate();
  const Forecaster frozen =
      c.frozen_checkpoint.empty()
          ? prepare_run(c, c.tune.seed).frozen
          : load_checkpoint(fs::path(c.frozen_checkpoint));
  const auto replay = build_replay_set(
      frozen, ReplayConfig{c.tune.replay_n, c.tune.wavelet_levels,
                           c.tune.discard_depth, c.tune.alpha,
                           derive_seed(c.tune.seed, kReplayStream),
                           c.tune.rollout_steps});
  auto out = open_output(opts.output);
  write_replay_csv(replay, out);
  if (!out) throw std::runtime_error("failed writing " + opts.output.string());
  write_json(fs::path(opts.output.string() + ".json"),
             {{"run_config", c},
              {"seed", c.tune.seed},
              {"replay_size", replay.samples.size()}});
}

TuneOutcome tune(const RunConfig& config) {
  config.validate();
  const nlohmann::json echo = config;
  const fs::path dir =
      fs::path(config.output_dir) / ("tune-" + config_digest(echo));

  const auto prepared = prepare_run(config, config.tune.seed);
  const auto raw = frozen_eval(prepared.frozen, prepared.eval);

  std::optional<Forecaster> model;
  TuneReport report;
  if (config.method == "frozen") {
    report = raw;
  } else {
    TuneResult result =
        config.method == "ft"    ? vanilla_ft(prepared.frozen, prepared.new_train,
                                              config.tune, prepared.eval)
        : config.method == "lwf" ? distill_only(prepared.frozen, prepared.new_train,
                                                config.tune, prepared.eval)
                                 : r_tune(prepared.frozen, prepared.new_train,
                                          config.tune, prepared.eval);
    model = std::move(result.model);
    report = std::move(result.report);
  }
  require_finite(report.old_task, "old-task");
  require_finite(report.new_task, "new-task");

  nlohmann::json j{{"run_config", echo},
                   {"seed", config.tune.seed},
                   {"raw", metrics_json(raw)},
                   {"report", report_to_json(report, !config.benchmark)}};
  if (raw.old_task && raw.new_task && report.old_task && report.new_task) {
    j["comparison"] = make_comparison_row(report.method, *raw.old_task,
                                          *raw.new_task, *report.old_task,
                                          *report.new_task);
  }

  fs::create_directories(dir);
  write_json(dir / "config.json", echo);
  write_json(dir / "report.json", j);
  if (model) save_checkpoint(*model, dir / "model.ckpt");
  return TuneOutcome{dir, std::move(j)};
}

SweepOutcome sweep(const RunConfig& config, const std::vector<double>& ratios,
                   std::size_t workers) {
  config.validate();
  if (ratios.empty()) throw ConfigError("sweep needs at least one ratio");
  for (double r : ratios) {
    if (!(r >= 0.0 && r <= 100.0)) {
      throw ConfigError("replay ratios must lie in [0, 100] percent");
    }
  }
  const std::vector<std::uint64_t> seeds =
      config.seeds.empty() ? std::vector<std::uint64_t>{config.tune.seed}
                           : config.seeds;
  const nlohmann::json echo = config;
  const nlohmann::json identity{
      {"run_config", echo}, {"ratios", ratios}, {"seeds", seeds}};
  const fs::path dir =
      fs::path(config.output_dir) / ("sweep-" + config_digest(identity));

  std::vector<std::optional<PreparedBenchmark>> prepared(seeds.size());
  parallel_for(seeds.size(), workers,
               [&](std::size_t s) { prepared[s] = prepare_run(config, seeds[s]); });

  SweepOutcome outcome{dir, std::vector<SweepRow>(seeds.size() * ratios.size())};
  parallel_for(outcome.rows.size(), workers, [&](std::size_t i) {
    const std::size_t s = i / ratios.size();
    const double ratio = ratios[i % ratios.size()];
    const auto& p = *prepared[s];
    TuneConfig cfg = config.tune;
    cfg.seed = seeds[s];
    SweepRow row;
    row.seed = seeds[s];
    row.ratio = ratio;
    TuneResult result = [&] {
      if (ratio == 0.0) return vanilla_ft(p.frozen, p.new_train, cfg, p.eval);
      cfg.replay_n =
          replay_count_for_ratio(ratio, p.new_train.size(), cfg.discard_depth);
      return r_tune(p.frozen, p.new_train, cfg, p.eval);
    }();
    row.replay_n = result.report.config.replay_n;
    row.replay_size = result.report.replay_size;
    require_finite(result.report.old_task, "old-task");
    require_finite(result.report.new_task, "new-task");
    row.old_task = result.report.old_task.value_or(MetricPair{});
    row.new_task = result.report.new_task.value_or(MetricPair{});
    outcome.rows[i] = row;
  });

  fs::create_directories(dir);
  write_json(dir / "config.json", identity);
  {
    auto out = open_output(dir / "sweep.csv");
    out << "seed,replay_ratio,replay_n,replay_size,old_mae,old_mse,new_mae,new_mse\n";
    for (const auto& r : outcome.rows) {
      out << r.seed << ',' << r.ratio << ',' << r.replay_n << ','
          << r.replay_size << ',' << r.old_task.mae << ',' << r.old_task.mse
          << ',' << r.new_task.mae << ',' << r.new_task.mse << '\n';
    }
  }
  {
    auto out = open_output(dir / "sweep_summary.csv");
    out << "replay_ratio,seeds,old_mae_mean,old_mae_std,old_mse_mean,"
           "old_mse_std,new_mae_mean,new_mae_std,new_mse_mean,new_mse_std\n";
    for (std::size_t k = 0; k < ratios.size(); ++k) {
      Vector cols[4];
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        const auto& r = outcome.rows[s * ratios.size() + k];
        cols[0].push_back(r.old_task.mae);
        cols[1].push_back(r.old_task.mse);
        cols[2].push_back(r.new_task.mae);
        cols[3].push_back(r.new_task.mse);
      }
      out << ratios[k] << ',' << seeds.size();
      for (const auto& col : cols) {
        const auto sum = summarize(col);
        out << ',' << sum.mean << ',' << sum.stddev;
      }
      out << '\n';
    }
  }
  return outcome;
}

nlohmann::json evaluate_checkpoint(const RunConfig& config,
                                   const fs::path& checkpoint) {
  config.validate();
  const auto model = load_checkpoint(checkpoint);
  const auto prepared = prepare_run(config, config.tune.seed);
  const auto raw = frozen_eval(prepared.frozen, prepared.eval);
  auto evaluated = frozen_eval(model, prepared.eval);
  evaluated.method = "checkpoint";
  require_finite(evaluated.old_task, "old-task");
  require_finite(evaluated.new_task, "new-task");
  nlohmann::json j{{"run_config", config},
                   {"seed", config.tune.seed},
                   {"checkpoint", checkpoint.string()},
                   {"raw", metrics_json(raw)},
                   {"model", metrics_json(evaluated)}};
  if (raw.old_task && raw.new_task) {
    j["comparison"] = make_comparison_row("checkpoint", *raw.old_task,
                                          *raw.new_task, *evaluated.old_task,
                                          *evaluated.new_task);
  }
  return j;
}

void write_report_table(const std::vector<nlohmann::json>& reports,
                        bool scale10, bool csv, std::ostream& out) {
  struct Group {
    std::string method;
    Vector cols[4];
  };
  std::vector<Group> groups;
  Vector raw_cols[4];
  auto push = [](Vector (&cols)[4], const nlohmann::json& m) {
    if (m.at("old_task").is_null() || m.at("new_task").is_null()) {
      throw ConfigError("report lacks old-task or new-task metrics");
    }
    const auto o = m.at("old_task").get<MetricPair>();
    const auto n = m.at("new_task").get<MetricPair>();
    cols[0].push_back(o.mae);
    cols[1].push_back(o.mse);
    cols[2].push_back(n.mae);
    cols[3].push_back(n.mse);
  };
  for (const auto& r : reports) {
    if (!r.contains("report") || !r.contains("raw")) {
      throw ConfigError("not a tune report (missing 'report' or 'raw')");
    }
    const auto& body = r.at("report");
    const auto method = body.at("method").get<std::string>();
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.method == method; });
    if (it == groups.end()) {
      groups.push_back(Group{method, {}});
      it = groups.end() - 1;
    }
    push(it->cols, body);
    push(raw_cols, r.at("raw"));
  }
  if (groups.empty()) throw ConfigError("no reports given");

  const double scale = scale10 ? 10.0 : 1.0;
  SeedSummary raw[4];
  for (int c = 0; c < 4; ++c) raw[c] = summarize(raw_cols[c]);

  static const char* kNames[4] = {"old_mae", "old_mse", "new_mae", "new_mse"};
  const auto flags = out.flags();
  const auto precision = out.precision();
  if (csv) {
    out << "method,runs";
    for (const char* n : kNames) out << ',' << n << "_mean," << n << "_std," << n << "_change_pct";
    out << '\n';
    out.precision(10);
    for (const auto& g : groups) {
      out << g.method << ',' << g.cols[0].size();
      for (int c = 0; c < 4; ++c) {
        const auto s = summarize(g.cols[c]);
        out << ',' << scale * s.mean << ',' << scale * s.stddev << ','
            << relative_change(raw[c].mean, s.mean);
      }
      out << '\n';
    }
  } else {
    out << std::left << std::setw(10) << "method" << std::setw(6) << "runs";
    for (const char* n : {"old MAE", "old MSE", "new MAE", "new MSE"}) {
      out << std::setw(28) << n;
    }
    out << '\n' << std::fixed;
    for (const auto& g : groups) {
      out << std::setw(10) << g.method << std::setw(6) << g.cols[0].size();
      for (int c = 0; c < 4; ++c) {
        const auto s = summarize(g.cols[c]);
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(4) << scale * s.mean;
        if (s.count > 1) cell << "±" << scale * s.stddev;
        cell << std::showpos << std::setprecision(2) << " / "
             << relative_change(raw[c].mean, s.mean) << '%';
        out << std::setw(28) << cell.str();
      }
      out << '\n';
    }
    if (scale10) out << "(metrics scaled by 10)\n";
  }
  out.flags(flags);
  out.precision(precision);
}

namespace {

// Flags shared by the config-driven subcommands.
struct Overrides {
  std::optional<std::size_t> levels, discard_depth, replay_n, epochs, rollout;
  std::optional<double> alpha, tau, lambda, beta, learning_rate;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method, output_dir, checkpoint;
  std::vector<std::uint64_t> seeds;
  std::string config_path;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    app->add_option("--levels", levels, "wavelet depth");
    app->add_option("--discard-depth", discard_depth,
                    "detail levels discarded for replay variants (k)");
    app->add_option("--alpha", alpha, "detail weight in [0, 1]");
    app->add_option("--tau", tau, "distillation temperature");
    app->add_option("--lambda", lambda, "distillation weight");
    app->add_option("--beta", beta, "L2 weight");
    app->add_option("--replay-n", replay_n, "synthetic replay count N");
    app->add_option("--epochs", epochs, "tuning epochs");
    app->add_option("--lr", learning_rate, "learning rate");
    app->add_option("--rollout", rollout, "closed-loop steps per replay latent");
    app->add_option("--seed", seed, "run seed");
    app->add_option("--seeds", seeds, "seed list for sweeps")->delimiter(',');
    app->add_option("--method", method, "r-tuning | ft | frozen | lwf");
    app->add_option("--output-dir", output_dir, "root directory for run outputs");
    app->add_option("--checkpoint", checkpoint, "frozen model checkpoint");
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    auto& t = c.tune;
    if (levels) t.wavelet_levels = *levels;
    if (discard_depth) t.discard_depth = *discard_depth;
    if (alpha) t.alpha = *alpha;
    if (tau) t.tau = *tau;
    if (lambda) t.lambda = *lambda;
    if (beta) t.beta = *beta;
    if (replay_n) t.replay_n = *replay_n;
    if (epochs) t.epochs = *epochs;
    if (learning_rate) t.learning_rate = *learning_rate;
    if (rollout) t.rollout_steps = *rollout;
    if (seed) t.seed = *seed;
    if (!seeds.empty()) c.seeds = seeds;
    if (method) c.method = *method;
    if (output_dir) c.output_dir = *output_dir;
    if (checkpoint) c.frozen_checkpoint = *checkpoint;
    return c;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"rtune: continual adaptation of a frozen forecaster with "
               "wavelet-filtered synthetic replay and distillation"};
  app.require_subcommand(1);

  DecomposeOptions dec;
  auto* decompose_cmd = app.add_subcommand("decompose", "wavelet-decompose a CSV column");
  decompose_cmd->add_option("--input", dec.input, "input CSV")->required()->check(CLI::ExistingFile);
  decompose_cmd->add_option("--output", dec.output, "output CSV")->required();
  decompose_cmd->add_option("--column", dec.column, "column name (default: last)");
  decompose_cmd->add_option("--levels", dec.levels, "decomposition depth");
  decompose_cmd->add_option("--alpha", dec.alpha, "detail weight in [0, 1]");
  decompose_cmd->add_option("--keep", dec.keep, "detail levels kept (default: all)");

  Overrides synth_flags, tune_flags, sweep_flags, eval_flags;
  std::string synth_output;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic replay set as CSV");
  synth_flags.attach(synth_cmd);
  synth_cmd->add_option("--output", synth_output, "output CSV")->required();

  auto* tune_cmd = app.add_subcommand("tune", "run one tuning method");
  tune_flags.attach(tune_cmd);

  std::vector<double> ratios{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::optional<std::size_t> threads;
  auto* sweep_cmd = app.add_subcommand("sweep", "replay-ratio sweep over seeds");
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->add_option("--ratios", ratios, "replay ratios in percent (0 = fine-tuning control)")
      ->delimiter(',');
  sweep_cmd->add_option("--threads", threads, "worker threads (capped by RTUNE_THREADS)");

  std::string eval_checkpoint, eval_output;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a tuned checkpoint");
  eval_flags.attach(eval_cmd);
  eval_cmd->add_option("--model", eval_checkpoint, "checkpoint to evaluate")
      ->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--output", eval_output, "write JSON here instead of stdout");

  std::vector<std::string> report_inputs;
  bool scale10 = false, report_csv = false;
  std::string report_output;
  auto* report_cmd = app.add_subcommand("report", "comparison table from report.json files");
  report_cmd->add_option("--input", report_inputs, "report.json files")
      ->required()->check(CLI::ExistingFile);
  report_cmd->add_flag("--scale10", scale10, "multiply metrics by 10 for display");
  report_cmd->add_flag("--csv", report_csv, "CSV instead of a text table");
  report_cmd->add_option("--output", report_output, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*decompose_cmd) {
      decompose(dec);
      out << dec.output.string() << '\n';
    } else if (*synth_cmd) {
      synth(SynthOptions{synth_flags.resolve(), synth_output});
      out << synth_output << '\n';
    } else if (*tune_cmd) {
      const auto outcome = tune(tune_flags.resolve());
      out << outcome.directory.string() << '\n';
    } else if (*sweep_cmd) {
      const auto outcome = sweep(sweep_flags.resolve(), ratios, worker_count(threads));
      out << outcome.directory.string() << '\n';
    } else if (*eval_cmd) {
      const auto j = evaluate_checkpoint(eval_flags.resolve(), eval_checkpoint);
      if (eval_output.empty()) {
        out << j.dump(2) << '\n';
      } else {
        write_json(eval_output, j);
        out << eval_output << '\n';
      }
    } else if (*report_cmd) {
      std::vector<nlohmann::json> reports;
      for (const auto& path : report_inputs) {
        std::ifstream in(path);
        reports.push_back(nlohmann::json::parse(in));
      }
      if (report_output.empty()) {
        write_report_table(reports, scale10, report_csv, out);
      } else {
        std::ostringstream buffer;
        write_report_table(reports, scale10, report_csv, buffer);
        write_text(report_output, buffer.str());
        out << report_output << '\n';
      }
    }
  } catch (const std::exception& e) {
    err << "rtune: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace rtune::cli
