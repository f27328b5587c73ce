// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "rtune/eval.hpp"
#include "rtune/experiment.hpp"
#include "rtune/forecaster.hpp"
#include "rtune/replay.hpp"
#include "rtune/tuner.hpp"
#include "rtune/wavelet.hpp"
#include "test_util.hpp"

namespace {

using namespace rtune;
using testing::l2;
using testing::l2_distance;
using testing::random_vector;
using testing::rel_error;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// ---------------------------------------------------------------- 1
Outcome filter_identities() {
  const auto bank = build_db4_bank();
  const long double r3 = std::sqrt(3.0L), d = 4.0L * std::sqrt(2.0L);
  const long double closed[4] = {(1 + r3) / d, (3 + r3) / d, (3 - r3) / d, (1 - r3) / d};
  double worst = 0.0;
  double sg = 0, sh = 0, eg = 0;
  for (int k = 0; k < 4; ++k) {
    worst = std::max(worst, std::abs(bank.g[k] - static_cast<double>(closed[k])));
    const double sign = k % 2 ? -1.0 : 1.0;
    worst = std::max(worst, std::abs(bank.h[k] - sign * bank.g[3 - k]));
    sg += bank.g[k];
    sh += bank.h[k];
    eg += bank.g[k] * bank.g[k];
  }
  worst = std::max({worst, std::abs(sg - std::sqrt(2.0)), std::abs(sh), std::abs(eg - 1.0)});
  return {worst <= 1e-12, fmt("max deviation %.2e (tol 1e-12)", worst)};
}

// ---------------------------------------------------------------- 2
using Matrix = std::vector<Vector>;

Matrix circulant(const FilterBank::Taps& f, std::size_t n) {
  Matrix m(n, Vector(n, 0.0));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < 4; ++k) m[r][(r + n - k) % n] += f[k];
  return m;
}

Vector apply(const Matrix& m, const Vector& x, bool transposed = false) {
  Vector y(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      y[i] += (transposed ? m[j][i] : m[i][j]) * x[j];
  return y;
}

Outcome wavelet_properties() {
  const auto bank = build_db4_bank();
  double lin = 0.0, shift = 0.0, constant = 0.0, round_trip = 0.0, oracle = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (std::size_t levels : {1, 2, 3}) {
      const std::size_t n = 32 + 8 * (seed % 5);
      const auto x = random_vector(n, seed);
      const auto y = random_vector(n, seed + 1000);
      const double a = 1.7, b = -0.3;
      Vector combo(n);
      for (std::size_t i = 0; i < n; ++i) combo[i] = a * x[i] + b * y[i];
      const auto dx = rwt_decompose(x, levels, bank);
      const auto dy = rwt_decompose(y, levels, bank);
      const auto dc = rwt_decompose(combo, levels, bank);
      for (std::size_t l = 1; l <= levels; ++l)
        for (std::size_t i = 0; i < n; ++i)
          lin = std::max(lin, std::abs(dc.detail(l)[i] - a * dx.detail(l)[i] - b * dy.detail(l)[i]));
      // Circular shift by 3.
      Vector shifted(n);
      for (std::size_t i = 0; i < n; ++i) shifted[(i + 3) % n] = x[i];
      const auto ds = rwt_decompose(shifted, levels, bank);
      for (std::size_t l = 1; l <= levels; ++l)
        for (std::size_t i = 0; i < n; ++i)
          shift = std::max(shift, std::abs(ds.detail(l)[(i + 3) % n] - dx.detail(l)[i]));
      const auto dk = rwt_decompose(Vector(n, 0.1 * seed - 2.0), levels, bank);
      for (const auto& det : dk.details())
        for (double v : det) constant = std::max(constant, std::abs(v));
      round_trip = std::max(round_trip, l2_distance(rwt_reconstruct(dx, 1.0, levels), x) / l2(x));
    }
    // Length-8 single-level matrix oracle.
    const auto G = circulant(bank.g, 8), H = circulant(bank.h, 8);
    const auto x = random_vector(8, seed + 77);
    const auto d = rwt_decompose(x, 1, bank);
    const auto ga = apply(G, x), hd = apply(H, x);
    for (std::size_t i = 0; i < 8; ++i) {
      oracle = std::max({oracle, std::abs(d.approx()[i] - ga[i]), std::abs(d.detail(1)[i] - hd[i])});
    }
    const auto low = apply(G, ga, true), high = apply(H, hd, true);
    for (double alpha : {1.0, 0.7}) {
      const auto r = rwt_reconstruct(d, alpha, 1);
      for (std::size_t i = 0; i < 8; ++i)
        oracle = std::max(oracle, std::abs(r[i] - 0.5 * (low[i] + alpha * high[i])));
    }
    Vector matrix_rt(8);
    for (std::size_t i = 0; i < 8; ++i) matrix_rt[i] = 0.5 * (low[i] + high[i]);
    oracle = std::max(oracle, l2_distance(matrix_rt, x) / l2(x));
  }
  const bool pass = lin <= 1e-10 && shift == 0.0 && constant <= 1e-12 &&
                    round_trip <= 1e-8 && oracle <= 1e-12;
  return {pass, fmt("linearity %.1e, shift %.1e (exact), constant details %.1e, "
                    "round trip %.1e (tol 1e-8)", lin, shift, constant, round_trip) +
                    fmt(", matrix oracle %.1e", oracle)};
}

// ---------------------------------------------------------------- 3
// Scale below which finite-difference comparisons are absolute.
constexpr double kFdFloor = 1e-6;

Outcome softmax_machinery() {
  double sum_err = 0.0, closed_err = 0.0, fd_err = 0.0, scale_err = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t c = 2 + seed % 9;
    const auto z = random_vector(c, seed, 3.0);
    const double tau = 0.25 + 0.1 * static_cast<double>(seed % 40);
    const auto p = soften(z, tau).probs;
    sum_err = std::max(sum_err, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
    // Closed form from an extended-precision softmax.
    std::vector<long double> q(c);
    long double zmax = *std::max_element(z.begin(), z.end()), norm = 0;
    for (std::size_t j = 0; j < c; ++j) norm += q[j] = std::exp((z[j] - zmax) / tau);
    for (auto& v : q) v /= norm;
    const auto jac = soften_jacobian(z, tau);
    // Five-point central stencil; the step follows tau because p depends on z / tau.
    const double step = 1e-3 * tau;
    for (std::size_t m = 0; m < c; ++m) {
      auto at = [&](double offset) {
        Vector zz = z;
        zz[m] += offset;
        return soften(zz, tau).probs;
      };
      const auto p2 = at(2 * step), p1 = at(step), m1 = at(-step), m2 = at(-2 * step);
      for (std::size_t j = 0; j < c; ++j) {
        const long double exact = q[j] * ((j == m ? 1.0L : 0.0L) - q[m]) / tau;
        closed_err = std::max(closed_err, rel_error(jac[j][m], static_cast<double>(exact), 1e-12));
        const double fd = (-p2[j] + 8 * p1[j] - 8 * m1[j] + m2[j]) / (12 * step);
        fd_err = std::max(fd_err, rel_error(jac[j][m], fd, kFdFloor));
      }
    }
    Vector scaled = z;
    for (auto& v : scaled) v *= tau;
    const auto js = soften_jacobian(scaled, tau), j1 = soften_jacobian(z, 1.0);
    for (std::size_t j = 0; j < c; ++j)
      for (std::size_t m = 0; m < c; ++m)
        scale_err = std::max(scale_err, rel_error(js[j][m], j1[j][m] / tau, 1e-12));
  }
  const bool pass = sum_err <= 1e-12 && closed_err <= 1e-10 && fd_err <= 1e-6 && scale_err <= 1e-10;
  return {pass, fmt("sum %.1e (tol 1e-12), closed form %.1e, finite differences %.1e "
                    "(tol 1e-6, floor 1e-6), J(tau z, tau) vs J(z,1)/tau %.1e; 100 instances",
                    sum_err, closed_err, fd_err, scale_err)};
}

// ---------------------------------------------------------------- 4
Outcome gradient_correctness() {
  const LossWeights settings[] = {{3.0, 0.2, 1e-4}, {3.0, 0.0, 1e-4}, {3.0, 0.2, 0.0}, {0.5, 1.0, 1e-2}};
  double worst = 0.0;
  std::size_t instances = 0;
  for (const auto& w : settings) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto m = Forecaster::random(6, 4, 5, seed);
      const auto teacher = Forecaster::random(6, 4, 5, seed + 5000);
      std::vector<Vector> xs, ys;
      for (std::uint64_t s = 0; s < 3; ++s) {
        xs.push_back(random_vector(6, 100 * seed + s));
        ys.push_back(random_vector(4, 100 * seed + s + 50));
      }
      const auto g = grad_total(m, teacher, xs, ys, w);
      Forecaster probe = m;
      constexpr double step = 1e-5;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double orig = probe.theta()[i];
        probe.mutable_theta()[i] = orig + step;
        const double up = evaluate_total_loss(probe, teacher, xs, ys, w);
        probe.mutable_theta()[i] = orig - step;
        const double down = evaluate_total_loss(probe, teacher, xs, ys, w);
        probe.mutable_theta()[i] = orig;
        worst = std::max(worst, rel_error(g[i], (up - down) / (2 * step), 1e-5));
      }
      ++instances;
    }
  }
  return {worst <= 1e-4,
          fmt("max per-coordinate relative error %.2e (tol 1e-4, floor 1e-5) over %.0f "
              "instances, 4 (tau, lambda, beta) settings", worst, double(instances))};
}

// ---------------------------------------------------------------- 5
Outcome distillation_identities() {
  double entropy_err = 0.0, uniform_err = 0.0;
  int gibbs_ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto y = random_vector(2 + seed % 10, seed, 3.0);
    const double tau = 0.5 + 0.05 * static_cast<double>(seed);
    const auto p = soften(y, tau).probs;
    double h = 0.0;
    for (double v : p) h -= v * std::log(v);
    entropy_err = std::max(entropy_err, std::abs(distill_loss(y, y, tau) - h));
    Vector y2 = y;
    const auto noise = random_vector(y.size(), seed + 999, 0.5);
    for (std::size_t i = 0; i < y.size(); ++i) y2[i] += noise[i];
    if (distill_loss(y, y, tau) < distill_loss(y, y2, tau)) ++gibbs_ok;
  }
  for (std::size_t c = 2; c <= 16; ++c) {
    const Vector u(c, 0.37);
    uniform_err = std::max(uniform_err, std::abs(distill_loss(u, u, 3.0) - std::log(double(c))));
  }
  return {entropy_err <= 1e-10 && gibbs_ok == 100 && uniform_err <= 1e-12,
          fmt("entropy %.1e (tol 1e-10), Gibbs %.0f/100, uniform ln C %.1e (tol 1e-12)",
              entropy_err, gibbs_ok, uniform_err)};
}

// ---------------------------------------------------------------- 6-9
constexpr std::uint64_t kSeeds = 5;

struct Arm {
  MetricPair old_task, new_task;
};

struct SeedRuns {
  std::optional<PreparedBenchmark> prepared;
  Arm frozen, ft, lambda_only, replay_only, full;
  TuneResult full_result{Forecaster(1, 1, 1), {}};
};

Arm arm_of(const TuneReport& r) { return Arm{*r.old_task, *r.new_task}; }

std::vector<SeedRuns>& benchmark_runs() {
  static std::vector<SeedRuns> runs = [] {
    std::vector<SeedRuns> out(kSeeds);
    for (std::uint64_t s = 0; s < kSeeds; ++s) {
      auto& r = out[s];
      r.prepared = prepare_benchmark(s);
      const auto& p = *r.prepared;
      const auto cfg = benchmark_tune_config(s);
      r.frozen = arm_of(frozen_eval(p.frozen, p.eval));
      r.ft = arm_of(vanilla_ft(p.frozen, p.new_train, cfg, p.eval).report);
      r.lambda_only = arm_of(distill_only(p.frozen, p.new_train, cfg, p.eval).report);
      auto replay_cfg = cfg;
      replay_cfg.lambda = 0.0;
      r.replay_only = arm_of(r_tune(p.frozen, p.new_train, replay_cfg, p.eval).report);
      r.full_result = r_tune(p.frozen, p.new_train, cfg, p.eval);
      r.full = arm_of(r.full_result.report);
    }
    return out;
  }();
  return runs;
}

double mean_of(const std::function<double(const SeedRuns&)>& f) {
  double s = 0.0;
  for (const auto& r : benchmark_runs()) s += f(r);
  return s / static_cast<double>(kSeeds);
}

Outcome forgetting_benchmark() {
  const double frozen_new = mean_of([](auto& r) { return r.frozen.new_task.mae; });
  const double frozen_old_mse = mean_of([](auto& r) { return r.frozen.old_task.mse; });
  const double ft_new = mean_of([](auto& r) { return r.ft.new_task.mae; });
  const double ft_old_mae = mean_of([](auto& r) { return r.ft.old_task.mae; });
  const double ft_old_mse = mean_of([](auto& r) { return r.ft.old_task.mse; });
  const double rt_new = mean_of([](auto& r) { return r.full.new_task.mae; });
  const double rt_old_mae = mean_of([](auto& r) { return r.full.old_task.mae; });
  const double rt_old_mse = mean_of([](auto& r) { return r.full.old_task.mse; });
  const double gain = relative_change(frozen_new, ft_new);
  const bool a = gain >= 30.0 && ft_old_mse > frozen_old_mse;
  const bool b = rt_old_mae < ft_old_mae && rt_old_mse < ft_old_mse;
  const bool c = rt_new <= 1.10 * ft_new;
  std::ostringstream d;
  d << fmt("(a) FT new MAE gain %+.1f%% (need >= 30%%), FT old MSE %.4f vs frozen %.4f; ",
           gain, ft_old_mse, frozen_old_mse)
    << fmt("(b) old MAE/MSE r-tuning %.4f/%.4f vs FT %.4f/%.4f; ", rt_old_mae, rt_old_mse,
           ft_old_mae, ft_old_mse)
    << fmt("(c) new MAE r-tuning %.4f vs FT %.4f (ratio %.3f, need <= 1.10)", rt_new, ft_new,
           rt_new / ft_new);
  return {a && b && c, d.str()};
}

Outcome replay_ratio_sweep() {
  const double ratios[3] = {1.0, 5.0, 10.0};
  double mean[3] = {0, 0, 0};
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    const auto& p = *benchmark_runs()[s].prepared;
    for (int k = 0; k < 3; ++k) {
      auto cfg = benchmark_tune_config(s);
      cfg.replay_n = replay_count_for_ratio(ratios[k], p.new_train.size(), cfg.discard_depth);
      mean[k] += r_tune(p.frozen, p.new_train, cfg, p.eval).report.old_task->mae / kSeeds;
    }
  }
  const double early = mean[0] - mean[1], late = mean[1] - mean[2];
  const bool pass = mean[1] <= mean[0] && std::abs(late) < std::abs(early);
  return {pass, fmt("old MAE 1%% %.4f, 5%% %.4f, 10%% %.4f; |5->10| %.4f < |1->5| %.4f",
                    mean[0], mean[1], mean[2], std::abs(late)) +
                    fmt(" = %.4f", std::abs(early))};
}

std::string checkpoint_bytes(const Forecaster& m) {
  std::ostringstream out;
  save_checkpoint(m, out);
  return out.str();
}

Outcome determinism() {
  // Library path: repeat seed 0 of the benchmark.
  const auto& first = benchmark_runs()[0];
  const auto& p = *first.prepared;
  const auto again = r_tune(p.frozen, p.new_train, benchmark_tune_config(0), p.eval);
  const bool lib_report = report_to_json(again.report).dump() ==
                          report_to_json(first.full_result.report).dump();
  const bool lib_ckpt = checkpoint_bytes(again.model) == checkpoint_bytes(first.full_result.model);

  // CLI path: benchmark-mode tune twice, compare the written files.
  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "rtune_acceptance_determinism";
  fs::remove_all(root);
  cli::RunConfig cfg;
  cfg.old_length = 1000;
  cfg.new_length = 3000;
  cfg.pretrain_epochs = 5;
  cfg.tune.epochs = 3;
  cfg.tune.replay_n = 200;
  cfg.tune.seed = 7;
  auto slurp = [](const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  cfg.output_dir = root.string();
  const auto a = cli::tune(cfg);
  const auto report_a = slurp(a.directory / "report.json");
  const auto ckpt_a = slurp(a.directory / "model.ckpt");
  fs::remove_all(root);
  const auto b = cli::tune(cfg);
  const bool cli_report = a.directory == b.directory && !report_a.empty() &&
                          slurp(b.directory / "report.json") == report_a;
  const bool cli_ckpt = !ckpt_a.empty() && slurp(b.directory / "model.ckpt") == ckpt_a;
  fs::remove_all(root);
  std::ostringstream d;
  d << "library report " << (lib_report ? "identical" : "DIFFERS") << ", checkpoint "
    << (lib_ckpt ? "identical" : "DIFFERS") << "; CLI report "
    << (cli_report ? "identical" : "DIFFERS") << ", checkpoint "
    << (cli_ckpt ? "identical" : "DIFFERS");
  return {lib_report && lib_ckpt && cli_report && cli_ckpt, d.str()};
}

Outcome ablation_ordering() {
  int holds = 0;
  std::ostringstream per_seed;
  for (const auto& r : benchmark_runs()) {
    const bool ok = r.ft.old_task.mae >= r.lambda_only.old_task.mae &&
                    r.lambda_only.old_task.mae >= r.replay_only.old_task.mae &&
                    r.replay_only.old_task.mae >= r.full.old_task.mae;
    holds += ok;
    per_seed << (ok ? 'y' : 'n');
  }
  const double ft = mean_of([](auto& r) { return r.ft.old_task.mae; });
  const double lo = mean_of([](auto& r) { return r.lambda_only.old_task.mae; });
  const double ro = mean_of([](auto& r) { return r.replay_only.old_task.mae; });
  const double full = mean_of([](auto& r) { return r.full.old_task.mae; });
  const bool mean_ok = ft >= lo && lo >= ro && ro >= full;
  return {mean_ok && holds >= 4,
          fmt("old MAE means FT %.5f >= lambda-only %.5f >= replay-only %.5f >= full %.5f",
              ft, lo, ro, full) +
              (mean_ok ? " (holds)" : " (VIOLATED)") +
              fmt("; per-seed chain holds in %.0f/5 (need >= 4): ", holds) + per_seed.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0: none
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "filter identities", 1.0, filter_identities},
      {2, "RWT properties", 5.0, wavelet_properties},
      {3, "softmax machinery", 5.0, softmax_machinery},
      {4, "gradient correctness", 30.0, gradient_correctness},
      {5, "distillation identities", 0.0, distillation_identities},
      {6, "forgetting benchmark", 300.0, forgetting_benchmark},
      {7, "replay-ratio sweep", 600.0, replay_ratio_sweep},
      {8, "determinism", 0.0, determinism},
      {9, "ablation ordering", 0.0, ablation_ordering},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_seconds == 0.0 || secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s [%d] %s: %s; %.2f s", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    if (c.limit_seconds > 0.0) std::printf(" (limit %.0f s)", c.limit_seconds);
    std::printf("\n");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures;
}
