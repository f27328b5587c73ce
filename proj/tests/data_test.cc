// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include "rtune/data.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "test_util.hpp"

namespace rtune {
namespace {

TEST(ZscoreTest, PopulationStatistics) {
  const Vector x{1.0, 2.0, 3.0};
  const auto p = zscore_fit(x);
  EXPECT_DOUBLE_EQ(p.mu(), 2.0);
  EXPECT_NEAR(p.sigma(), std::sqrt(2.0 / 3.0), 1e-15);
  const auto z = zscore_apply(x, p);
  EXPECT_NEAR(z[0], -std::sqrt(1.5), 1e-15);
  EXPECT_DOUBLE_EQ(z[1], 0.0);
  EXPECT_NEAR(z[2], std::sqrt(1.5), 1e-15);
}

TEST(ZscoreTest, RejectsConstantAndShortInput) {
  EXPECT_THROW(zscore_fit(Vector{4.0, 4.0, 4.0}), DomainError);
  EXPECT_THROW(zscore_fit(Vector{4.0}), DomainError);
}

TEST(ZscoreTest, RoundTrip) {
  const auto x = testing::random_vector(500, 3, 7.0);
  const auto p = zscore_fit(x);
  const auto back = zscore_invert(zscore_apply(x, p), p);
  EXPECT_LE(testing::max_abs_diff(back, x), 1e-12);
  const auto z = zscore_apply(x, p);
  double mean = 0.0, sq = 0.0;
  for (double v : z) mean += v;
  mean /= z.size();
  for (double v : z) sq += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(sq / z.size(), 1.0, 1e-12);
}

TEST(WindowTest, CountsAndContents) {
  Vector ramp(20);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  const auto w = make_windows(ramp, 5, 3);
  ASSERT_EQ(w.size(), 20u - 5 - 3 + 1);
  for (std::size_t r = 0; r < w.size(); ++r) {
    EXPECT_EQ(w.starts[r], r);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(w.inputs[r][i], double(r + i));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(w.labels[r][i], double(r + 5 + i));
    EXPECT_EQ(w.origins[r], Origin::kNew);
  }
  EXPECT_EQ(make_windows(ramp, 5, 3, 4).size(), 4u);  // starts 0, 4, 8, 12
  EXPECT_EQ(make_windows(ramp, 10, 10).size(), 1u);
  EXPECT_THROW(make_windows(ramp, 15, 6), DomainError);
  EXPECT_THROW(make_windows(ramp, 0, 6), DomainError);
}

TEST(SplitTest, EightyTwenty) {
  Vector series(109);
  for (std::size_t i = 0; i < series.size(); ++i) series[i] = std::sin(0.1 * i);
  const auto w = make_windows(series, 6, 4);  // 100 windows
  ASSERT_EQ(w.size(), 100u);
  const auto [train, test] = split_train_test(w, 0.8, 1);
  EXPECT_EQ(train.size(), 80u);
  EXPECT_EQ(test.size(), 20u);
  std::set<std::size_t> seen(train.starts.begin(), train.starts.end());
  for (auto s : test.starts) EXPECT_TRUE(seen.insert(s).second);
  EXPECT_EQ(seen.size(), 100u);
  const auto again = split_train_test(w, 0.8, 1);
  EXPECT_EQ(again.first.starts, train.starts);
  EXPECT_NE(split_train_test(w, 0.8, 2).first.starts, train.starts);
  EXPECT_THROW(split_train_test(w, 1.0, 1), DomainError);
  EXPECT_THROW(split_train_test(w, 0.0, 1), DomainError);
}

TEST(SplitTest, FewShot) {
  Vector series(89);
  for (std::size_t i = 0; i < series.size(); ++i) series[i] = std::cos(0.3 * i);
  const auto w = make_windows(series, 6, 4);  // 80 windows
  const auto few = few_shot_subsample(w, 0.1, 5);
  EXPECT_EQ(few.size(), 8u);
  EXPECT_EQ(few_shot_subsample(w, 1.0, 5).size(), 80u);
  EXPECT_THROW(few_shot_subsample(w, 0.0, 5), DomainError);
}

TEST(PrepareTaskTest, FitsOnTrainingCoverage) {
  Vector series(300);
  for (std::size_t i = 0; i < series.size(); ++i) {
    series[i] = 5.0 + 2.0 * std::sin(0.2 * i) + 0.01 * i;
  }
  const auto task = prepare_task(series, 12, 4, 1, 0.8, 3);
  const auto raw_train =
      split_train_test(make_windows(series, 12, 4), 0.8, 3).first;
  const auto expected = zscore_fit(covered_values(series, raw_train));
  EXPECT_EQ(task.params.mu(), expected.mu());
  EXPECT_EQ(task.params.sigma(), expected.sigma());
  EXPECT_NEAR(task.train.inputs[0][0],
              (raw_train.inputs[0][0] - expected.mu()) / expected.sigma(), 1e-15);
}

// Index of the strongest nonzero frequency bin of a mean-removed series.
std::size_t dominant_bin(const Vector& x) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::size_t best = 1;
  double best_power = -1.0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    std::complex<double> acc;
    for (std::size_t t = 0; t < n; ++t) {
      acc += (x[t] - mean) *
             std::polar(1.0, -2.0 * std::numbers::pi * double(k * t) / double(n));
    }
    if (std::norm(acc) > best_power) {
      best_power = std::norm(acc);
      best = k;
    }
  }
  return best;
}

TEST(BenchmarkTasksTest, DeterministicAndDistinct) {
  BenchmarkSpec spec;
  spec.old_length = 1200;
  spec.new_length = 1200;
  const auto a = gen_benchmark_tasks(4, spec);
  const auto b = gen_benchmark_tasks(4, spec);
  EXPECT_EQ(a.old_task.values, b.old_task.values);
  EXPECT_EQ(a.new_task.values, b.new_task.values);
  EXPECT_NE(gen_benchmark_tasks(5, spec).new_task.values, a.new_task.values);
  // Old task peaks near period 24, new task near period 15.5.
  const double p_old = 1200.0 / double(dominant_bin(a.old_task.values));
  const double p_new = 1200.0 / double(dominant_bin(a.new_task.values));
  EXPECT_GT(p_old, 20.0);
  EXPECT_LT(p_new, 18.0);
  EXPECT_GT(p_old - p_new, 4.0);
}

TEST(BenchmarkTasksTest, NoiseFreeSeriesFollowsTheGenerator) {
  BenchmarkSpec spec;
  spec.old_length = 500;
  spec.new_length = 500;
  spec.noise_sigma = 0.0;
  const auto t = gen_benchmark_tasks(9, spec);
  std::map<std::string, double> p(t.parameters.begin(), t.parameters.end());
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < 500; ++i) {
    const double x = static_cast<double>(i);
    const double sq = std::fmod(x, p["new_square_period"]) < 0.5 * p["new_square_period"]
                          ? 1.0 : -1.0;
    EXPECT_NEAR(t.new_task.values[i],
                p["new_amplitude"] * std::sin(two_pi * x / p["new_period"] + p["new_phase"]) +
                    p["new_square_amplitude"] * sq,
                1e-12);
    EXPECT_NEAR(t.old_task.values[i],
                p["old_amplitude_1"] * std::sin(two_pi * x / p["old_period_1"] + p["old_phase_1"]) +
                    p["old_amplitude_2"] * std::sin(two_pi * x / p["old_period_2"] + p["old_phase_2"]) +
                    p["old_trend_rise"] * x / 500.0,
                1e-12);
  }
}

TEST(CsvTest, ParsesTimestampedColumns) {
  std::istringstream in("date,OT,load\n2020-01-01,1.5,2\n2020-01-02,-0.5,3e1\n");
  const auto s = parse_csv(in, "mem");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].name, "OT");
  EXPECT_EQ(s[0].values, (Vector{1.5, -0.5}));
  EXPECT_EQ(s[1].values, (Vector{2.0, 30.0}));
  EXPECT_EQ(s[1].variable_count, 2u);
}

TEST(CsvTest, DetectsTimestampByContent) {
  std::istringstream with_stamp("when,a\nmonday,1\ntuesday,2\n");
  EXPECT_EQ(parse_csv(with_stamp, "m").front().values, (Vector{1.0, 2.0}));
  std::istringstream numeric("a,b\n1,2\n3,4\n");
  const auto s = parse_csv(numeric, "m");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].values, (Vector{1.0, 3.0}));
}

TEST(CsvTest, ReportsMalformedInput) {
  auto fails = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      parse_csv(in, "bad.csv");
    } catch (const FormatError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  EXPECT_TRUE(fails("", "missing header"));
  EXPECT_TRUE(fails("date,a\n", "no data rows"));
  EXPECT_TRUE(fails("date,a\n2020,1\n2021,1,2\n", "bad.csv:3"));
  EXPECT_TRUE(fails("date,a\n2020,1\n2021,abc\n", "bad.csv:3"));
  EXPECT_TRUE(fails("date,a\n2020,nan\n", "not a finite number"));
  EXPECT_TRUE(fails("date\n2020\n", "no value columns"));
  EXPECT_THROW(load_csv("/nonexistent/file.csv"), FormatError);
}

}  // namespace
}  // namespace rtune
