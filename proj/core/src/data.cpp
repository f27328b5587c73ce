// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include "rtune/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace rtune {

NormalizationParams zscore_fit(std::span<const double> train) {
  if (train.size() < 2) {
    throw DomainError("z-score fit needs at least two values");
  }
  const double n = static_cast<double>(train.size());
  const double mu = std::accumulate(train.begin(), train.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : train) ss += (v - mu) * (v - mu);
  const double sigma = std::sqrt(ss / n);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("z-score fit on a constant series (sigma = 0)");
  }
  return NormalizationParams(mu, sigma);
}

Vector zscore_apply(std::span<const double> x, const NormalizationParams& p) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - p.mu()) / p.sigma();
  return out;
}

Vector zscore_invert(std::span<const double> x, const NormalizationParams& p) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * p.sigma() + p.mu();
  return out;
}

void WindowedDataset::push_back(Vector input, Vector label, Origin origin,
                                std::size_t start) {
  if (input.size() != input_width || label.size() != horizon) {
    throw ShapeError("window does not match dataset geometry (" +
                     std::to_string(input_width) + ", " +
                     std::to_string(horizon) + ")");
  }
  inputs.push_back(std::move(input));
  labels.push_back(std::move(label));
  origins.push_back(origin);
  starts.push_back(start);
}

WindowedDataset WindowedDataset::subset(
    std::span<const std::size_t> rows) const {
  WindowedDataset out(input_width, horizon);
  out.inputs.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw ShapeError("subset row out of range");
    out.inputs.push_back(inputs[r]);
    out.labels.push_back(labels[r]);
    out.origins.push_back(origins[r]);
    out.starts.push_back(starts[r]);
  }
  return out;
}

std::size_t WindowedDataset::count(Origin origin) const {
  return static_cast<std::size_t>(
      std::count(origins.begin(), origins.end(), origin));
}

WindowedDataset make_windows(std::span<const double> series, std::size_t w,
                             std::size_t h, std::size_t stride) {
  if (w == 0 || h == 0 || stride == 0) {
    throw DomainError("window geometry and stride must be positive");
  }
  if (series.size() < w + h) {
    throw DomainError("series of length " + std::to_string(series.size()) +
                      " is shorter than W + H = " + std::to_string(w + h));
  }
  WindowedDataset out(w, h);
  for (std::size_t start = 0; start + w + h <= series.size(); start += stride) {
    const auto first = series.begin() + static_cast<std::ptrdiff_t>(start);
    out.push_back(Vector(first, first + static_cast<std::ptrdiff_t>(w)),
                  Vector(first + static_cast<std::ptrdiff_t>(w),
                         first + static_cast<std::ptrdiff_t>(w + h)),
                  Origin::kNew, start);
  }
  return out;
}

namespace {

std::vector<std::size_t> shuffled_rows(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  return rows;
}

std::size_t rounded_share(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

std::pair<WindowedDataset, WindowedDataset> split_train_test(
    const WindowedDataset& windows, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DomainError("train fraction must lie strictly between 0 and 1");
  }
  const std::size_t n_train = rounded_share(train_fraction, windows.size());
  if (n_train == 0 || n_train >= windows.size()) {
    throw DomainError("not enough windows for a non-empty train/test split");
  }
  const auto rows = shuffled_rows(windows.size(), seed);
  const std::span<const std::size_t> all(rows);
  return {windows.subset(all.first(n_train)),
          windows.subset(all.subspan(n_train))};
}

WindowedDataset few_shot_subsample(const WindowedDataset& train,
                                   double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError("few-shot fraction must lie in (0, 1]");
  }
  const std::size_t keep = rounded_share(fraction, train.size());
  if (keep == 0) throw DomainError("few-shot subsample is empty");
  const auto rows = shuffled_rows(train.size(), seed);
  return train.subset(std::span<const std::size_t>(rows).first(keep));
}

Vector covered_values(std::span<const double> series,
                      const WindowedDataset& windows) {
  std::vector<bool> covered(series.size(), false);
  const std::size_t span_len = windows.input_width + windows.horizon;
  for (std::size_t start : windows.starts) {
    if (start + span_len > series.size()) {
      throw ShapeError("window extends beyond the series");
    }
    std::fill_n(covered.begin() + static_cast<std::ptrdiff_t>(start), span_len,
                true);
  }
  Vector out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (covered[i]) out.push_back(series[i]);
  }
  return out;
}

WindowedDataset normalize(const WindowedDataset& windows,
                          const NormalizationParams& params) {
  WindowedDataset out = windows;
  for (auto& v : out.inputs) v = zscore_apply(v, params);
  for (auto& v : out.labels) v = zscore_apply(v, params);
  return out;
}

TaskData prepare_task(std::span<const double> series, std::size_t w,
                      std::size_t h, std::size_t stride, double train_fraction,
                      std::uint64_t seed) {
  auto [train, test] =
      split_train_test(make_windows(series, w, h, stride), train_fraction, seed);
  const auto params = zscore_fit(covered_values(series, train));
  return TaskData{normalize(train, params), normalize(test, params), params};
}

BenchmarkTasks gen_benchmark_tasks(std::uint64_t seed,
                                   const BenchmarkSpec& spec) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  BenchmarkTasks tasks;
  auto& p = tasks.parameters;

  const double period1 = uniform(22.0, 26.0);
  const double period2 = uniform(9.0, 11.0);
  const double amp1 = uniform(0.9, 1.1);
  const double amp2 = uniform(0.4, 0.6);
  const double phase1 = uniform(0.0, kTwoPi);
  const double phase2 = uniform(0.0, kTwoPi);
  const double rise = uniform(0.5, 1.0);
  p = {{"old_period_1", period1}, {"old_period_2", period2},
       {"old_amplitude_1", amp1}, {"old_amplitude_2", amp2},
       {"old_phase_1", phase1},   {"old_phase_2", phase2},
       {"old_trend_rise", rise}};

  const double period3 = uniform(14.0, 17.0);
  const double amp3 = uniform(0.9, 1.1);
  const double phase3 = uniform(0.0, kTwoPi);
  const double square_period = uniform(44.0, 52.0);
  const double square_amp = uniform(0.4, 0.6);
  p.insert(p.end(), {{"new_period", period3},
                     {"new_amplitude", amp3},
                     {"new_phase", phase3},
                     {"new_square_period", square_period},
                     {"new_square_amplitude", square_amp},
                     {"noise_sigma", spec.noise_sigma}});

  std::normal_distribution<double> noise(0.0, 1.0);
  auto draw_noise = [&]() {
    return spec.noise_sigma > 0.0 ? spec.noise_sigma * noise(rng) : 0.0;
  };

  tasks.old_task.name = "benchmark_old";
  tasks.old_task.frequency_label = "synthetic";
  tasks.old_task.values.resize(spec.old_length);
  const double n_old = static_cast<double>(spec.old_length);
  for (std::size_t i = 0; i < spec.old_length; ++i) {
    const double t = static_cast<double>(i);
    tasks.old_task.values[i] = amp1 * std::sin(kTwoPi * t / period1 + phase1) +
                               amp2 * std::sin(kTwoPi * t / period2 + phase2) +
                               rise * t / n_old + draw_noise();
  }

  tasks.new_task.name = "benchmark_new";
  tasks.new_task.frequency_label = "synthetic";
  tasks.new_task.values.resize(spec.new_length);
  for (std::size_t i = 0; i < spec.new_length; ++i) {
    const double t = static_cast<double>(i);
    const double square =
        std::fmod(t, square_period) < 0.5 * square_period ? 1.0 : -1.0;
    tasks.new_task.values[i] = amp3 * std::sin(kTwoPi * t / period3 + phase3) +
                               square_amp * square + draw_noise();
  }
  return tasks;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc{} && ptr == t.data() + t.size() && std::isfinite(out);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::vector<RawSeries> parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  // Header (skip leading blank lines).
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw FormatError(source + ": missing header row");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  const auto header = split_fields(line);
  const std::size_t n_cols = header.size();
  const std::string first_name = lower(trim(header.front()));
  bool timestamp = first_name == "date" || first_name == "time" ||
                   first_name == "timestamp" || first_name == "datetime";
  bool decided = timestamp;

  std::vector<Vector> columns;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != n_cols) {
      throw FormatError(source + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(n_cols) + " fields, found " +
                        std::to_string(fields.size()));
    }
    if (!decided) {
      double probe = 0.0;
      timestamp = !parse_double(fields.front(), probe);
      decided = true;
    }
    const std::size_t first_value = timestamp ? 1 : 0;
    if (first_value >= n_cols) {
      throw FormatError(source + ": no value columns besides the timestamp");
    }
    if (columns.empty()) columns.resize(n_cols - first_value);
    for (std::size_t c = first_value; c < n_cols; ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw FormatError(source + ":" + std::to_string(line_no) +
                          ": field '" + fields[c] + "' in column '" +
                          trim(header[c]) + "' is not a finite number");
      }
      columns[c - first_value].push_back(v);
    }
  }
  if (columns.empty()) throw FormatError(source + ": no data rows");

  std::vector<RawSeries> out;
  const std::size_t first_value = timestamp ? 1 : 0;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    RawSeries s;
    s.name = trim(header[c + first_value]);
    s.variable_count = columns.size();
    s.values = std::move(columns[c]);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<RawSeries> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

}  // namespace rtune
