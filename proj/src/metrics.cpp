#include "fdcc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fdcc {

void SettleOptions::validate() const {
  require(onset_threshold > 0.0, "settle onset_threshold must be positive");
  require(band_fraction > 0.0 && band_fraction < 1.0, "settle band_fraction must lie in (0, 1)");
  require(dwell >= 0.0, "settle dwell must be non-negative");
  require(window_fraction > 0.0 && window_fraction <= 1.0, "settle window_fraction must lie in (0, 1]");
}

namespace {

void check_trace(const ForceTrace& t) {
  require(!t.time.empty(), "force trace is empty");
  require(t.time.size() == t.force.size(), "force trace columns differ in length");
  for (std::size_t i = 1; i < t.time.size(); ++i) {
    require(t.time[i] > t.time[i - 1], "force trace time is not strictly increasing");
  }
}

// First index of the trailing `fraction` of [begin, end).
std::size_t tail_start(std::size_t begin, std::size_t end, double fraction) {
  const std::size_t n = end - begin;
  const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))));
  return end - std::min(len, n);
}

}  // namespace

StepResponse analyse_step(const ForceTrace& trace, double f_target, const SettleOptions& opts) {
  check_trace(trace);
  opts.validate();
  const auto& f = trace.force;
  const auto& t = trace.time;
  const std::size_t n = f.size();

  std::size_t onset = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(f[i]) > opts.onset_threshold) {
      onset = i;
      break;
    }
  }
  if (onset == n) throw MetricError("no contact onset in force trace", f.back());

  StepResponse r;
  r.onset_time = t[onset];
  const std::size_t ss_begin = tail_start(onset, n, opts.window_fraction);
  r.steady_value = std::accumulate(f.begin() + static_cast<long>(ss_begin), f.end(), 0.0) /
                   static_cast<double>(n - ss_begin);

  const double band = opts.band_fraction * std::abs(r.steady_value);
  std::size_t settled = onset;
  for (std::size_t i = n; i-- > onset;) {
    if (std::abs(f[i] - r.steady_value) > band) {
      settled = i + 1;
      break;
    }
  }
  if (settled >= n || t.back() - t[settled] < opts.dwell) {
    throw MetricError("force never settles within the band for the dwell time", f.back());
  }
  r.settled_time = t[settled];
  r.settling_time = r.settled_time - r.onset_time;

  const std::size_t win = tail_start(settled, n, opts.window_fraction);
  std::vector<double> err;
  err.reserve(n - win);
  for (std::size_t i = win; i < n; ++i) err.push_back(f_target - f[i]);
  r.steady_state_error = rmse(err);

  double peak = f[onset];
  for (std::size_t i = onset; i < win; ++i) peak = std::max(peak, f[i]);
  r.overshoot = std::max(0.0, peak - r.steady_value);
  return r;
}

double compute_overshoot(const ForceTrace& trace, double f_target, const SettleOptions& opts) {
  return analyse_step(trace, f_target, opts).overshoot;
}

double compute_settling_time(const ForceTrace& trace, double f_target, const SettleOptions& opts) {
  return analyse_step(trace, f_target, opts).settling_time;
}

double compute_sse(const ForceTrace& trace, double f_target, const SettleOptions& opts) {
  return analyse_step(trace, f_target, opts).steady_state_error;
}

double rmse(const std::vector<double>& error) {
  require(!error.empty(), "rmse of an empty series");
  double acc = 0.0;
  for (double e : error) acc += e * e;
  return std::sqrt(acc / static_cast<double>(error.size()));
}

double cumulative_work(const std::vector<Vector3d>& positions, const std::vector<Vector3d>& forces) {
  require(!positions.empty(), "cumulative work of an empty trace");
  require(positions.size() == forces.size(), "position and force series differ in length");
  double w = 0.0;
  for (std::size_t k = 0; k + 1 < positions.size(); ++k) {
    const Vector3d f = 0.5 * (forces[k] + forces[k + 1]);
    w += std::abs(f.dot(positions[k + 1] - positions[k]));
  }
  return w;
}

Stats aggregate(const std::vector<double>& values) {
  Stats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    s.mean = values.front();
    return s;
  }
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace fdcc
