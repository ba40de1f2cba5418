#pragma once

#include "fdcc/common.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace fdcc {

/// A metric could not be evaluated on the given trace. `last_value` is the
/// final sample of the signal the metric was computed from.
class MetricError : public std::runtime_error {
 public:
  MetricError(const std::string& what, double last_value)
      : std::runtime_error(what), last_value_(last_value) {}
  double last_value() const { return last_value_; }

 private:
  double last_value_;
};

/// Knobs of the step-response analysis.
struct SettleOptions {
  double onset_threshold = 0.5;   // N; first sample above this marks contact
  double band_fraction = 0.05;    // settling band relative to the steady value
  double dwell = 1.0;             // s the signal must stay inside the band
  double window_fraction = 0.25;  // tail fraction used for the steady value / error window

  void validate() const;
};

/// Scalar force trace sampled at fixed period. `time` must be strictly increasing.
struct ForceTrace {
  std::vector<double> time;
  std::vector<double> force;
};

struct StepResponse {
  double onset_time = 0.0;     // s, absolute
  double settled_time = 0.0;   // s, absolute start of the final in-band stretch
  double steady_value = 0.0;   // N, mean over the final window after onset
  double settling_time = 0.0;  // s, settled_time − onset_time
  double overshoot = 0.0;      // N
  double steady_state_error = 0.0;  // N, RMSE against the target in the post-settling window
};

/// Full step-response analysis. Throws MetricError if there is no onset or
/// the trace never settles for the dwell time.
StepResponse analyse_step(const ForceTrace& trace, double f_target, const SettleOptions& opts = {});

double compute_overshoot(const ForceTrace& trace, double f_target, const SettleOptions& opts = {});
double compute_settling_time(const ForceTrace& trace, double f_target, const SettleOptions& opts = {});
double compute_sse(const ForceTrace& trace, double f_target, const SettleOptions& opts = {});

double rmse(const std::vector<double>& error);

/// W = Σ |½(F_k + F_{k+1}) · (x_{k+1} − x_k)|.
double cumulative_work(const std::vector<Vector3d>& positions, const std::vector<Vector3d>& forces);

struct Stats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
  int count = 0;
};

Stats aggregate(const std::vector<double>& values);

}  // namespace fdcc
