#pragma once

#include "fdcc/common.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fdcc {

/// One controller period. Wrenches are what the tool exerts on its
/// surroundings (the sensor convention): pushing down on a floor reads −z.
struct TraceSample {
  double time = 0.0;
  Wrench wrench_meas;
  Wrench wrench_true;
  Pose tip_pose;
  VectorXd command;
  VectorXd q;  // not part of the CSV schema
};

struct TimeSeriesTrace {
  Mode mode = Mode::Velocity;
  std::vector<TraceSample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::vector<double> times() const;
  std::vector<Vector3d> positions() const;
  std::vector<Vector3d> true_forces() const;
  std::vector<Vector3d> measured_forces() const;
};

/// Column names in file order for a trace with `joints` command entries.
std::vector<std::string> csv_header(int joints);

/// Writes the header row and one row per sample; numbers use 17 significant digits.
void write_csv(std::ostream& out, const TimeSeriesTrace& trace);
void write_csv_file(const std::string& path, const TimeSeriesTrace& trace);

/// Inverse of write_csv. Joint positions are not stored and come back empty.
TimeSeriesTrace read_csv(std::istream& in, const std::string& source = "<stream>");
TimeSeriesTrace read_csv_file(const std::string& path);

}  // namespace fdcc
