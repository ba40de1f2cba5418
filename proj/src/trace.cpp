#include "fdcc/trace.hpp"

#include "fdcc/ini.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fdcc {

std::vector<double> TimeSeriesTrace::times() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.time);
  return out;
}

std::vector<Vector3d> TimeSeriesTrace::positions() const {
  std::vector<Vector3d> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.tip_pose.position);
  return out;
}

std::vector<Vector3d> TimeSeriesTrace::true_forces() const {
  std::vector<Vector3d> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.wrench_true.force);
  return out;
}

std::vector<Vector3d> TimeSeriesTrace::measured_forces() const {
  std::vector<Vector3d> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.wrench_meas.force);
  return out;
}

std::vector<std::string> csv_header(int joints) {
  std::vector<std::string> h = {"time_s", "fx", "fy", "fz", "tx", "ty", "tz"};
  for (const char* c : {"fx", "fy", "fz", "tx", "ty", "tz"}) h.push_back(std::string(c) + "_true");
  for (const char* c : {"px", "py", "pz", "qw", "qx", "qy", "qz"}) h.emplace_back(c);
  for (int j = 0; j < joints; ++j) h.push_back("cmd_" + std::to_string(j));
  h.emplace_back("mode");
  return h;
}

namespace {

void put(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line += buf;
  line += ',';
}

}  // namespace

void write_csv(std::ostream& out, const TimeSeriesTrace& trace) {
  const int joints = trace.empty() ? 6 : static_cast<int>(trace.samples.front().command.size());
  const auto header = csv_header(joints);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  const std::string mode = to_string(trace.mode);
  std::string line;
  for (const TraceSample& s : trace.samples) {
    require(s.command.size() == joints, "trace command width changes between samples");
    line.clear();
    put(line, s.time);
    for (int i = 0; i < 3; ++i) put(line, s.wrench_meas.force[i]);
    for (int i = 0; i < 3; ++i) put(line, s.wrench_meas.torque[i]);
    for (int i = 0; i < 3; ++i) put(line, s.wrench_true.force[i]);
    for (int i = 0; i < 3; ++i) put(line, s.wrench_true.torque[i]);
    for (int i = 0; i < 3; ++i) put(line, s.tip_pose.position[i]);
    const auto& o = s.tip_pose.orientation;
    put(line, o.w());
    put(line, o.x());
    put(line, o.y());
    put(line, o.z());
    for (int j = 0; j < joints; ++j) put(line, s.command[j]);
    line += mode;
    line += '\n';
    out << line;
  }
}

void write_csv_file(const std::string& path, const TimeSeriesTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(out, trace);
  if (!out) throw std::runtime_error("error while writing '" + path + "'");
}

TimeSeriesTrace read_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ini::ParseError(source, 1, "missing header row");
  std::vector<std::string> cols;
  {
    std::istringstream hs(line);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(ini::trim(c));
  }
  const int joints = static_cast<int>(cols.size()) - 21;
  if (joints < 1 || cols != csv_header(joints)) throw ini::ParseError(source, 1, "unexpected CSV header");

  TimeSeriesTrace trace;
  int row = 1;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    if (ini::trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (cells.size() != cols.size()) throw ini::ParseError(source, row, "wrong number of fields");
    std::vector<double> v(cells.size() - 1);
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
      char* end = nullptr;
      v[i] = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0') {
        throw ini::ParseError(source, row, "field '" + cols[i] + "' is not a number");
      }
    }
    Mode mode;
    try {
      mode = mode_from_string(ini::trim(cells.back()));
    } catch (const ContractError& e) {
      throw ini::ParseError(source, row, e.what());
    }
    if (first) {
      trace.mode = mode;
      first = false;
    } else if (mode != trace.mode) {
      throw ini::ParseError(source, row, "mode changes within a trace");
    }
    TraceSample s;
    s.time = v[0];
    s.wrench_meas = Wrench{{v[1], v[2], v[3]}, {v[4], v[5], v[6]}};
    s.wrench_true = Wrench{{v[7], v[8], v[9]}, {v[10], v[11], v[12]}};
    s.tip_pose.position = Vector3d(v[13], v[14], v[15]);
    s.tip_pose.orientation = Eigen::Quaterniond(v[16], v[17], v[18], v[19]);
    s.command.resize(joints);
    for (int j = 0; j < joints; ++j) s.command[j] = v[20 + static_cast<std::size_t>(j)];
    trace.samples.push_back(std::move(s));
  }
  return trace;
}

TimeSeriesTrace read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in, path);
}

}  // namespace fdcc
