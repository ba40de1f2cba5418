#pragma once

#include "fdcc/controller.hpp"
#include "fdcc/kinematics.hpp"
#include "fdcc/metrics.hpp"
#include "fdcc/plant.hpp"
#include "fdcc/trace.hpp"
#include "fdcc/virtual_dynamics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fdcc {

enum class Experiment { CW, OS, SS, DH };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& text);

/// Travel profile of the DH/OS artefact in (s, h): s along the travel
/// direction from the start point, h up. Faces in order: lead-in, P1, P2,
/// P3, lead-out, extruded across the travel direction.
struct ProfileGeometry {
  double lead_back = 0.01;  // m of lead-in behind the start point
  double lead_in = 0.02;    // m from the start point to the foot of P1
  double p1_length = 0.02;  // horizontal extent of each face (m)
  double p2_length = 0.02;
  double p3_length = 0.02;
  double lead_out = 0.03;
  double p1_angle_deg = 30.0;
  double p2_angle_deg = 0.0;
  double p3_angle_deg = -30.0;
  double width = 0.04;

  void validate() const;
};

/// Contact-law parameters shared by every face of an artefact.
struct ContactParams {
  double stiffness = 1e5;
  double damping = 200.0;
  double friction = 0.3;
};

struct SsParams {
  Vector3d direction = -Vector3d::UnitZ();  // push direction in the base frame
  double force = 10.0;                      // N
  double gap = 0.005;                       // m between probe and surface at t = 0
};

struct DhParams {
  double force = 10.0;        // N along the face normal
  double speed = 0.001;       // m/s
  double preload_time = 5.0;  // s in place before the traverse starts
  double path_end = 0.1;      // m from A to B along the travel direction
};

struct OsParams {
  double speed = 0.005;     // m/s of the waypoint sequence
  double depth = 0.05;      // m the line AB runs below the lead-in face (sphere centre)
  double path_end = 0.1;    // m from A to B
  double marker_c = 0.02;   // m, s coordinate of marker C
  double marker_d = 0.08;   // m, s coordinate of marker D
  bool artefact = true;     // false runs the same waypoints in free space
};

enum class OperatorModel { Impedance, Force };

struct CwParams {
  OperatorModel operator_model = OperatorModel::Impedance;
  Vector3d axis = Vector3d::UnitX();        // A → B direction
  double stroke = 0.3;                      // m between markers A and B
  int cycles = 4;                           // back-and-forth motions per trial
  std::vector<double> stroke_times = {1.5};  // s per stroke; one entry per trial or one for all
  double dwell = 0.3;                       // s pause at each marker
  double hand_stiffness = 5000.0;           // N/m
  double hand_damping = 100.0;              // N·s/m
  double force_amplitude = 20.0;            // N peak of each pulse (force operator)
};

/// Everything needed to run one experiment in one interface mode.
struct ScenarioConfig {
  std::string id;
  std::string pair;  // scenarios sharing a pair are compared across modes
  Experiment experiment = Experiment::SS;
  Mode mode = Mode::Velocity;
  int trials = 1;
  double duration = 20.0;  // s
  double dt = 0.002;       // s, controller and plant period
  unsigned long long seed = 0;

  std::string chain_path;  // resolved path of the chain file
  double probe_length = 0.2;
  double tip_radius = 0.005;
  VectorXd home_q;

  ComplianceParams compliance;
  InertiaOverrides inertia;
  double velocity_retention = 0.96;
  ServoModel servo;
  ContactParams contact;
  SensorModel sensor;
  SettleOptions settle;
  ProfileGeometry profile;

  SsParams ss;
  DhParams dh;
  OsParams os;
  CwParams cw;

  /// Throws ContractError naming the offending field.
  void validate() const;
  /// Sensor seed of trial `k`; identical across the two modes of a pair.
  unsigned long long trial_seed(int k) const;
  std::size_t steps() const;
};

struct MetricsReport {
  std::string id;
  std::string pair;
  Experiment experiment = Experiment::SS;
  Mode mode = Mode::Velocity;
  std::string config_hash;
  int trials = 0;

  std::optional<Stats> overshoot;
  std::optional<Stats> settling_time;
  std::optional<Stats> steady_state_error;
  std::optional<Stats> total_rmse;
  std::optional<Stats> controller_rmse;
  std::optional<Stats> cumulative_work;
  std::optional<Stats> time_to_goal;
  std::optional<Stats> peak_force;
  std::optional<Stats> max_force_rate;
  std::optional<Stats> contact_losses;
  std::optional<Stats> path_error;

  std::vector<double> work_per_trial;
  std::vector<std::string> diagnostics;
  bool fault = false;

  struct Entry {
    std::string name;
    Stats value;
  };
  /// Populated metrics in a fixed order. All of them are lower-is-better.
  std::vector<Entry> entries() const;
};

struct ScenarioResult {
  std::vector<TimeSeriesTrace> traces;  // one per trial
  MetricsReport report;
};

/// Artefact placed for `cfg` relative to the home pose (empty for CW).
Artefact build_artefact(const ScenarioConfig& cfg);

/// Closed-loop run of a single trial; no metrics.
TimeSeriesTrace simulate_trial(const ScenarioConfig& cfg, int trial);

/// Per-experiment metric evaluation on finished traces. Pure: feeding back
/// traces read from CSV gives the same report.
MetricsReport evaluate(const ScenarioConfig& cfg, const std::vector<TimeSeriesTrace>& traces);

ScenarioResult run_cumulative_work(const ScenarioConfig& cfg);
ScenarioResult run_obstruction_stability(const ScenarioConfig& cfg);
ScenarioResult run_settle_stability(const ScenarioConfig& cfg);
ScenarioResult run_disturbance_handling(const ScenarioConfig& cfg);
/// Dispatches on cfg.experiment.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Work of the operator over one trace (true external force channel).
double cumulative_work(const TimeSeriesTrace& trace);

/// Sphere-centre offset curve of the DH/OS profile.
class TravelProfile {
 public:
  TravelProfile(const ProfileGeometry& g, const Vector3d& origin, const Vector3d& along, const Vector3d& up,
                double tip_radius);

  /// Height of the resting sphere centre above the lead-in face at `s`.
  double centre_height(double s) const;
  /// Outward unit normal (world frame) of the offset curve at `s`.
  Vector3d centre_normal(double s) const;
  /// Outward unit normal at the profile point nearest to `p` (world frame).
  Vector3d normal_near(const Vector3d& p) const;
  double s_of(const Vector3d& p) const;
  Vector3d world(double s, double h) const;
  double face_start(int face) const { return xs_.at(static_cast<std::size_t>(face)); }
  double face_end(int face) const { return xs_.at(static_cast<std::size_t>(face) + 1); }
  std::vector<ContactSurface> faces(const ContactParams& c) const;

 private:
  ProfileGeometry g_;
  Vector3d origin_, along_, up_, across_;
  double r_;
  std::vector<double> xs_, hs_;
};

/// The home tip pose of the rig described by `cfg`.
Pose home_pose(const ScenarioConfig& cfg);
KinematicChain load_rig_chain(const ScenarioConfig& cfg);

}  // namespace fdcc
