#pragma once

#include "fdcc/common.hpp"
#include "fdcc/controller.hpp"
#include "fdcc/kinematics.hpp"

#include <string>
#include <vector>

namespace fdcc {

/// Low-level joint servo of the simulated robot.
///
/// Velocity interface: q̈ = bandwidth·(ω_cmd − q̇).
/// Position interface: q̈ = stiffness·(q_cmd − q) − damping·q̇.
/// Both are clamped to the velocity and acceleration limits.
struct ServoModel {
  Mode mode = Mode::Velocity;
  double velocity_bandwidth = 80.0;   // rad/s
  double position_stiffness = 400.0;  // 1/s², natural frequency 20 rad/s
  double position_damping = 48.0;     // 1/s, damping ratio 1.2
  double velocity_limit = 3.0;        // rad/s
  double acceleration_limit = 40.0;   // rad/s²

  static ServoModel from_natural_frequency(Mode mode, double bandwidth, double natural_frequency,
                                           double damping_ratio);
  void validate() const;
  /// Phase of the tracking transfer function at `frequency_hz`, in degrees (≤ 0).
  double phase_deg(double frequency_hz) const;
};

/// Planar convex polygon face with a penalty contact law.
struct ContactSurface {
  std::string id;
  Vector3d plane_point = Vector3d::Zero();
  Vector3d plane_normal = Vector3d::UnitZ();  // points out of the material
  std::vector<Vector3d> extent;               // polygon vertices, in the plane
  double stiffness_env = 1e5;                 // N/m
  double damping_env = 200.0;                 // N·s/m
  double friction_mu = 0.3;

  void validate() const;
  /// Whether the orthogonal projection of `p` lies inside the polygon.
  bool projects_inside(const Vector3d& p) const;
};

/// Connected set of faces forming one benchmark artefact.
class Artefact {
 public:
  Artefact() = default;
  explicit Artefact(std::vector<ContactSurface> surfaces);

  const std::vector<ContactSurface>& surfaces() const { return surfaces_; }
  bool empty() const { return surfaces_.empty(); }

  struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    Vector3d p0, p1;
    bool convex = false;
  };
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  std::vector<ContactSurface> surfaces_;
  std::vector<Edge> edges_;
};

struct ContactResult {
  Wrench wrench;  // acting on the tool, expressed at the tip centre
  double penetration = 0.0;
  Vector3d normal = Vector3d::Zero();
  int surface = -1;
  bool in_contact() const { return surface >= 0; }
};

/// Contact of a sphere of `tip_radius` centred at the tip with the artefact.
/// Normal: k·d + c·max(0, ḋ); tangential: regularised Coulomb.
ContactResult contact_wrench(const Pose& tip_pose, const Vector6d& tip_velocity, const Artefact& env,
                             double tip_radius = 0.005);

struct PlantState {
  VectorXd q;
  VectorXd qdot;
  Pose tip_pose;
  Vector6d tip_velocity = Vector6d::Zero();
  Wrench contact_wrench_true;
  int contact_surface = -1;
  double time = 0.0;
};

/// The real robot: servo-driven joints, a kinematic chain and a probe.
class Plant {
 public:
  Plant(KinematicChain chain, ServoModel servo, Artefact env, double tip_radius = 0.005, int substeps = 4);

  PlantState initial_state(const VectorXd& q) const;
  PlantState step(const PlantState& state, const JointCommand& cmd, double dt) const;

  const KinematicChain& chain() const { return chain_; }
  const ServoModel& servo() const { return servo_; }
  const Artefact& environment() const { return env_; }
  double tip_radius() const { return tip_radius_; }

 private:
  void refresh(PlantState& s) const;

  KinematicChain chain_;
  ServoModel servo_;
  Artefact env_;
  double tip_radius_;
  int substeps_;
};

PlantState step_plant(const PlantState& state, const JointCommand& cmd, const ServoModel& servo,
                      const Artefact& env, const KinematicChain& chain, double dt);

struct SensorModel {
  Vector3d force_noise_std = Vector3d::Zero();   // N
  Vector3d torque_noise_std = Vector3d::Zero();  // N·m
  Wrench bias;
  double sample_rate = 500.0;  // Hz
  unsigned long long seed = 0;

  void validate() const;
};

/// Force/torque sensor with zero-order hold and a seeded Gaussian noise stream.
class ForceSensor {
 public:
  explicit ForceSensor(SensorModel model);
  Wrench read(const Wrench& true_wrench, double time);
  const SensorModel& model() const { return model_; }

 private:
  SensorModel model_;
  long last_sample_ = -1;
  Wrench held_;
};

/// Stateless single reading: `true_wrench + bias + noise` for the sample that
/// contains `time`. Identical inputs give identical outputs.
Wrench read_sensor(const Wrench& true_wrench, const SensorModel& sensor, double time);

}  // namespace fdcc
