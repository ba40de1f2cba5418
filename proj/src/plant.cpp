#include "fdcc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace fdcc {

namespace {

constexpr double kFrictionRegularisation = 1e-4;  // m/s
constexpr double kDampingRamp = 1e-4;             // m of penetration before full damping
constexpr double kMaxFaceDepth = 0.02;            // beyond this a face is treated as behind the tip

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

long sample_index(double time, double rate) {
  return static_cast<long>(std::floor(time * rate + 1e-9));
}

Wrench noisy_sample(const Wrench& true_wrench, const SensorModel& m, long index) {
  Wrench out = true_wrench + m.bias;
  if ((m.force_noise_std.array() == 0.0).all() && (m.torque_noise_std.array() == 0.0).all()) return out;
  // independent stream per sample index
  std::mt19937_64 rng(splitmix64(m.seed ^ splitmix64(static_cast<std::uint64_t>(index))));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 3; ++i) out.force[i] += m.force_noise_std[i] * normal(rng);
  for (int i = 0; i < 3; ++i) out.torque[i] += m.torque_noise_std[i] * normal(rng);
  return out;
}

struct Hit {
  double depth = 0.0;
  Vector3d normal;
};

void add_contact(ContactResult& result, const Hit& hit, const ContactSurface& s, int index, double radius,
                 const Vector6d& tip_velocity) {
  const Vector3d& n = hit.normal;
  const Vector3d lever = -radius * n;
  const Vector3d v = tip_velocity.head<3>() + tip_velocity.tail<3>().cross(lever);
  const double approach = -v.dot(n);
  const double ramp = std::min(1.0, hit.depth / kDampingRamp);
  const double normal_force = s.stiffness_env * hit.depth + s.damping_env * ramp * std::max(0.0, approach);

  const Vector3d vt = v - v.dot(n) * n;
  const double speed = vt.norm();
  Vector3d friction = Vector3d::Zero();
  if (s.friction_mu > 0.0) {
    friction = speed > kFrictionRegularisation ? Vector3d(-s.friction_mu * normal_force * vt / speed)
                                               : Vector3d(-s.friction_mu * normal_force * vt / kFrictionRegularisation);
  }
  const Vector3d force = normal_force * n + friction;
  result.wrench.force += force;
  result.wrench.torque += lever.cross(force);
  if (hit.depth > result.penetration) {
    result.penetration = hit.depth;
    result.normal = n;
    result.surface = index;
  }
}

}  // namespace

ServoModel ServoModel::from_natural_frequency(Mode mode, double bandwidth, double natural_frequency,
                                              double damping_ratio) {
  ServoModel s;
  s.mode = mode;
  s.velocity_bandwidth = bandwidth;
  s.position_stiffness = natural_frequency * natural_frequency;
  s.position_damping = 2.0 * damping_ratio * natural_frequency;
  return s;
}

void ServoModel::validate() const {
  require(velocity_bandwidth > 0.0, "servo velocity_bandwidth must be positive");
  require(position_stiffness > 0.0, "servo position_stiffness must be positive");
  require(position_damping > 0.0, "servo position_damping must be positive");
  require(velocity_limit > 0.0, "servo velocity_limit must be positive");
  require(acceleration_limit > 0.0, "servo acceleration_limit must be positive");
}

double ServoModel::phase_deg(double frequency_hz) const {
  const double w = 2.0 * std::numbers::pi * frequency_hz;
  const double rad = mode == Mode::Velocity ? -std::atan2(w, velocity_bandwidth)
                                            : -std::atan2(position_damping * w, position_stiffness - w * w);
  return rad * 180.0 / std::numbers::pi;
}

void ContactSurface::validate() const {
  const std::string tag = "surface '" + id + "': ";
  require(std::abs(plane_normal.norm() - 1.0) < 1e-9, tag + "normal must be unit norm");
  require(stiffness_env > 0.0, tag + "stiffness must be positive");
  require(damping_env >= 0.0, tag + "damping must be non-negative");
  require(friction_mu >= 0.0, tag + "friction coefficient must be non-negative");
  require(extent.size() >= 3, tag + "extent needs at least three vertices");
  for (const Vector3d& v : extent) {
    require(std::abs((v - plane_point).dot(plane_normal)) < 1e-9, tag + "extent vertex off the plane");
  }
}

bool ContactSurface::projects_inside(const Vector3d& p) const {
  const std::size_t m = extent.size();
  Vector3d centroid = Vector3d::Zero();
  for (const Vector3d& v : extent) centroid += v;
  centroid /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vector3d& a = extent[i];
    const Vector3d& b = extent[(i + 1) % m];
    const Vector3d inward = plane_normal.cross(b - a);
    const double side = (centroid - a).dot(inward) >= 0.0 ? 1.0 : -1.0;
    if (side * (p - a).dot(inward) < 0.0) return false;
  }
  return true;
}

Artefact::Artefact(std::vector<ContactSurface> surfaces) : surfaces_(std::move(surfaces)) {
  for (const ContactSurface& s : surfaces_) s.validate();
  // consecutive faces must share an edge
  for (std::size_t i = 0; i + 1 < surfaces_.size(); ++i) {
    const ContactSurface& a = surfaces_[i];
    const ContactSurface& b = surfaces_[i + 1];
    std::vector<Vector3d> shared;
    for (const Vector3d& va : a.extent) {
      for (const Vector3d& vb : b.extent) {
        if ((va - vb).norm() < 1e-6) shared.push_back(va);
      }
    }
    require(shared.size() >= 2, "surfaces '" + a.id + "' and '" + b.id + "' do not share an edge");
    Vector3d cb = Vector3d::Zero();
    for (const Vector3d& v : b.extent) cb += v;
    cb /= static_cast<double>(b.extent.size());
    Edge e;
    e.a = i;
    e.b = i + 1;
    e.p0 = shared[0];
    e.p1 = shared[1];
    e.convex = (cb - a.plane_point).dot(a.plane_normal) < -1e-12;
    edges_.push_back(e);
  }
}

ContactResult contact_wrench(const Pose& tip_pose, const Vector6d& tip_velocity, const Artefact& env,
                             double tip_radius) {
  ContactResult result;
  const Vector3d& c = tip_pose.position;
  const auto& surfaces = env.surfaces();
  std::vector<char> inside(surfaces.size());
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const ContactSurface& s = surfaces[i];
    inside[i] = s.projects_inside(c);
    if (!inside[i]) continue;
    const double dist = (c - s.plane_point).dot(s.plane_normal);
    if (dist >= tip_radius || dist < -kMaxFaceDepth) continue;
    add_contact(result, Hit{tip_radius - dist, s.plane_normal}, s, static_cast<int>(i), tip_radius, tip_velocity);
  }
  // Convex edges own the wedge where the tip projects onto neither face.
  for (const Artefact::Edge& e : env.edges()) {
    if (!e.convex || inside[e.a] || inside[e.b]) continue;
    const Vector3d axis = e.p1 - e.p0;
    const double t = (c - e.p0).dot(axis) / axis.squaredNorm();
    if (t <= 0.0 || t >= 1.0) continue;
    const Vector3d closest = e.p0 + t * axis;
    const Vector3d offset = c - closest;
    const double dist = offset.norm();
    if (dist >= tip_radius || dist == 0.0) continue;
    const Vector3d n = offset / dist;
    if (n.dot(surfaces[e.a].plane_normal) < 0.0 || n.dot(surfaces[e.b].plane_normal) < 0.0) continue;
    add_contact(result, Hit{tip_radius - dist, n}, surfaces[e.a], static_cast<int>(e.a), tip_radius,
                tip_velocity);
  }
  return result;
}

Plant::Plant(KinematicChain chain, ServoModel servo, Artefact env, double tip_radius, int substeps)
    : chain_(std::move(chain)), servo_(servo), env_(std::move(env)), tip_radius_(tip_radius),
      substeps_(substeps) {
  servo_.validate();
  require(tip_radius_ > 0.0, "tip radius must be positive");
  require(substeps_ >= 1, "plant needs at least one sub-step");
}

void Plant::refresh(PlantState& s) const {
  const ChainFrames frames = compute_frames(chain_, s.q);
  s.tip_pose = Pose::from_isometry(frames.tip);
  s.tip_velocity = geometric_jacobian(chain_, s.q) * s.qdot;
  const ContactResult c = contact_wrench(s.tip_pose, s.tip_velocity, env_, tip_radius_);
  s.contact_wrench_true = c.wrench;
  s.contact_surface = c.surface;
}

PlantState Plant::initial_state(const VectorXd& q) const {
  require(q.size() == chain_.joint_count(), "initial configuration has the wrong length");
  PlantState s;
  s.q = q;
  s.qdot = VectorXd::Zero(q.size());
  refresh(s);
  return s;
}

PlantState Plant::step(const PlantState& state, const JointCommand& cmd, double dt) const {
  require(dt > 0.0, "plant step must be positive");
  require(cmd.mode == servo_.mode, "command mode does not match the servo interface");
  require(cmd.values.size() == state.q.size(), "command has the wrong length");
  if (!cmd.values.allFinite()) {
    throw SimulationFault("non-finite joint command at t = " + std::to_string(state.time));
  }
  PlantState s = state;
  const double h = dt / substeps_;
  const Eigen::Index n = s.q.size();
  for (int k = 0; k < substeps_; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = servo_.mode == Mode::Velocity
                       ? servo_.velocity_bandwidth * (cmd.values[j] - s.qdot[j])
                       : servo_.position_stiffness * (cmd.values[j] - s.q[j]) - servo_.position_damping * s.qdot[j];
      acc = clamp_abs(acc, servo_.acceleration_limit);
      s.qdot[j] = clamp_abs(s.qdot[j] + acc * h, servo_.velocity_limit);
      s.q[j] += s.qdot[j] * h;
    }
  }
  s.time = state.time + dt;
  refresh(s);
  return s;
}

PlantState step_plant(const PlantState& state, const JointCommand& cmd, const ServoModel& servo,
                      const Artefact& env, const KinematicChain& chain, double dt) {
  return Plant(chain, servo, env).step(state, cmd, dt);
}

void SensorModel::validate() const {
  require(force_noise_std.allFinite() && (force_noise_std.array() >= 0.0).all(), "sensor force noise must be >= 0");
  require(torque_noise_std.allFinite() && (torque_noise_std.array() >= 0.0).all(), "sensor torque noise must be >= 0");
  require(bias.is_finite(), "sensor bias must be finite");
  require(sample_rate > 0.0, "sensor sample rate must be positive");
}

ForceSensor::ForceSensor(SensorModel model) : model_(std::move(model)) { model_.validate(); }

Wrench ForceSensor::read(const Wrench& true_wrench, double time) {
  const long index = sample_index(time, model_.sample_rate);
  if (index != last_sample_) {
    held_ = noisy_sample(true_wrench, model_, index);
    last_sample_ = index;
  }
  return held_;
}

Wrench read_sensor(const Wrench& true_wrench, const SensorModel& sensor, double time) {
  return noisy_sample(true_wrench, sensor, sample_index(time, sensor.sample_rate));
}

}  // namespace fdcc
