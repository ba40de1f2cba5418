#include "fdcc/controller.hpp"

#include <cmath>
#include <numbers>

namespace fdcc {

namespace {

void require_non_negative(const Eigen::Ref<const VectorXd>& v, const std::string& field) {
  if (!v.allFinite() || (v.array() < 0.0).any()) {
    throw ContractError("compliance parameter '" + field + "' must be finite and non-negative");
  }
}

// Diagonal gain applied in the compliance frame, returned in base coordinates.
Vector3d apply_diagonal(const Vector3d& gain, const Vector3d& v, const Matrix3d& frame) {
  return frame * gain.cwiseProduct(frame.transpose() * v);
}

}  // namespace

void ComplianceParams::validate() const {
  require_non_negative(k_trans, "k_trans");
  require_non_negative(k_rot, "k_rot");
  require_non_negative(p_gains, "p_gains");
  require_non_negative(d_gains, "d_gains");
  require_non_negative(cartesian_damping, "cartesian_damping");
  if (!std::isfinite(derivative_cutoff_hz) || derivative_cutoff_hz < 0.0) {
    throw ContractError("compliance parameter 'derivative_cutoff_hz' must be non-negative");
  }
}

ControllerState ControllerState::from_plant(const VectorXd& plant_q, Mode mode) {
  require(plant_q.allFinite(), "plant configuration is not finite");
  ControllerState s;
  s.virtual_q = plant_q;
  s.virtual_qdot = VectorXd::Zero(plant_q.size());
  s.last_command.mode = mode;
  s.last_command.values = mode == Mode::Position ? plant_q : VectorXd::Zero(plant_q.size());
  return s;
}

Wrench net_force(const ControlTargets& targets, const Wrench& f_meas, const Pose& x, const Vector6d& xdot,
                 const ComplianceParams& params) {
  const Matrix3d frame = params.frame == ComplianceFrame::Tool ? x.rotation() : Matrix3d::Identity();
  const Vector3d dp = targets.x_d.position - x.position;
  const Vector3d dr = orientation_error(targets.x_d.orientation, x.orientation);
  const Vector6d dv = targets.xdot_d - xdot;

  Wrench out = targets.f_d - f_meas;
  out.force += apply_diagonal(params.k_trans, dp, frame);
  out.torque += apply_diagonal(params.k_rot, dr, frame);
  out.force += apply_diagonal(params.cartesian_damping.head<3>(), dv.head<3>(), frame);
  out.torque += apply_diagonal(params.cartesian_damping.tail<3>(), dv.tail<3>(), frame);
  return out;
}

Wrench pd_regulate(const Wrench& f_n, const Wrench& prev_f_n, const ComplianceParams& params, double dt) {
  require(dt > 0.0, "controller period must be positive");
  const Vector6d n = f_n.to_vector();
  const Vector6d rate = (n - prev_f_n.to_vector()) / dt;
  return Wrench::from_vector(params.p_gains.cwiseProduct(n) + params.d_gains.cwiseProduct(rate));
}

CycleResult control_cycle(const ControllerState& state, const Wrench& f_meas, const VectorXd& plant_q,
                          const ControlTargets& targets, const ComplianceParams& params,
                          const VirtualModel& model, Mode mode, double dt) {
  require(dt > 0.0, "controller period must be positive");
  require(f_meas.is_finite(), "measured wrench is not finite");
  require(plant_q.size() == model.joint_count(), "plant configuration has the wrong length");

  ControllerState s = state;
  if (s.cycle_count == 0 && s.virtual_q.size() == 0) s = ControllerState::from_plant(plant_q, mode);
  require(s.virtual_q.size() == model.joint_count(), "controller state has the wrong length");

  const Pose x = forward_kinematics(model.chain(), s.virtual_q);
  const Vector6d xdot = geometric_jacobian(model.chain(), s.virtual_q) * s.virtual_qdot;

  CycleResult r;
  r.net = net_force(targets, f_meas, x, xdot, params);
  const Wrench prev = s.cycle_count == 0 ? r.net : s.prev_f_n;

  if (params.derivative_cutoff_hz > 0.0) {
    const double tau = 1.0 / (2.0 * std::numbers::pi * params.derivative_cutoff_hz);
    const double alpha = dt / (tau + dt);
    const Vector6d raw = (r.net.to_vector() - prev.to_vector()) / dt;
    s.filtered_derivative += alpha * (raw - s.filtered_derivative);
    r.regulated = Wrench::from_vector(params.p_gains.cwiseProduct(r.net.to_vector()) +
                                      params.d_gains.cwiseProduct(s.filtered_derivative));
  } else {
    r.regulated = pd_regulate(r.net, prev, params, dt);
  }

  const VectorXd qddot = simplified_forward_dynamics(model, s.virtual_q, r.regulated);
  const JointMotion next = integrate_step(s.virtual_q, s.virtual_qdot, qddot, dt, model.velocity_retention());

  s.virtual_q = next.q;
  s.virtual_qdot = next.qdot;
  s.prev_f_n = r.net;
  s.cycle_count += 1;
  s.last_command.mode = mode;
  s.last_command.values = mode == Mode::Position ? next.q : next.qdot;

  r.command = s.last_command;
  r.state = std::move(s);
  return r;
}

ComplianceController::ComplianceController(VirtualModel model, ComplianceParams params, Mode mode, double dt)
    : model_(std::move(model)), params_(std::move(params)), mode_(mode), dt_(dt) {
  params_.validate();
  require(dt_ > 0.0, "controller period must be positive");
}

void ComplianceController::start(const VectorXd& plant_q) {
  require(plant_q.size() == model_.joint_count(), "plant configuration has the wrong length");
  state_ = ControllerState::from_plant(plant_q, mode_);
  faults_ = 0;
  last_error_.clear();
}

const JointCommand& ComplianceController::update(const Wrench& f_meas, const VectorXd& plant_q,
                                                 const ControlTargets& targets) {
  if (state_.virtual_q.size() == 0) start(plant_q);
  try {
    state_ = control_cycle(state_, f_meas, plant_q, targets, params_, model_, mode_, dt_).state;
  } catch (const SingularityError& e) {
    ++faults_;
    last_error_ = e.what();
    state_.cycle_count += 1;
  }
  return state_.last_command;
}

Pose ComplianceController::virtual_pose() const { return forward_kinematics(model_.chain(), state_.virtual_q); }

}  // namespace fdcc
