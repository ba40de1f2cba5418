#pragma once

#include "fdcc/common.hpp"
#include "fdcc/virtual_dynamics.hpp"

#include <string>

namespace fdcc {

enum class ComplianceFrame { Base, Tool };

/// Stiffness, regulator gains and optional Cartesian damping.
struct ComplianceParams {
  Vector3d k_trans = Vector3d::Zero();  // N/m
  Vector3d k_rot = Vector3d::Zero();    // N·m/rad
  Vector6d p_gains = Vector6d::Zero();
  Vector6d d_gains = Vector6d::Zero();
  Vector6d cartesian_damping = Vector6d::Zero();
  /// Single-pole low-pass on the regulator derivative; 0 disables it.
  double derivative_cutoff_hz = 0.0;
  ComplianceFrame frame = ComplianceFrame::Base;

  /// Throws ContractError naming the offending field.
  void validate() const;
};

struct ControlTargets {
  Pose x_d;
  Vector6d xdot_d = Vector6d::Zero();
  Wrench f_d;
};

struct JointCommand {
  Mode mode = Mode::Velocity;
  VectorXd values;
};

struct ControllerState {
  VectorXd virtual_q;
  VectorXd virtual_qdot;
  Wrench prev_f_n;
  Vector6d filtered_derivative = Vector6d::Zero();
  long cycle_count = 0;
  JointCommand last_command;

  /// Session start: the virtual model sits at the measured plant configuration.
  static ControllerState from_plant(const VectorXd& plant_q, Mode mode);
};

/// f^n = f_d − f + K·(x_d ⊖ x) + D·(ẋ_d − ẋ). The orientation part of the
/// pose error is the rotation vector of x_d relative to x.
Wrench net_force(const ControlTargets& targets, const Wrench& f_meas, const Pose& x, const Vector6d& xdot,
                 const ComplianceParams& params);

/// f^c = P·f^n + D·(f^n − prev_f_n)/dt with diagonal gains.
Wrench pd_regulate(const Wrench& f_n, const Wrench& prev_f_n, const ComplianceParams& params, double dt);

struct CycleResult {
  ControllerState state;
  JointCommand command;
  Wrench net;        // f^n
  Wrench regulated;  // f^c
};

/// One controller period: FK of the virtual model, net force, PD regulation,
/// simplified forward dynamics and integration. Throws SingularityError.
CycleResult control_cycle(const ControllerState& state, const Wrench& f_meas, const VectorXd& plant_q,
                          const ControlTargets& targets, const ComplianceParams& params,
                          const VirtualModel& model, Mode mode, double dt);

/// A control session owning its state. Solver failures hold the previous command.
class ComplianceController {
 public:
  ComplianceController(VirtualModel model, ComplianceParams params, Mode mode, double dt);

  void start(const VectorXd& plant_q);
  const JointCommand& update(const Wrench& f_meas, const VectorXd& plant_q, const ControlTargets& targets);

  const ControllerState& state() const { return state_; }
  const VirtualModel& model() const { return model_; }
  const ComplianceParams& params() const { return params_; }
  Mode mode() const { return mode_; }
  double dt() const { return dt_; }
  Pose virtual_pose() const;
  long fault_count() const { return faults_; }
  const std::string& last_error() const { return last_error_; }

 private:
  VirtualModel model_;
  ComplianceParams params_;
  Mode mode_;
  double dt_;
  ControllerState state_;
  long faults_ = 0;
  std::string last_error_;
};

}  // namespace fdcc
