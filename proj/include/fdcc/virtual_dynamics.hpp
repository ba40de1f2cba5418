#pragma once

#include "fdcc/common.hpp"
#include "fdcc/kinematics.hpp"

#include <optional>

namespace fdcc {

/// Mass properties assigned to the virtual model: the last link gets
/// (end_mass, end_inertia), every other link gets (link_mass, link_inertia).
struct InertiaOverrides {
  double end_mass = 1.0;
  Matrix3d end_inertia = Matrix3d::Identity();
  double link_mass = 0.01;
  Matrix3d link_inertia = 1e-6 * Matrix3d::Identity();
};

/// Simulated chain that the compliance controller drives with net wrenches.
class VirtualModel {
 public:
  /// `velocity_retention` scales the integrated joint velocity each cycle
  /// (1.0 keeps the pure double integrator).
  explicit VirtualModel(const KinematicChain& chain,
                        std::optional<InertiaOverrides> overrides = InertiaOverrides{},
                        double velocity_retention = 0.9);

  const KinematicChain& chain() const { return chain_; }
  int joint_count() const { return chain_.joint_count(); }
  double velocity_retention() const { return velocity_retention_; }

 private:
  KinematicChain chain_;
  double velocity_retention_;
};

/// Joint-space inertia via the composite-rigid-body recursion.
MatrixXd joint_space_inertia(const VirtualModel& model, const VectorXd& q);
MatrixXd joint_space_inertia(const KinematicChain& chain, const VectorXd& q);

/// q̈ = H(q)⁻¹ Jᵀ f. No gravity, Coriolis or joint torque terms.
/// Throws SingularityError when H cannot be factored or its condition
/// number exceeds 1e12.
VectorXd simplified_forward_dynamics(const VirtualModel& model, const VectorXd& q, const Wrench& f);

struct JointMotion {
  VectorXd q;
  VectorXd qdot;
};

/// Semi-implicit Euler: qdot' = retention·(qdot + qddot·dt), q' = q + qdot'·dt.
JointMotion integrate_step(const VectorXd& q, const VectorXd& qdot, const VectorXd& qddot, double dt,
                           double retention = 1.0);

}  // namespace fdcc
