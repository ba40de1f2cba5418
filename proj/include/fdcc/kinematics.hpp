#pragma once

#include "fdcc/common.hpp"

#include <vector>

namespace fdcc {

/// One rigid link of a serial chain. The joint frame is the parent frame
/// composed with `parent_offset`; the joint rotates about `joint_axis`
/// expressed in that frame. Mass properties are given in the joint frame.
struct Link {
  Eigen::Isometry3d parent_offset = Eigen::Isometry3d::Identity();
  Vector3d joint_axis = Vector3d::UnitZ();
  double mass = 0.0;
  Matrix3d inertia = Matrix3d::Zero();  // about the centre of mass
  Vector3d com_offset = Vector3d::Zero();
};

/// Immutable serial chain of revolute joints ending in a tool tip.
class KinematicChain {
 public:
  KinematicChain(std::vector<Link> links, const Eigen::Isometry3d& tip_offset);

  int joint_count() const { return static_cast<int>(links_.size()); }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int i) const { return links_.at(static_cast<std::size_t>(i)); }
  const Eigen::Isometry3d& tip_offset() const { return tip_offset_; }

  /// Copy of this chain with the tip moved by `extra` in the current tip frame.
  KinematicChain with_tip_extension(const Eigen::Isometry3d& extra) const;
  /// Copy with replaced mass properties; geometry is unchanged.
  KinematicChain with_links(std::vector<Link> links) const;

 private:
  std::vector<Link> links_;
  Eigen::Isometry3d tip_offset_;
};

/// World-frame placement of every joint plus the tip for one configuration.
struct ChainFrames {
  std::vector<Eigen::Isometry3d> joints;  // joint frame after the joint rotation
  std::vector<Vector3d> axes;             // joint axis in base coordinates
  Eigen::Isometry3d tip = Eigen::Isometry3d::Identity();
};

ChainFrames compute_frames(const KinematicChain& chain, const VectorXd& q);

Pose forward_kinematics(const KinematicChain& chain, const VectorXd& q);

/// 6×n Jacobian mapping joint rates to the tip twist [v; ω] in base coordinates.
MatrixXd geometric_jacobian(const KinematicChain& chain, const VectorXd& q);

/// Rotation vector (axis·angle) of `target * current⁻¹`, angle in [0, π].
Vector3d orientation_error(const Eigen::Quaterniond& target, const Eigen::Quaterniond& current);

/// Axis-angle rotation helper; `axis` need not be normalised.
Matrix3d axis_rotation(const Vector3d& axis, double angle);

/// Roll-pitch-yaw (fixed-axis X then Y then Z) to rotation matrix.
Matrix3d rpy_to_matrix(double roll, double pitch, double yaw);

}  // namespace fdcc
