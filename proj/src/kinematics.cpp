#include "fdcc/kinematics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace fdcc {

namespace {

void check_configuration(const KinematicChain& chain, const VectorXd& q) {
  if (q.size() != chain.joint_count()) {
    throw ContractError("configuration has " + std::to_string(q.size()) + " entries, chain has " +
                        std::to_string(chain.joint_count()) + " joints");
  }
  if (!q.allFinite()) throw ContractError("configuration contains non-finite entries");
}

bool is_finite(const Eigen::Isometry3d& t) { return t.matrix().allFinite(); }

}  // namespace

KinematicChain::KinematicChain(std::vector<Link> links, const Eigen::Isometry3d& tip_offset)
    : links_(std::move(links)), tip_offset_(tip_offset) {
  require(!links_.empty(), "kinematic chain needs at least one joint");
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    const std::string tag = "link " + std::to_string(i) + ": ";
    require(is_finite(l.parent_offset), tag + "parent offset is not finite");
    require(std::abs(l.joint_axis.norm() - 1.0) < 1e-9, tag + "joint axis must be unit norm");
    require(std::isfinite(l.mass) && l.mass >= 0.0, tag + "mass must be non-negative");
    require(l.com_offset.allFinite(), tag + "com offset is not finite");
    require((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() < 1e-12,
            tag + "inertia tensor must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix3d> eig(l.inertia, Eigen::EigenvaluesOnly);
    require(eig.eigenvalues().minCoeff() >= -1e-12, tag + "inertia tensor must be positive semi-definite");
  }
  require(is_finite(tip_offset_), "tip offset is not finite");
  require(tip_offset_.translation().norm() > 0.0, "tip offset (last link length) must be positive");
}

KinematicChain KinematicChain::with_tip_extension(const Eigen::Isometry3d& extra) const {
  return KinematicChain(links_, tip_offset_ * extra);
}

KinematicChain KinematicChain::with_links(std::vector<Link> links) const {
  require(links.size() == links_.size(), "replacement link list has the wrong length");
  for (std::size_t i = 0; i < links.size(); ++i) {
    links[i].parent_offset = links_[i].parent_offset;
    links[i].joint_axis = links_[i].joint_axis;
  }
  return KinematicChain(std::move(links), tip_offset_);
}

Matrix3d axis_rotation(const Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Matrix3d rpy_to_matrix(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vector3d::UnitZ()) * Eigen::AngleAxisd(pitch, Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Vector3d::UnitX()))
      .toRotationMatrix();
}

ChainFrames compute_frames(const KinematicChain& chain, const VectorXd& q) {
  check_configuration(chain, q);
  ChainFrames frames;
  const int n = chain.joint_count();
  frames.joints.reserve(static_cast<std::size_t>(n));
  frames.axes.reserve(static_cast<std::size_t>(n));
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (int i = 0; i < n; ++i) {
    const Link& l = chain.link(i);
    t = t * l.parent_offset;
    frames.axes.push_back(t.linear() * l.joint_axis);
    Eigen::Isometry3d joint = Eigen::Isometry3d::Identity();
    joint.linear() = axis_rotation(l.joint_axis, q[i]);
    t = t * joint;
    frames.joints.push_back(t);
  }
  frames.tip = t * chain.tip_offset();
  return frames;
}

Pose forward_kinematics(const KinematicChain& chain, const VectorXd& q) {
  return Pose::from_isometry(compute_frames(chain, q).tip);
}

MatrixXd geometric_jacobian(const KinematicChain& chain, const VectorXd& q) {
  const ChainFrames frames = compute_frames(chain, q);
  const int n = chain.joint_count();
  const Vector3d tip = frames.tip.translation();
  MatrixXd jac(6, n);
  for (int i = 0; i < n; ++i) {
    const Vector3d& z = frames.axes[static_cast<std::size_t>(i)];
    const Vector3d p = frames.joints[static_cast<std::size_t>(i)].translation();
    jac.block<3, 1>(0, i) = z.cross(tip - p);
    jac.block<3, 1>(3, i) = z;
  }
  return jac;
}

Vector3d orientation_error(const Eigen::Quaterniond& target, const Eigen::Quaterniond& current) {
  Eigen::Quaterniond rel = target.normalized() * current.normalized().conjugate();
  // shortest rotation
  if (rel.w() < 0.0) rel.coeffs() *= -1.0;
  const Vector3d v = rel.vec();
  const double s = v.norm();
  if (s == 0.0) return Vector3d::Zero();
  return v * (2.0 * std::atan2(s, rel.w()) / s);
}

}  // namespace fdcc
