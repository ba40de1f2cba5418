#pragma once
// Shared oracles and generators for the test binaries.

#include "fdcc/chain_file.hpp"
#include "fdcc/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#ifndef FDCC_CONFIG_DIR
#define FDCC_CONFIG_DIR "config"
#endif

namespace fdcc::test {

inline std::string config_path(const std::string& name) { return std::string(FDCC_CONFIG_DIR) + "/" + name; }

inline KinematicChain ur10e() { return load_chain(config_path("ur10e.chain")); }

inline VectorXd home_q() {
  const double pi = std::numbers::pi;
  VectorXd q(6);
  q << 0.0, -pi / 2, pi / 2, -pi / 2, -pi / 2, 0.0;
  return q;
}

/// Deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng_); }
  VectorXd vec(int n, double lo, double hi) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  Vector3d unit() {
    Vector3d v;
    do {
      v = Vector3d(normal(), normal(), normal());
    } while (v.norm() < 1e-3);
    return v.normalized();
  }
  Eigen::Quaterniond rotation() {
    Eigen::Quaterniond q(normal(), normal(), normal(), normal());
    return q.normalized();
  }
  Pose pose(double reach = 1.0) { return {vec(3, -reach, reach), rotation()}; }
  Wrench wrench(double scale) { return {vec(3, -scale, scale), vec(3, -scale, scale)}; }
  /// Random serial chain with random axes, offsets and mass properties.
  KinematicChain chain(int joints) {
    std::vector<Link> links;
    for (int i = 0; i < joints; ++i) {
      Link l;
      l.parent_offset = make_transform(vec(3, -0.4, 0.4), vec(3, -3.0, 3.0));
      l.joint_axis = unit();
      l.mass = uniform(0.2, 5.0);
      const Vector3d d = vec(3, 0.01, 0.3);
      const Matrix3d r = rotation().toRotationMatrix();
      l.inertia = r * d.asDiagonal() * r.transpose();
      l.com_offset = vec(3, -0.2, 0.2);
      links.push_back(l);
    }
    return KinematicChain(links, make_transform(vec(3, -0.2, 0.2), vec(3, -1.0, 1.0)));
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Tip transform as a plain product of 4×4 homogeneous matrices.
inline Eigen::Matrix4d naive_fk(const KinematicChain& chain, const VectorXd& q) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int i = 0; i < chain.joint_count(); ++i) {
    const Link& l = chain.link(i);
    Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
    rot.topLeftCorner<3, 3>() = Eigen::AngleAxisd(q[i], l.joint_axis.normalized()).toRotationMatrix();
    t = t * l.parent_offset.matrix() * rot;
  }
  return t * chain.tip_offset().matrix();
}

/// H(q) column by column: Newton–Euler inverse dynamics at rest with q̈ = e_k
/// (no gravity). Velocity terms vanish at rest, so only the acceleration
/// propagation and the force recursion remain.
inline MatrixXd rnea_inertia(const KinematicChain& chain, const VectorXd& q) {
  const int n = chain.joint_count();
  std::vector<Vector3d> z(n), p(n), c(n);
  std::vector<Matrix3d> inertia(n);
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int i = 0; i < n; ++i) {
    const Link& l = chain.link(i);
    t = t * l.parent_offset.matrix();
    const Matrix3d r_before = t.topLeftCorner<3, 3>();
    z[i] = r_before * l.joint_axis.normalized();
    Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
    rot.topLeftCorner<3, 3>() = Eigen::AngleAxisd(q[i], l.joint_axis.normalized()).toRotationMatrix();
    t = t * rot;
    const Matrix3d r = t.topLeftCorner<3, 3>();
    p[i] = t.topRightCorner<3, 1>();
    c[i] = p[i] + r * l.com_offset;
    inertia[i] = r * l.inertia * r.transpose();
  }
  MatrixXd h(n, n);
  for (int k = 0; k < n; ++k) {
    // Forward: accelerations of each body under q̈ = e_k.
    std::vector<Vector3d> alpha(n, Vector3d::Zero()), acc(n, Vector3d::Zero());
    for (int i = k; i < n; ++i) {
      alpha[i] = z[k];
      acc[i] = z[k].cross(c[i] - p[k]);
    }
    // Backward: torque at joint j from every body outboard of it.
    for (int j = 0; j < n; ++j) {
      Vector3d mj = Vector3d::Zero();
      for (int i = j; i < n; ++i) {
        mj += inertia[i] * alpha[i] + (c[i] - p[j]).cross(chain.link(i).mass * acc[i]);
      }
      h(j, k) = z[j].dot(mj);
    }
  }
  return h;
}

}  // namespace fdcc::test
