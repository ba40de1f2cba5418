#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fdcc {

using Vector3d = Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix3d = Eigen::Matrix3d;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;

/// Hardware command interface of the robot. Fixed for a control session.
enum class Mode { Position, Velocity };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& text);

/// Force (N) and torque (N·m) pair.
struct Wrench {
  Vector3d force = Vector3d::Zero();
  Vector3d torque = Vector3d::Zero();

  static Wrench zero() { return {}; }
  static Wrench from_vector(const Vector6d& v) {
    return {v.head<3>(), v.tail<3>()};
  }
  Vector6d to_vector() const {
    Vector6d v;
    v << force, torque;
    return v;
  }
  bool is_finite() const { return force.allFinite() && torque.allFinite(); }

  Wrench operator+(const Wrench& o) const { return {force + o.force, torque + o.torque}; }
  Wrench operator-(const Wrench& o) const { return {force - o.force, torque - o.torque}; }
  Wrench operator-() const { return {-force, -torque}; }
  Wrench operator*(double s) const { return {force * s, torque * s}; }
  bool operator==(const Wrench& o) const { return force == o.force && torque == o.torque; }
};

/// Position (m) and unit-quaternion orientation of a frame in the base frame.
struct Pose {
  Vector3d position = Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  static Pose from_isometry(const Eigen::Isometry3d& t);
  Eigen::Isometry3d to_isometry() const;
  Matrix3d rotation() const { return orientation.toRotationMatrix(); }
};

/// Violated precondition on an operation's inputs (dimension mismatch, non-finite data).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Joint-space inertia could not be factored at the given configuration.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, VectorXd q)
      : std::runtime_error(what), q_(std::move(q)) {}
  const VectorXd& configuration() const { return q_; }

 private:
  VectorXd q_;
};

/// The plant simulation reached a state it cannot continue from.
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message);

/// splitmix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);
/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace fdcc
