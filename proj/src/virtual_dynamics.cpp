#include "fdcc/virtual_dynamics.hpp"

#include <Eigen/Cholesky>

#include <sstream>

namespace fdcc {

namespace {

Matrix3d skew(const Vector3d& v) {
  Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Spatial inertia about the base origin, ordering [angular; linear].
Matrix6d spatial_inertia(double mass, const Vector3d& com, const Matrix3d& inertia_com) {
  const Matrix3d c = skew(com);
  Matrix6d m;
  m.topLeftCorner<3, 3>() = inertia_com + mass * c * c.transpose();
  m.topRightCorner<3, 3>() = mass * c;
  m.bottomLeftCorner<3, 3>() = mass * c.transpose();
  m.bottomRightCorner<3, 3>() = mass * Matrix3d::Identity();
  return m;
}

KinematicChain apply_overrides(const KinematicChain& chain, const InertiaOverrides& o) {
  std::vector<Link> links = chain.links();
  for (std::size_t i = 0; i < links.size(); ++i) {
    const bool last = i + 1 == links.size();
    links[i].mass = last ? o.end_mass : o.link_mass;
    links[i].inertia = last ? o.end_inertia : o.link_inertia;
  }
  return chain.with_links(std::move(links));
}

std::string describe(const VectorXd& q) {
  std::ostringstream os;
  os.precision(6);
  os << "[";
  for (Eigen::Index i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
  os << "]";
  return os.str();
}

}  // namespace

VirtualModel::VirtualModel(const KinematicChain& chain, std::optional<InertiaOverrides> overrides,
                           double velocity_retention)
    : chain_(overrides ? apply_overrides(chain, *overrides) : chain),
      velocity_retention_(velocity_retention) {
  require(velocity_retention > 0.0 && velocity_retention <= 1.0, "velocity retention must be in (0, 1]");
}

MatrixXd joint_space_inertia(const KinematicChain& chain, const VectorXd& q) {
  const ChainFrames frames = compute_frames(chain, q);
  const int n = chain.joint_count();

  // Composite inertias accumulated from the tip towards the base.
  std::vector<Matrix6d> composite(static_cast<std::size_t>(n));
  Matrix6d acc = Matrix6d::Zero();
  for (int i = n - 1; i >= 0; --i) {
    const Link& l = chain.link(i);
    const Eigen::Isometry3d& frame = frames.joints[static_cast<std::size_t>(i)];
    const Matrix3d r = frame.linear();
    acc += spatial_inertia(l.mass, frame * l.com_offset, r * l.inertia * r.transpose());
    composite[static_cast<std::size_t>(i)] = acc;
  }

  std::vector<Vector6d> motion(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Vector3d& z = frames.axes[static_cast<std::size_t>(i)];
    const Vector3d p = frames.joints[static_cast<std::size_t>(i)].translation();
    motion[static_cast<std::size_t>(i)] << z, p.cross(z);
  }

  MatrixXd h(n, n);
  for (int j = 0; j < n; ++j) {
    const Vector6d force = composite[static_cast<std::size_t>(j)] * motion[static_cast<std::size_t>(j)];
    for (int i = 0; i <= j; ++i) {
      h(i, j) = motion[static_cast<std::size_t>(i)].dot(force);
      h(j, i) = h(i, j);
    }
  }
  return h;
}

MatrixXd joint_space_inertia(const VirtualModel& model, const VectorXd& q) {
  return joint_space_inertia(model.chain(), q);
}

VectorXd simplified_forward_dynamics(const VirtualModel& model, const VectorXd& q, const Wrench& f) {
  require(f.is_finite(), "net wrench contains non-finite entries");
  const MatrixXd h = joint_space_inertia(model, q);
  const MatrixXd jac = geometric_jacobian(model.chain(), q);
  Eigen::LLT<MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw SingularityError("joint-space inertia is not positive definite at q = " + describe(q), q);
  }
  const double rcond = llt.rcond();
  if (!(rcond > 1e-12)) {
    throw SingularityError("joint-space inertia is ill-conditioned (rcond " + std::to_string(rcond) +
                               ") at q = " + describe(q),
                           q);
  }
  return llt.solve(jac.transpose() * f.to_vector());
}

JointMotion integrate_step(const VectorXd& q, const VectorXd& qdot, const VectorXd& qddot, double dt,
                           double retention) {
  require(dt > 0.0, "integration step must be positive");
  require(q.size() == qdot.size() && q.size() == qddot.size(), "joint vectors differ in length");
  require(q.allFinite() && qdot.allFinite() && qddot.allFinite(), "integrator input is not finite");
  JointMotion out;
  out.qdot = retention * (qdot + qddot * dt);
  out.q = q + out.qdot * dt;
  return out;
}

}  // namespace fdcc
