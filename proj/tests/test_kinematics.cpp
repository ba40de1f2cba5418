#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fdcc/chain_file.hpp"
#include "fdcc/ini.hpp"
#include "fdcc/kinematics.hpp"
#include "support.hpp"

using namespace fdcc;
using fdcc::test::Gen;

namespace {

KinematicChain planar_arm(double length) {
  Link l;
  return KinematicChain({l}, make_transform(Vector3d(length, 0, 0), Vector3d::Zero()));
}

double pose_distance(const Pose& a, const Eigen::Matrix4d& b) {
  const double dp = (a.position - b.topRightCorner<3, 1>()).cwiseAbs().maxCoeff();
  const double dr = (a.rotation() - b.topLeftCorner<3, 3>()).cwiseAbs().maxCoeff();
  return std::max(dp, dr);
}

}  // namespace

TEST_CASE("zero configuration composes the static offsets") {
  const KinematicChain chain = test::ur10e();
  Eigen::Isometry3d expected = Eigen::Isometry3d::Identity();
  for (const Link& l : chain.links()) expected = expected * l.parent_offset;
  expected = expected * chain.tip_offset();
  const Pose p = forward_kinematics(chain, VectorXd::Zero(6));
  CHECK(pose_distance(p, expected.matrix()) < 1e-12);
}

TEST_CASE("single link rotated a quarter turn points along y") {
  const double L = 0.7;
  const Pose p = forward_kinematics(planar_arm(L), VectorXd::Constant(1, std::numbers::pi / 2));
  CHECK(p.position.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.position.y() == doctest::Approx(L));
  CHECK(p.position.z() == doctest::Approx(0.0));
}

TEST_CASE("forward kinematics matches a plain matrix product") {
  Gen g(11);
  const KinematicChain ur = test::ur10e();
  for (int i = 0; i < 200; ++i) {
    const VectorXd q = g.vec(6, -2 * std::numbers::pi, 2 * std::numbers::pi);
    CHECK(pose_distance(forward_kinematics(ur, q), test::naive_fk(ur, q)) < 1e-10);
  }
  for (int i = 0; i < 200; ++i) {
    const KinematicChain c = g.chain(g.integer(1, 8));
    const VectorXd q = g.vec(c.joint_count(), -4.0, 4.0);
    CHECK(pose_distance(forward_kinematics(c, q), test::naive_fk(c, q)) < 1e-10);
  }
}

TEST_CASE("planar jacobian has the textbook columns") {
  const double L = 0.5;
  for (double th : {0.0, 0.3, 1.2, -2.0}) {
    const MatrixXd j = geometric_jacobian(planar_arm(L), VectorXd::Constant(1, th));
    CHECK(j(0, 0) == doctest::Approx(-L * std::sin(th)));
    CHECK(j(1, 0) == doctest::Approx(L * std::cos(th)));
    CHECK(j(2, 0) == doctest::Approx(0.0));
    CHECK(j.block<3, 1>(3, 0).isApprox(Vector3d::UnitZ()));
  }
}

TEST_CASE("jacobian times zero rates is zero") {
  Gen g(3);
  const MatrixXd j = geometric_jacobian(test::ur10e(), g.vec(6, -3, 3));
  CHECK((j * VectorXd::Zero(6)).norm() == 0.0);
}

TEST_CASE("property: translational jacobian equals central differences") {
  Gen g(5);
  const double h = 1e-6;
  for (int trial = 0; trial < 300; ++trial) {
    const KinematicChain c = trial % 2 ? test::ur10e() : g.chain(g.integer(1, 7));
    const VectorXd q = g.vec(c.joint_count(), -3.2, 3.2);
    const MatrixXd j = geometric_jacobian(c, q);
    for (int k = 0; k < c.joint_count(); ++k) {
      VectorXd qp = q, qm = q;
      qp[k] += h;
      qm[k] -= h;
      const Vector3d fd = (forward_kinematics(c, qp).position - forward_kinematics(c, qm).position) / (2 * h);
      REQUIRE((j.block<3, 1>(0, k) - fd).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("property: rotational jacobian equals the differentiated orientation") {
  Gen g(6);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const KinematicChain c = g.chain(g.integer(1, 6));
    const VectorXd q = g.vec(c.joint_count(), -3.0, 3.0);
    const MatrixXd j = geometric_jacobian(c, q);
    for (int k = 0; k < c.joint_count(); ++k) {
      VectorXd qp = q, qm = q;
      qp[k] += h;
      qm[k] -= h;
      const Vector3d w =
          orientation_error(forward_kinematics(c, qp).orientation, forward_kinematics(c, qm).orientation) / (2 * h);
      REQUIRE((j.block<3, 1>(3, k) - w).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("property: forward kinematics is 2π periodic in every joint") {
  Gen g(7);
  const KinematicChain ur = test::ur10e();
  for (int trial = 0; trial < 200; ++trial) {
    const VectorXd q = g.vec(6, -3, 3);
    const Pose a = forward_kinematics(ur, q);
    VectorXd q2 = q;
    q2[g.integer(0, 5)] += 2 * std::numbers::pi * (g.integer(0, 1) ? 1 : -1);
    const Pose b = forward_kinematics(ur, q2);
    CHECK((a.position - b.position).norm() < 1e-9);
    CHECK(a.orientation.angularDistance(b.orientation) < 1e-9);
  }
}

TEST_CASE("property: orientation output stays unit norm") {
  Gen g(8);
  const KinematicChain ur = test::ur10e();
  double worst = 0.0;
  for (int trial = 0; trial < 1'000'000; ++trial) {
    const VectorXd q = g.vec(6, -100, 100);
    worst = std::max(worst, std::abs(forward_kinematics(ur, q).orientation.norm() - 1.0));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("dimension and finiteness are checked") {
  const KinematicChain ur = test::ur10e();
  CHECK_THROWS_AS(forward_kinematics(ur, VectorXd::Zero(5)), ContractError);
  CHECK_THROWS_AS(geometric_jacobian(ur, VectorXd::Zero(7)), ContractError);
  VectorXd q = VectorXd::Zero(6);
  q[2] = std::nan("");
  CHECK_THROWS_AS(forward_kinematics(ur, q), ContractError);
}

TEST_CASE("chain invariants are enforced") {
  Link l;
  l.joint_axis = Vector3d(0, 0, 2);
  CHECK_THROWS_AS(KinematicChain({l}, make_transform(Vector3d(1, 0, 0), Vector3d::Zero())), ContractError);
  CHECK_THROWS_AS(KinematicChain({Link{}}, Eigen::Isometry3d::Identity()), ContractError);
  CHECK_THROWS_AS(KinematicChain({}, make_transform(Vector3d(1, 0, 0), Vector3d::Zero())), ContractError);
  Link heavy;
  heavy.mass = -1.0;
  CHECK_THROWS_AS(KinematicChain({heavy}, make_transform(Vector3d(1, 0, 0), Vector3d::Zero())), ContractError);
}

TEST_CASE("orientation error is the rotation vector of target relative to current") {
  Gen g(9);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Quaterniond cur = g.rotation();
    const Vector3d axis = g.unit();
    const double angle = g.uniform(0.0, 3.1);
    const Eigen::Quaterniond target = Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis)) * cur;
    CHECK((orientation_error(target, cur) - angle * axis).norm() < 1e-9);
    // Sign of the quaternion does not matter.
    Eigen::Quaterniond neg(-target.w(), -target.x(), -target.y(), -target.z());
    CHECK((orientation_error(neg, cur) - angle * axis).norm() < 1e-9);
  }
  CHECK(orientation_error(Eigen::Quaterniond::Identity(), Eigen::Quaterniond::Identity()).norm() == 0.0);
}

TEST_CASE("tip extension moves the tip along its own axes") {
  const KinematicChain ur = test::ur10e();
  const KinematicChain probe = ur.with_tip_extension(make_transform(Vector3d(0, 0, 0.2), Vector3d::Zero()));
  Gen g(10);
  for (int i = 0; i < 50; ++i) {
    const VectorXd q = g.vec(6, -3, 3);
    const Pose a = forward_kinematics(ur, q);
    const Pose b = forward_kinematics(probe, q);
    CHECK((b.position - (a.position + 0.2 * a.rotation().col(2))).norm() < 1e-12);
  }
}

TEST_CASE("reference chain lies within sanity ranges") {
  const KinematicChain ur = test::ur10e();
  CHECK(ur.joint_count() == 6);
  const Pose home = forward_kinematics(ur, test::home_q());
  CHECK(home.position.norm() > 0.3);
  CHECK(home.position.norm() < 1.5);
  for (const Link& l : ur.links()) CHECK(l.mass > 0.0);
}

TEST_CASE("chain file errors carry the line number") {
  const std::string ok = "schema_version = 1\n[link a]\noffset = 0 0 0 0 0 0\naxis = 0 0 1\n[tip]\noffset = 0.1 0 0 0 0 0\n";
  CHECK(parse_chain(ok, "ok").joint_count() == 1);

  auto line_of = [](const std::string& text) {
    try {
      parse_chain(text, "t");
    } catch (const ini::ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("schema_version = 1\n[link a]\noffset = 0 0 0 0 0 0\naxis = 0 0 0\n[tip]\noffset = 0.1 0 0 0 0 0\n") == 4);
  CHECK(line_of("schema_version = 1\n[link a]\noffset = 0 0 0 0 0\n[tip]\noffset = 0.1 0 0 0 0 0\n") == 3);
  CHECK(line_of("schema_version = 1\n[link a]\noffset = 0 0 0 0 0 0\nmass = -2\n[tip]\noffset = 0.1 0 0 0 0 0\n") == 4);
  CHECK(line_of("schema_version = 1\n[link a]\noffset = 0 0 0 0 0 0\nbogus = 1\n[tip]\noffset = 0.1 0 0 0 0 0\n") == 4);
  CHECK(line_of("schema_version = 1\n[link a]\noffset = 0 0 0 0 0 0\n") > 0);
  CHECK(line_of("schema_version = 2\n[link a]\noffset = 0 0 0 0 0 0\n[tip]\noffset = 0.1 0 0 0 0 0\n") == 1);
}
