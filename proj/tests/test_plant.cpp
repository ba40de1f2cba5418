#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fdcc/plant.hpp"
#include "support.hpp"

#include <cmath>

using namespace fdcc;
using fdcc::test::Gen;

namespace {

ContactSurface square(const std::string& id, const Vector3d& point, const Vector3d& normal, double half = 0.5) {
  ContactSurface s;
  s.id = id;
  s.plane_point = point;
  s.plane_normal = normal.normalized();
  const Vector3d u = s.plane_normal.unitOrthogonal();
  const Vector3d v = s.plane_normal.cross(u);
  s.extent = {point + half * (u + v), point + half * (-u + v), point + half * (-u - v), point + half * (u - v)};
  return s;
}

Artefact floor_at_zero(double mu = 0.3) {
  ContactSurface s = square("floor", Vector3d::Zero(), Vector3d::UnitZ());
  s.friction_mu = mu;
  return Artefact({s});
}

Pose tip_at(const Vector3d& p) {
  Pose x;
  x.position = p;
  return x;
}

JointCommand command(Mode mode, const VectorXd& v) { return {mode, v}; }

}  // namespace

TEST_CASE("resting plant only advances time") {
  for (Mode mode : {Mode::Velocity, Mode::Position}) {
    ServoModel servo;
    servo.mode = mode;
    const Plant plant(test::ur10e(), servo, Artefact{});
    const PlantState s0 = plant.initial_state(test::home_q());
    const VectorXd cmd = mode == Mode::Velocity ? VectorXd::Zero(6) : test::home_q();
    const PlantState s1 = plant.step(s0, command(mode, cmd), 0.002);
    CHECK(s1.q == s0.q);
    CHECK(s1.qdot == s0.qdot);
    CHECK(s1.time == doctest::Approx(0.002));
    CHECK(s1.contact_surface == -1);
  }
}

TEST_CASE("no drift over 10 s without commands") {
  for (Mode mode : {Mode::Velocity, Mode::Position}) {
    ServoModel servo;
    servo.mode = mode;
    const Plant plant(test::ur10e(), servo, Artefact{});
    PlantState s = plant.initial_state(test::home_q());
    const VectorXd cmd = mode == Mode::Velocity ? VectorXd::Zero(6) : test::home_q();
    for (int k = 0; k < 5000; ++k) s = plant.step(s, command(mode, cmd), 0.002);
    CHECK((s.q - test::home_q()).cwiseAbs().sum() == 0.0);
  }
}

TEST_CASE("velocity servo follows the first-order step response") {
  ServoModel servo;
  servo.mode = Mode::Velocity;
  const double beta = servo.velocity_bandwidth, w = 0.3;  // β·w below the acceleration limit
  const double dt = 5.0 / beta / 25.0;
  const Plant plant(test::ur10e(), servo, Artefact{});
  PlantState s = plant.initial_state(test::home_q());
  for (int k = 0; k < 25; ++k) s = plant.step(s, command(Mode::Velocity, VectorXd::Constant(6, w)), dt);
  const double expected = w * (1.0 - std::exp(-beta * s.time));
  for (int j = 0; j < 6; ++j) CHECK(std::abs(s.qdot[j] - expected) < 0.01 * w);
}

TEST_CASE("position servo does not overshoot a step") {
  ServoModel servo;
  servo.mode = Mode::Position;
  CHECK(servo.position_damping * servo.position_damping >= 4.0 * servo.position_stiffness);
  const Plant plant(test::ur10e(), servo, Artefact{});
  const VectorXd target = test::home_q() + VectorXd::Constant(6, 0.05);
  PlantState s = plant.initial_state(test::home_q());
  double worst = -1.0;
  for (int k = 0; k < 2000; ++k) {
    s = plant.step(s, command(Mode::Position, target), 0.002);
    worst = std::max(worst, (s.q - target).maxCoeff());
  }
  CHECK(worst <= 1e-6);
  CHECK((s.q - target).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("servo limits clamp velocity and acceleration") {
  ServoModel servo;
  servo.mode = Mode::Velocity;
  const Plant plant(test::ur10e(), servo, Artefact{});
  PlantState s = plant.initial_state(test::home_q());
  const PlantState s1 = plant.step(s, command(Mode::Velocity, VectorXd::Constant(6, 100.0)), 0.002);
  CHECK(s1.qdot.maxCoeff() <= servo.acceleration_limit * 0.002 + 1e-12);
  for (int k = 0; k < 1000; ++k) s = plant.step(s, command(Mode::Velocity, VectorXd::Constant(6, 100.0)), 0.002);
  CHECK(s.qdot.maxCoeff() == doctest::Approx(servo.velocity_limit));
}

TEST_CASE("position interface lags more than velocity at 1 Hz") {
  ServoModel v, p;
  v.mode = Mode::Velocity;
  p.mode = Mode::Position;
  CHECK(p.phase_deg(1.0) < v.phase_deg(1.0));
  CHECK(v.phase_deg(1.0) > -5.0);
  CHECK(v.phase_deg(0.0) == 0.0);
  const ServoModel q = ServoModel::from_natural_frequency(Mode::Position, 80, 20, 1.2);
  CHECK(q.position_stiffness == doctest::Approx(400));
  CHECK(q.position_damping == doctest::Approx(48));
}

TEST_CASE("separated tip feels nothing") {
  const Artefact env = floor_at_zero();
  const ContactResult c = contact_wrench(tip_at(Vector3d(0, 0, 0.0051)), Vector6d::Zero(), env, 0.005);
  CHECK(!c.in_contact());
  CHECK(c.wrench.to_vector().norm() == 0.0);
}

TEST_CASE("1 mm penetration at 1e5 N/m gives 100 N along the normal") {
  const Artefact env = floor_at_zero(0.0);
  const double r = 0.005;
  const ContactResult c = contact_wrench(tip_at(Vector3d(0.1, -0.2, r - 0.001)), Vector6d::Zero(), env, r);
  REQUIRE(c.in_contact());
  CHECK(c.penetration == doctest::Approx(0.001));
  CHECK((c.wrench.force - Vector3d(0, 0, 100)).norm() < 1e-9);
  CHECK(c.wrench.torque.norm() < 1e-12);
}

TEST_CASE("frictionless sliding on a 45 degree face is normal-only") {
  const Vector3d n = Vector3d(-1, 0, 1).normalized();
  ContactSurface s = square("ramp", Vector3d::Zero(), n);
  s.friction_mu = 0.0;
  const Artefact env({s});
  const Vector3d along = Vector3d(1, 0, 1).normalized();
  Gen g(41);
  for (int i = 0; i < 100; ++i) {
    const double d = g.uniform(1e-5, 2e-3);
    Vector6d vel = Vector6d::Zero();
    vel.head<3>() = g.uniform(-0.1, 0.1) * along + g.uniform(-0.1, 0.1) * Vector3d::UnitY();
    const ContactResult c = contact_wrench(tip_at(0.05 * along + (0.005 - d) * n), vel, env, 0.005);
    REQUIRE(c.in_contact());
    CHECK(c.wrench.force.cross(n).norm() < 1e-9);
    CHECK(c.wrench.force.dot(n) > 0.0);
  }
}

TEST_CASE("friction opposes sliding and is bounded by mu times the normal force") {
  const Artefact env = floor_at_zero(0.3);
  Vector6d vel = Vector6d::Zero();
  vel[0] = 0.01;
  const ContactResult c = contact_wrench(tip_at(Vector3d(0, 0, 0.004)), vel, env, 0.005);
  CHECK(c.wrench.force.x() == doctest::Approx(-0.3 * c.wrench.force.z()));
  vel[0] = 1e-5;  // regularised region
  const ContactResult slow = contact_wrench(tip_at(Vector3d(0, 0, 0.004)), vel, env, 0.005);
  CHECK(std::abs(slow.wrench.force.x()) < 0.3 * slow.wrench.force.z());
}

TEST_CASE("property: contact force vanishes continuously at the boundary") {
  const Artefact env = floor_at_zero();
  Gen g(42);
  Vector6d approach = Vector6d::Zero();
  approach[2] = -0.2;
  double prev = 1e9;
  for (double d : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) {
    approach[0] = g.uniform(-0.05, 0.05);
    const double f = contact_wrench(tip_at(Vector3d(0, 0, 0.005 - d)), approach, env, 0.005).wrench.force.norm();
    CHECK(f < prev);
    prev = f;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("sensor model") {
  Gen g(43);
  const Wrench w = g.wrench(10);
  SUBCASE("ideal sensor is the identity") {
    SensorModel m;
    for (double t : {0.0, 0.5, 3.14}) CHECK(read_sensor(w, m, t) == w);
  }
  SUBCASE("bias is added") {
    SensorModel m;
    m.bias.force = Vector3d(1, 2, 3);
    CHECK(read_sensor(w, m, 0.1).force == w.force + Vector3d(1, 2, 3));
  }
  SUBCASE("same seed, same stream; other seed, other stream") {
    SensorModel m;
    m.force_noise_std = Vector3d::Constant(0.1);
    m.seed = 7;
    SensorModel other = m;
    other.seed = 8;
    bool differs = false;
    for (int k = 0; k < 100; ++k) {
      const double t = k * 0.002;
      CHECK(read_sensor(w, m, t) == read_sensor(w, m, t));
      differs |= !(read_sensor(w, m, t) == read_sensor(w, other, t));
    }
    CHECK(differs);
  }
  SUBCASE("noise std within 5% over 1e5 samples") {
    SensorModel m;
    m.force_noise_std = Vector3d::Constant(0.1);
    m.torque_noise_std = Vector3d::Constant(0.01);
    m.seed = 99;
    Eigen::Array<double, 6, 1> sum = Eigen::Array<double, 6, 1>::Zero(), sq = sum;
    const int n = 100'000;
    for (int k = 0; k < n; ++k) {
      const Eigen::Array<double, 6, 1> e = (read_sensor(Wrench{}, m, k / m.sample_rate)).to_vector().array();
      sum += e;
      sq += e * e;
    }
    const Eigen::Array<double, 6, 1> sd = (sq / n - (sum / n).square()).sqrt();
    for (int i = 0; i < 3; ++i) CHECK(std::abs(sd[i] - 0.1) < 0.005);
    for (int i = 3; i < 6; ++i) CHECK(std::abs(sd[i] - 0.01) < 0.0005);
  }
  SUBCASE("zero-order hold between samples") {
    SensorModel m;
    m.sample_rate = 100;
    ForceSensor s(m);
    const Wrench a = s.read(w, 0.001);
    CHECK(s.read(w * 2.0, 0.009) == a);
    CHECK(s.read(w * 2.0, 0.0101) == w * 2.0);
  }
  SensorModel bad;
  bad.force_noise_std.x() = -1;
  CHECK_THROWS_AS(ForceSensor{bad}, ContractError);
}

TEST_CASE("non-finite command faults the simulation") {
  const Plant plant(test::ur10e(), ServoModel{}, Artefact{});
  const PlantState s = plant.initial_state(test::home_q());
  VectorXd cmd = VectorXd::Zero(6);
  cmd[3] = std::nan("");
  CHECK_THROWS_AS(plant.step(s, command(Mode::Velocity, cmd), 0.002), SimulationFault);
  CHECK_THROWS_AS(plant.step(s, command(Mode::Position, test::home_q()), 0.002), ContractError);
  CHECK_THROWS_AS(plant.step(s, command(Mode::Velocity, VectorXd::Zero(6)), 0.0), ContractError);
}

TEST_CASE("tip pose equals forward kinematics after every step") {
  Gen g(44);
  const Plant plant(test::ur10e(), ServoModel{}, floor_at_zero());
  PlantState s = plant.initial_state(test::home_q());
  for (int k = 0; k < 200; ++k) {
    s = plant.step(s, command(Mode::Velocity, g.vec(6, -0.5, 0.5)), 0.002);
    const Pose fk = forward_kinematics(plant.chain(), s.q);
    REQUIRE((fk.position - s.tip_pose.position).norm() < 1e-12);
  }
}

TEST_CASE("artefact faces must be connected and well formed") {
  const ContactSurface a = square("a", Vector3d::Zero(), Vector3d::UnitZ(), 0.1);
  const ContactSurface far = square("b", Vector3d(1, 0, 0), Vector3d::UnitZ(), 0.1);
  CHECK_THROWS_AS(Artefact({a, far}), ContractError);
  ContactSurface tilted = a;
  tilted.plane_normal = Vector3d(0, 0, 2);
  CHECK_THROWS_AS(Artefact({tilted}), ContractError);
  ContactSurface soft = a;
  soft.stiffness_env = 0.0;
  CHECK_THROWS_AS(Artefact({soft}), ContractError);
}

TEST_CASE("convex edge pushes outward from the ridge") {
  // Roof: two faces meeting at a ridge along y at height 0.
  const Vector3d n1 = Vector3d(-1, 0, 2).normalized(), n2 = Vector3d(1, 0, 2).normalized();
  ContactSurface left, right;
  left.id = "left";
  right.id = "right";
  left.plane_normal = n1;
  right.plane_normal = n2;
  const Vector3d ridge0(0, -0.1, 0), ridge1(0, 0.1, 0);
  const Vector3d down_l = Vector3d(-2, 0, -1).normalized() * 0.1, down_r = Vector3d(2, 0, -1).normalized() * 0.1;
  left.plane_point = ridge0;
  right.plane_point = ridge0;
  left.extent = {ridge0, ridge1, ridge1 + down_l, ridge0 + down_l};
  right.extent = {ridge0, ridge1, ridge1 + down_r, ridge0 + down_r};
  const Artefact roof({left, right});
  REQUIRE(roof.edges().size() == 1);
  CHECK(roof.edges()[0].convex);
  const ContactResult c = contact_wrench(tip_at(Vector3d(0, 0, 0.004)), Vector6d::Zero(), roof, 0.005);
  REQUIRE(c.in_contact());
  CHECK(c.wrench.force.z() > 0.0);
}
