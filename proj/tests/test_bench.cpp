#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fdcc/scenario.hpp"
#include "fdcc/suite.hpp"
#include "support.hpp"

#include <sstream>

using namespace fdcc;

namespace {

ScenarioConfig scenario(Experiment e, Mode m) {
  ScenarioConfig c = default_scenario(e);
  c.id = to_string(e) + "@" + to_string(m);
  c.pair = to_string(e);
  c.mode = m;
  c.seed = 5;
  return c;
}

std::string csv_of(const TimeSeriesTrace& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

void check_same_stats(const std::optional<Stats>& a, const std::optional<Stats>& b) {
  REQUIRE(a.has_value() == b.has_value());
  if (!a) return;
  CHECK(a->mean == b->mean);
  CHECK(a->sd == b->sd);
  CHECK(a->count == b->count);
}

}  // namespace

TEST_CASE("zero step force never touches and reports no metrics") {
  ScenarioConfig c = scenario(Experiment::SS, Mode::Velocity);
  c.ss.force = 0.0;
  c.duration = 2.0;
  const ScenarioResult r = run_settle_stability(c);
  for (const auto& s : r.traces[0].samples) REQUIRE(s.wrench_true.force.norm() == 0.0);
  CHECK(!r.report.overshoot);
  CHECK(!r.report.settling_time);
  CHECK(!r.report.steady_state_error);
  CHECK(!r.report.diagnostics.empty());
}

TEST_CASE("settle stability produces step metrics in both modes") {
  for (Mode m : {Mode::Velocity, Mode::Position}) {
    ScenarioConfig c = scenario(Experiment::SS, m);
    c.duration = 10.0;
    const MetricsReport r = run_settle_stability(c).report;
    REQUIRE(r.overshoot);
    REQUIRE(r.settling_time);
    CHECK(r.overshoot->mean >= 0.0);
    CHECK(r.settling_time->mean > 0.0);
    CHECK(r.steady_state_error->mean < 0.05 * c.ss.force);
  }
}

TEST_CASE("pure force control converges onto the desired force") {
  ScenarioConfig c = scenario(Experiment::SS, Mode::Velocity);
  c.compliance.k_trans.setZero();
  c.ss.force = 10.0;
  c.duration = 10.0;
  const TimeSeriesTrace t = run_settle_stability(c).traces[0];
  // Sensor reads the push on the wall: −z for a downward step.
  CHECK(-t.samples.back().wrench_meas.force.z() == doctest::Approx(10.0).epsilon(0.005));
}

TEST_CASE("flat profile at quasi-static speed tracks 10 N within 0.1 N") {
  for (Mode m : {Mode::Velocity, Mode::Position}) {
    ScenarioConfig c = scenario(Experiment::DH, m);
    c.profile.p1_angle_deg = 0.0;
    c.profile.p3_angle_deg = 0.0;
    c.dh.speed = 0.0005;
    c.dh.path_end = 0.02;
    c.duration = c.dh.preload_time + c.dh.path_end / c.dh.speed + 1.0;
    const MetricsReport r = run_disturbance_handling(c).report;
    REQUIRE(r.total_rmse);
    CHECK(r.total_rmse->mean < 0.1);
    CHECK(r.controller_rmse->mean < 0.1);
    CHECK(r.diagnostics.empty());
  }
}

TEST_CASE("free-space waypoint tracking stays within 1 mm of the line") {
  for (Mode m : {Mode::Velocity, Mode::Position}) {
    ScenarioConfig c = scenario(Experiment::OS, m);
    c.os.artefact = false;
    c.os.depth = 0.0;
    c.duration = c.os.path_end / c.os.speed + 2.0;
    const MetricsReport r = run_obstruction_stability(c).report;
    REQUIRE(r.path_error);
    CHECK(r.path_error->mean < 1e-3);
    CHECK(r.peak_force->mean == 0.0);
  }
}

TEST_CASE("obstruction run that cannot reach marker D reports a timeout") {
  ScenarioConfig c = scenario(Experiment::OS, Mode::Velocity);
  c.duration = 3.0;
  const MetricsReport r = run_obstruction_stability(c).report;
  CHECK(!r.time_to_goal);
  REQUIRE(!r.diagnostics.empty());
  CHECK(r.diagnostics[0].find("timeout") != std::string::npos);
}

TEST_CASE("no operator force means no work") {
  ScenarioConfig c = scenario(Experiment::CW, Mode::Velocity);
  c.cw.operator_model = OperatorModel::Force;
  c.cw.force_amplitude = 0.0;
  c.cw.cycles = 1;
  c.duration = 4.0;
  const MetricsReport r = run_cumulative_work(c).report;
  REQUIRE(r.cumulative_work);
  CHECK(r.cumulative_work->mean == 0.0);
}

TEST_CASE("operator work equals the trapezoidal integral of the logged trace") {
  ScenarioConfig c = scenario(Experiment::CW, Mode::Position);
  c.duration = 6.0;
  c.cw.cycles = 1;
  const ScenarioResult r = run_cumulative_work(c);
  const auto& s = r.traces[0].samples;
  double oracle = 0.0;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const Vector3d f = 0.5 * (s[k].wrench_true.force + s[k + 1].wrench_true.force);
    oracle += std::abs(f.dot(s[k + 1].tip_pose.position - s[k].tip_pose.position));
  }
  CHECK(oracle > 1.0);
  CHECK(std::abs(r.report.cumulative_work->mean - oracle) < 1e-6);
}

TEST_CASE("metrics recomputed from CSV traces reproduce the report exactly") {
  for (Experiment e : {Experiment::SS, Experiment::DH, Experiment::OS, Experiment::CW}) {
    ScenarioConfig c = scenario(e, Mode::Position);
    c.trials = 2;
    c.duration = e == Experiment::SS ? 10.0 : 8.0;
    c.cw.cycles = 1;
    c.sensor.force_noise_std = Vector3d::Constant(0.05);
    if (e == Experiment::DH) {
      c.dh.preload_time = 2.0;
      c.dh.path_end = 0.006;
    }
    if (e == Experiment::OS) c.os.speed = 0.01;
    const ScenarioResult r = run_scenario(c);
    std::vector<TimeSeriesTrace> back;
    for (const auto& t : r.traces) {
      std::istringstream in(csv_of(t));
      back.push_back(read_csv(in));
      CHECK(csv_of(back.back()) == csv_of(t));
    }
    const MetricsReport again = evaluate(c, back);
    INFO(to_string(e));
    check_same_stats(r.report.overshoot, again.overshoot);
    check_same_stats(r.report.settling_time, again.settling_time);
    check_same_stats(r.report.steady_state_error, again.steady_state_error);
    check_same_stats(r.report.total_rmse, again.total_rmse);
    check_same_stats(r.report.controller_rmse, again.controller_rmse);
    check_same_stats(r.report.cumulative_work, again.cumulative_work);
    check_same_stats(r.report.time_to_goal, again.time_to_goal);
    check_same_stats(r.report.peak_force, again.peak_force);
    check_same_stats(r.report.max_force_rate, again.max_force_rate);
    check_same_stats(r.report.path_error, again.path_error);
    CHECK(r.report.diagnostics == again.diagnostics);
  }
}

TEST_CASE("identical seeds give identical trials; noise-free trials aggregate with zero sd") {
  ScenarioConfig c = scenario(Experiment::SS, Mode::Velocity);
  c.duration = 5.0;
  c.trials = 3;
  const ScenarioResult a = run_scenario(c);
  CHECK(csv_of(a.traces[0]) == csv_of(a.traces[2]));
  REQUIRE(a.report.overshoot);
  CHECK(a.report.overshoot->sd == 0.0);
  CHECK(a.report.settling_time->sd == 0.0);

  c.sensor.force_noise_std = Vector3d::Constant(0.05);
  const ScenarioResult b = run_scenario(c);
  CHECK(csv_of(b.traces[0]) != csv_of(b.traces[1]));
  CHECK(csv_of(run_scenario(c).traces[1]) == csv_of(b.traces[1]));
  // Both modes see the same noise stream.
  CHECK(c.trial_seed(1) != c.trial_seed(0));
  ScenarioConfig p = c;
  p.mode = Mode::Position;
  CHECK(p.trial_seed(1) == c.trial_seed(1));
}

TEST_CASE("closed loop stays bounded in every experiment") {
  // Envelope per experiment: (tip travel, force scale).
  const auto envelope = [](const ScenarioConfig& c) -> std::pair<double, double> {
    switch (c.experiment) {
      case Experiment::SS: return {c.ss.gap + 0.001, c.ss.force};
      case Experiment::DH: return {c.dh.path_end, c.dh.force};
      case Experiment::OS: return {c.os.path_end, c.compliance.k_trans.z() * c.os.depth};
      case Experiment::CW: return {c.cw.stroke, c.cw.hand_stiffness * c.cw.stroke};
    }
    return {0.0, 0.0};
  };
  for (Experiment e : {Experiment::SS, Experiment::DH, Experiment::OS, Experiment::CW}) {
    for (Mode m : {Mode::Velocity, Mode::Position}) {
      ScenarioConfig c = scenario(e, m);
      c.duration = 12.0;
      c.sensor.force_noise_std = Vector3d::Constant(0.05);
      c.cw.cycles = 2;
      if (e == Experiment::DH) {
        c.dh.speed = 0.002;
        c.dh.path_end = 0.012;
      }
      if (e == Experiment::SS) c.ss.force = 70.0;
      const auto [travel, force] = envelope(c);
      const TimeSeriesTrace t = simulate_trial(c, 0);
      const Vector3d home = t.samples.front().tip_pose.position;
      double max_travel = 0.0, max_force = 0.0;
      for (const auto& s : t.samples) {
        max_travel = std::max(max_travel, (s.tip_pose.position - home).norm());
        max_force = std::max(max_force, s.wrench_true.force.norm());
      }
      INFO(to_string(e), " ", to_string(m));
      CHECK(max_travel < 10.0 * travel);
      CHECK(max_force < 10.0 * force);
    }
  }
}

TEST_CASE("trace CSV rejects malformed input with a location") {
  std::istringstream bad("time,fx\n0,1\n");
  CHECK_THROWS(read_csv(bad, "bad.csv"));
  ScenarioConfig c = scenario(Experiment::SS, Mode::Velocity);
  c.duration = 0.01;
  std::string text = csv_of(simulate_trial(c, 0));
  text.replace(text.rfind(','), 1, ",x");
  std::istringstream in(text);
  try {
    read_csv(in, "t.csv");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("t.csv") != std::string::npos);
  }
}

TEST_CASE("runner entry points refuse the wrong experiment") {
  const ScenarioConfig c = scenario(Experiment::SS, Mode::Velocity);
  CHECK_THROWS_AS(run_cumulative_work(c), ContractError);
  CHECK_THROWS_AS(run_disturbance_handling(c), ContractError);
  ScenarioConfig bad = c;
  bad.trials = 0;
  CHECK_THROWS_AS(run_settle_stability(bad), ContractError);
}
