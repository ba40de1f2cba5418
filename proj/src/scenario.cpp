#include "fdcc/scenario.hpp"

#include "fdcc/chain_file.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace fdcc {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::CW: return "cw";
    case Experiment::OS: return "os";
    case Experiment::SS: return "ss";
    case Experiment::DH: return "dh";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& text) {
  if (text == "cw" || text == "CW") return Experiment::CW;
  if (text == "os" || text == "OS") return Experiment::OS;
  if (text == "ss" || text == "SS") return Experiment::SS;
  if (text == "dh" || text == "DH") return Experiment::DH;
  throw ContractError("unknown experiment '" + text + "'");
}

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void positive(double v, const std::string& field) {
  if (!(std::isfinite(v) && v > 0.0)) throw ContractError("'" + field + "' must be positive");
}

void non_negative(double v, const std::string& field) {
  if (!(std::isfinite(v) && v >= 0.0)) throw ContractError("'" + field + "' must be non-negative");
}

double raised_cosine(double tau) { return 0.5 * (1.0 - std::cos(std::numbers::pi * std::clamp(tau, 0.0, 1.0))); }

// Hand reference of the CW operator: raised-cosine strokes between markers.
struct HandScript {
  struct Segment {
    double t0, t1;
    Vector3d from, to;
  };
  std::vector<Segment> segments;
  Vector3d rest;

  double end() const { return segments.empty() ? 0.0 : segments.back().t1; }

  std::pair<Vector3d, Vector3d> at(double t) const {
    for (const Segment& s : segments) {
      if (t < s.t0 || t >= s.t1) continue;
      const double T = s.t1 - s.t0;
      const double tau = (t - s.t0) / T;
      const Vector3d d = s.to - s.from;
      return {s.from + raised_cosine(tau) * d, d * (0.5 * std::numbers::pi / T) * std::sin(std::numbers::pi * tau)};
    }
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
      if (t >= it->t1) return {it->to, Vector3d::Zero()};
    }
    return {rest, Vector3d::Zero()};
  }
};

double stroke_time(const CwParams& cw, int trial) {
  return cw.stroke_times.size() == 1 ? cw.stroke_times.front() : cw.stroke_times.at(static_cast<std::size_t>(trial));
}

HandScript hand_script(const CwParams& cw, const Vector3d& home, int trial) {
  const double T = stroke_time(cw, trial);
  const Vector3d a = home - 0.5 * cw.stroke * cw.axis;
  const Vector3d b = home + 0.5 * cw.stroke * cw.axis;
  HandScript h;
  h.rest = home;
  double t = 0.0;
  auto add = [&](const Vector3d& from, const Vector3d& to, double dur) {
    h.segments.push_back({t, t + dur, from, to});
    t += dur + cw.dwell;
  };
  add(home, a, 0.5 * T);
  for (int c = 0; c < cw.cycles; ++c) {
    add(a, b, T);
    add(b, a, T);
  }
  add(a, home, 0.5 * T);
  return h;
}

// Force pulses of the open-loop operator: towards B, then back towards A.
Vector3d force_pulse(const CwParams& cw, int trial, double t) {
  const double T = stroke_time(cw, trial);
  const double period = T + cw.dwell;
  const int k = static_cast<int>(std::floor(t / period));
  if (k < 0 || k >= 2 * cw.cycles) return Vector3d::Zero();
  const double tau = (t - k * period) / T;
  if (tau >= 1.0) return Vector3d::Zero();
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * cw.force_amplitude * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * tau)) * cw.axis;
}

double script_length(const ScenarioConfig& cfg, int trial) {
  if (cfg.cw.operator_model == OperatorModel::Impedance) {
    return hand_script(cfg.cw, Vector3d::Zero(), trial).end();
  }
  return 2.0 * cfg.cw.cycles * (stroke_time(cfg.cw, trial) + cfg.cw.dwell);
}

Matrix3d diag3(const Matrix3d& m) { return m.diagonal().asDiagonal(); }

}  // namespace

void ProfileGeometry::validate() const {
  non_negative(lead_back, "profile.lead_back");
  non_negative(lead_in, "profile.lead_in");
  positive(p1_length, "profile.p1_length");
  positive(p2_length, "profile.p2_length");
  positive(p3_length, "profile.p3_length");
  non_negative(lead_out, "profile.lead_out");
  positive(width, "profile.width");
  for (auto [v, name] : {std::pair{p1_angle_deg, "profile.p1_angle"}, std::pair{p2_angle_deg, "profile.p2_angle"},
                         std::pair{p3_angle_deg, "profile.p3_angle"}}) {
    if (!(std::isfinite(v) && std::abs(v) < 80.0)) throw ContractError(std::string("'") + name + "' must lie in (-80, 80) degrees");
  }
}

void ScenarioConfig::validate() const {
  require(!id.empty(), "scenario id must not be empty");
  if (trials < 1) throw ContractError("'trials' must be at least 1");
  positive(duration, "duration");
  positive(dt, "dt");
  positive(probe_length, "probe_length");
  positive(tip_radius, "tip_radius");
  if (home_q.size() == 0 || !home_q.allFinite()) throw ContractError("'home_q' must be a finite joint vector");
  compliance.validate();
  non_negative(inertia.end_mass, "end_mass");
  non_negative(inertia.link_mass, "link_mass");
  if ((inertia.end_inertia.diagonal().array() < 0.0).any()) throw ContractError("'end_inertia' must be non-negative");
  if ((inertia.link_inertia.diagonal().array() < 0.0).any()) throw ContractError("'link_inertia' must be non-negative");
  if (!(velocity_retention > 0.0 && velocity_retention <= 1.0)) {
    throw ContractError("'velocity_retention' must lie in (0, 1]");
  }
  servo.validate();
  if (servo.position_damping * servo.position_damping < 4.0 * servo.position_stiffness) {
    throw ContractError("'servo.position_damping' leaves the position servo underdamped");
  }
  positive(contact.stiffness, "contact.stiffness");
  non_negative(contact.damping, "contact.damping");
  non_negative(contact.friction, "contact.friction");
  sensor.validate();
  settle.validate();

  switch (experiment) {
    case Experiment::SS:
      if (!(ss.direction.allFinite() && ss.direction.norm() > 0.0)) throw ContractError("'ss.direction' must be non-zero");
      non_negative(ss.force, "ss.force");
      non_negative(ss.gap, "ss.gap");
      break;
    case Experiment::DH:
      profile.validate();
      non_negative(dh.force, "dh.force");
      positive(dh.speed, "dh.speed");
      non_negative(dh.preload_time, "dh.preload_time");
      positive(dh.path_end, "dh.path_end");
      if (duration < dh.preload_time + dh.path_end / dh.speed) {
        throw ContractError("'duration' is shorter than the preload plus the traverse");
      }
      break;
    case Experiment::OS:
      profile.validate();
      positive(os.speed, "os.speed");
      positive(os.path_end, "os.path_end");
      if (!(os.marker_c < os.marker_d)) throw ContractError("'os.marker_c' must come before 'os.marker_d'");
      break;
    case Experiment::CW:
      if (!(cw.axis.allFinite() && cw.axis.norm() > 0.0)) throw ContractError("'cw.axis' must be non-zero");
      positive(cw.stroke, "cw.stroke");
      if (cw.cycles < 1) throw ContractError("'cw.cycles' must be at least 1");
      if (cw.stroke_times.size() != 1 && static_cast<int>(cw.stroke_times.size()) != trials) {
        throw ContractError("'cw.stroke_times' needs one entry or one per trial");
      }
      for (double t : cw.stroke_times) positive(t, "cw.stroke_times");
      non_negative(cw.dwell, "cw.dwell");
      non_negative(cw.hand_stiffness, "cw.hand_stiffness");
      non_negative(cw.hand_damping, "cw.hand_damping");
      non_negative(cw.force_amplitude, "cw.force_amplitude");
      for (int k = 0; k < trials; ++k) {
        if (duration < script_length(*this, k)) throw ContractError("'duration' is shorter than the operator script");
      }
      break;
  }
}

unsigned long long ScenarioConfig::trial_seed(int k) const {
  return splitmix64(seed ^ splitmix64(fnv1a(pair.empty() ? id : pair) + static_cast<std::uint64_t>(k)));
}

std::size_t ScenarioConfig::steps() const { return static_cast<std::size_t>(std::llround(duration / dt)); }

std::vector<MetricsReport::Entry> MetricsReport::entries() const {
  std::vector<Entry> out;
  auto add = [&](const char* name, const std::optional<Stats>& s) {
    if (s) out.push_back({name, *s});
  };
  add("overshoot", overshoot);
  add("settling_time", settling_time);
  add("steady_state_error", steady_state_error);
  add("total_rmse", total_rmse);
  add("controller_rmse", controller_rmse);
  add("cumulative_work", cumulative_work);
  add("time_to_goal", time_to_goal);
  add("peak_force", peak_force);
  add("max_force_rate", max_force_rate);
  add("contact_losses", contact_losses);
  add("path_error", path_error);
  return out;
}

// ---------------------------------------------------------------------------

TravelProfile::TravelProfile(const ProfileGeometry& g, const Vector3d& origin, const Vector3d& along,
                             const Vector3d& up, double tip_radius)
    : g_(g), origin_(origin), along_(along.normalized()), up_(up.normalized()), r_(tip_radius) {
  g_.validate();
  require(std::abs(along_.dot(up_)) < 1e-12, "profile axes must be orthogonal");
  across_ = up_.cross(along_);
  xs_ = {-g.lead_back, g.lead_in};
  hs_ = {0.0, 0.0};
  for (auto [len, deg] : {std::pair{g.p1_length, g.p1_angle_deg}, std::pair{g.p2_length, g.p2_angle_deg},
                          std::pair{g.p3_length, g.p3_angle_deg}}) {
    xs_.push_back(xs_.back() + len);
    hs_.push_back(hs_.back() + len * std::tan(deg * kDegToRad));
  }
  xs_.push_back(xs_.back() + std::max(g.lead_out, 1e-6));
  hs_.push_back(hs_.back());
}

Vector3d TravelProfile::world(double s, double h) const { return origin_ + s * along_ + h * up_; }

double TravelProfile::s_of(const Vector3d& p) const { return (p - origin_).dot(along_); }

namespace {

struct Candidate {
  double h;
  Eigen::Vector2d n;
};

Candidate offset_point(const std::vector<double>& xs, const std::vector<double>& hs, double r, double s) {
  Candidate best{-1e300, Eigen::Vector2d(0.0, 1.0)};
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const Eigen::Vector2d a(xs[i], hs[i]);
    const Eigen::Vector2d b(xs[i + 1], hs[i + 1]);
    const Eigen::Vector2d d = (b - a).normalized();
    const Eigen::Vector2d n(-d.y(), d.x());
    const double foot = s - r * n.x();
    if (foot >= a.x() && foot <= b.x()) {
      const double h = a.y() + (foot - a.x()) * (b.y() - a.y()) / (b.x() - a.x()) + r * n.y();
      if (h > best.h) best = {h, n};
    }
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double ds = s - xs[i];
    if (std::abs(ds) > r) continue;
    const double dh = std::sqrt(r * r - ds * ds);
    if (hs[i] + dh > best.h) best = {hs[i] + dh, Eigen::Vector2d(ds, dh) / r};
  }
  if (best.h < -1e299) {
    // beyond the ends of the profile: continue the end face
    const std::size_t i = s < xs.front() ? 0 : xs.size() - 1;
    best = {hs[i] + r, Eigen::Vector2d(0.0, 1.0)};
  }
  return best;
}

}  // namespace

double TravelProfile::centre_height(double s) const { return offset_point(xs_, hs_, r_, s).h; }

Vector3d TravelProfile::centre_normal(double s) const {
  const Eigen::Vector2d n = offset_point(xs_, hs_, r_, s).n;
  return n.x() * along_ + n.y() * up_;
}

Vector3d TravelProfile::normal_near(const Vector3d& p) const {
  const Eigen::Vector2d c((p - origin_).dot(along_), (p - origin_).dot(up_));
  double best = 1e300;
  Eigen::Vector2d normal(0.0, 1.0);
  for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
    const Eigen::Vector2d a(xs_[i], hs_[i]);
    const Eigen::Vector2d b(xs_[i + 1], hs_[i + 1]);
    const Eigen::Vector2d ab = b - a;
    const double t = std::clamp((c - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const Eigen::Vector2d off = c - (a + t * ab);
    const double dist = off.norm();
    if (dist < best) {
      best = dist;
      const Eigen::Vector2d d = ab.normalized();
      const Eigen::Vector2d face(-d.y(), d.x());
      normal = (t > 0.0 && t < 1.0) || dist == 0.0 ? face : Eigen::Vector2d(off / dist);
    }
  }
  return normal.x() * along_ + normal.y() * up_;
}

std::vector<ContactSurface> TravelProfile::faces(const ContactParams& c) const {
  static const char* names[] = {"lead_in", "P1", "P2", "P3", "lead_out"};
  std::vector<ContactSurface> out;
  const double w = 0.5 * g_.width;
  for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
    ContactSurface s;
    s.id = names[i];
    const Vector3d a = world(xs_[i], hs_[i]);
    const Vector3d b = world(xs_[i + 1], hs_[i + 1]);
    const Vector3d d = (b - a).normalized();
    s.plane_normal = across_.cross(d).normalized();
    if (s.plane_normal.dot(up_) < 0.0) s.plane_normal = -s.plane_normal;
    s.plane_point = a;
    s.extent = {a - w * across_, b - w * across_, b + w * across_, a + w * across_};
    s.stiffness_env = c.stiffness;
    s.damping_env = c.damping;
    s.friction_mu = c.friction;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------

KinematicChain load_rig_chain(const ScenarioConfig& cfg) {
  const KinematicChain base = load_chain(cfg.chain_path);
  return base.with_tip_extension(Eigen::Isometry3d(Eigen::Translation3d(0.0, 0.0, cfg.probe_length)));
}

Pose home_pose(const ScenarioConfig& cfg) { return forward_kinematics(load_rig_chain(cfg), cfg.home_q); }

namespace {

TravelProfile make_profile(const ScenarioConfig& cfg, const Pose& home) {
  return TravelProfile(cfg.profile, home.position - cfg.tip_radius * Vector3d::UnitZ(), Vector3d::UnitX(),
                       Vector3d::UnitZ(), cfg.tip_radius);
}

Artefact ss_artefact(const ScenarioConfig& cfg, const Pose& home) {
  const Vector3d a = cfg.ss.direction.normalized();
  ContactSurface s;
  s.id = "wall";
  s.plane_normal = -a;
  s.plane_point = home.position + (cfg.ss.gap + cfg.tip_radius) * a;
  const Vector3d u = a.unitOrthogonal();
  const Vector3d v = a.cross(u);
  const double h = 0.05;
  s.extent = {s.plane_point - h * u - h * v, s.plane_point + h * u - h * v, s.plane_point + h * u + h * v,
              s.plane_point - h * u + h * v};
  s.stiffness_env = cfg.contact.stiffness;
  s.damping_env = cfg.contact.damping;
  s.friction_mu = cfg.contact.friction;
  return Artefact({s});
}

Artefact artefact_for(const ScenarioConfig& cfg, const Pose& home) {
  switch (cfg.experiment) {
    case Experiment::SS: return ss_artefact(cfg, home);
    case Experiment::DH: return Artefact(make_profile(cfg, home).faces(cfg.contact));
    case Experiment::OS: return cfg.os.artefact ? Artefact(make_profile(cfg, home).faces(cfg.contact)) : Artefact();
    case Experiment::CW: return Artefact();
  }
  return Artefact();
}

}  // namespace

Artefact build_artefact(const ScenarioConfig& cfg) { return artefact_for(cfg, home_pose(cfg)); }

TimeSeriesTrace simulate_trial(const ScenarioConfig& cfg, int trial) {
  cfg.validate();
  require(trial >= 0 && trial < cfg.trials, "trial index out of range");

  const KinematicChain chain = load_rig_chain(cfg);
  const Pose home = forward_kinematics(chain, cfg.home_q);
  const Artefact env = artefact_for(cfg, home);

  ServoModel servo = cfg.servo;
  servo.mode = cfg.mode;
  Plant plant(chain, servo, env, cfg.tip_radius);
  InertiaOverrides inertia = cfg.inertia;
  inertia.end_inertia = diag3(inertia.end_inertia);
  inertia.link_inertia = diag3(inertia.link_inertia);
  ComplianceController controller(VirtualModel(chain, inertia, cfg.velocity_retention), cfg.compliance, cfg.mode,
                                  cfg.dt);
  SensorModel sm = cfg.sensor;
  sm.seed = cfg.trial_seed(trial);
  ForceSensor sensor(sm);

  const std::optional<TravelProfile> profile =
      (cfg.experiment == Experiment::DH || cfg.experiment == Experiment::OS)
          ? std::optional<TravelProfile>(make_profile(cfg, home))
          : std::nullopt;
  const HandScript hand = hand_script(cfg.cw, home.position, trial);

  std::function<ControlTargets(double)> targets_at;
  ControlTargets fixed;
  fixed.x_d = home;
  switch (cfg.experiment) {
    case Experiment::SS: {
      const Vector3d a = cfg.ss.direction.normalized();
      fixed.x_d.position = home.position + cfg.ss.gap * a;
      fixed.f_d.force = cfg.ss.force * a;
      targets_at = [fixed](double) { return fixed; };
      break;
    }
    case Experiment::DH:
      targets_at = [&, fixed](double t) {
        ControlTargets c = fixed;
        const double s = std::clamp(cfg.dh.speed * (t - cfg.dh.preload_time), 0.0, cfg.dh.path_end);
        const Vector3d n = profile->centre_normal(s);
        // Pose at which the nominal force is reached on the nominal surface.
        c.x_d.position = profile->world(s, profile->centre_height(s)) - (cfg.dh.force / cfg.contact.stiffness) * n;
        c.f_d.force = -cfg.dh.force * n;
        return c;
      };
      break;
    case Experiment::OS:
      targets_at = [&, fixed](double t) {
        ControlTargets c = fixed;
        const double s = std::clamp(cfg.os.speed * t, 0.0, cfg.os.path_end);
        c.x_d.position = profile->world(s, cfg.tip_radius - cfg.os.depth);
        return c;
      };
      break;
    case Experiment::CW:
      targets_at = [fixed](double) { return fixed; };
      break;
  }

  // Force on the tool from anything other than the artefact.
  auto operator_force = [&](double t, const PlantState& st) -> Vector3d {
    if (cfg.experiment != Experiment::CW) return Vector3d::Zero();
    if (cfg.cw.operator_model == OperatorModel::Force) return force_pulse(cfg.cw, trial, t);
    const auto [xh, vh] = hand.at(t);
    return cfg.cw.hand_stiffness * (xh - st.tip_pose.position) +
           cfg.cw.hand_damping * (vh - st.tip_velocity.head<3>());
  };

  PlantState st = plant.initial_state(cfg.home_q);
  controller.start(cfg.home_q);

  const std::size_t n = cfg.steps();
  TimeSeriesTrace trace;
  trace.mode = cfg.mode;
  trace.samples.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    Wrench on_tool = st.contact_wrench_true;
    on_tool.force += operator_force(t, st);
    const Wrench truth = -on_tool;
    const Wrench meas = sensor.read(truth, t);
    JointCommand cmd;
    try {
      cmd = controller.update(meas, st.q, targets_at(t));
    } catch (const ContractError& e) {
      // non-finite virtual state: the loop diverged
      throw SimulationFault("trial " + std::to_string(trial) + ": controller diverged at t = " + std::to_string(t) +
                            " s: " + e.what());
    }

    TraceSample s;
    s.time = t;
    s.wrench_meas = meas;
    s.wrench_true = truth;
    s.tip_pose = st.tip_pose;
    s.command = cmd.values;
    s.q = st.q;
    trace.samples.push_back(std::move(s));

    if (k == n) break;
    try {
      st = plant.step(st, cmd, cfg.dt);
    } catch (const SimulationFault& e) {
      throw SimulationFault("trial " + std::to_string(trial) + ": " + e.what());
    }
    if (!st.q.allFinite()) throw SimulationFault("trial " + std::to_string(trial) + ": plant state diverged");
  }
  return trace;
}

// ---------------------------------------------------------------------------

double cumulative_work(const TimeSeriesTrace& trace) {
  require(!trace.empty(), "cumulative work of an empty trace");
  return cumulative_work(trace.positions(), trace.true_forces());
}

namespace {

bool touching(const TraceSample& s) { return s.wrench_true.force.squaredNorm() > 0.0; }

void evaluate_ss(const ScenarioConfig& cfg, const std::vector<TimeSeriesTrace>& traces, MetricsReport& r) {
  if (cfg.ss.force == 0.0) {
    r.diagnostics.push_back("zero step force: no excitation");
    return;
  }
  const Vector3d a = cfg.ss.direction.normalized();
  std::vector<double> ov, st, sse;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    ForceTrace ft;
    for (const TraceSample& s : traces[k].samples) {
      ft.time.push_back(s.time);
      ft.force.push_back(s.wrench_meas.force.dot(a));
    }
    try {
      const StepResponse sr = analyse_step(ft, cfg.ss.force, cfg.settle);
      ov.push_back(sr.overshoot);
      st.push_back(sr.settling_time);
      sse.push_back(sr.steady_state_error);
    } catch (const MetricError& e) {
      r.diagnostics.push_back("trial " + std::to_string(k) + ": " + e.what() + " (last value " +
                              std::to_string(e.last_value()) + " N)");
    }
  }
  if (!ov.empty()) {
    r.overshoot = aggregate(ov);
    r.settling_time = aggregate(st);
    r.steady_state_error = aggregate(sse);
  }
}

void evaluate_dh(const ScenarioConfig& cfg, const TravelProfile& profile, const std::vector<TimeSeriesTrace>& traces,
                 MetricsReport& r) {
  const double t0 = cfg.dh.preload_time;
  const double t1 = t0 + cfg.dh.path_end / cfg.dh.speed;
  std::vector<double> total, ctrl;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    std::vector<double> e_meas, e_true;
    std::size_t lost = 0;
    for (const TraceSample& s : traces[k].samples) {
      if (s.time < t0 || s.time > t1) continue;
      if (!touching(s)) ++lost;  // kept in the RMSE: a lift-off is a tracking failure
      const Vector3d n = profile.normal_near(s.tip_pose.position);
      e_meas.push_back(cfg.dh.force + s.wrench_meas.force.dot(n));
      e_true.push_back(cfg.dh.force + s.wrench_true.force.dot(n));
    }
    if (lost > 0) {
      r.diagnostics.push_back("trial " + std::to_string(k) + ": contact lost for " + std::to_string(lost) +
                              " samples during the traverse");
    }
    if (e_meas.empty()) continue;
    total.push_back(rmse(e_meas));
    ctrl.push_back(rmse(e_true));
  }
  if (!total.empty()) {
    r.total_rmse = aggregate(total);
    r.controller_rmse = aggregate(ctrl);
  }
}

void evaluate_os(const ScenarioConfig& cfg, const TravelProfile& profile, const std::vector<TimeSeriesTrace>& traces,
                 MetricsReport& r) {
  const double p_begin = profile.face_start(1);
  const double p_end = profile.face_end(3);
  const Vector3d a = profile.world(0.0, cfg.tip_radius - cfg.os.depth);
  const Vector3d dir = Vector3d::UnitX();
  std::vector<double> ttg, peak, rate, losses, path;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const auto& smp = traces[k].samples;
    std::optional<double> tc, td;
    double pk = 0.0, fr = 0.0, pe = 0.0;
    int loss = 0;
    bool contacted = false;
    for (std::size_t i = 0; i < smp.size(); ++i) {
      const Vector3d& p = smp[i].tip_pose.position;
      const double s = profile.s_of(p);
      if (!tc && s >= cfg.os.marker_c) tc = smp[i].time;
      if (!td && s >= cfg.os.marker_d) td = smp[i].time;
      const Vector3d off = p - a;
      pe = std::max(pe, (off - off.dot(dir) * dir).norm());
      const double f = smp[i].wrench_true.force.norm();
      pk = std::max(pk, f);
      const bool over = s >= p_begin && s <= p_end;
      if (i > 0 && over) {
        const double f_prev = smp[i - 1].wrench_true.force.norm();
        fr = std::max(fr, std::abs(f - f_prev) / (smp[i].time - smp[i - 1].time));
        if (contacted && touching(smp[i - 1]) && !touching(smp[i])) ++loss;
      }
      contacted = contacted || touching(smp[i]);
    }
    peak.push_back(pk);
    rate.push_back(fr);
    losses.push_back(loss);
    path.push_back(pe);
    if (tc && td) {
      ttg.push_back(*td - *tc);
    } else {
      r.diagnostics.push_back("trial " + std::to_string(k) + ": timeout, probe did not pass marker " +
                              std::string(tc ? "D" : "C") + " within the duration");
    }
  }
  if (!ttg.empty()) r.time_to_goal = aggregate(ttg);
  r.peak_force = aggregate(peak);
  r.max_force_rate = aggregate(rate);
  r.contact_losses = aggregate(losses);
  r.path_error = aggregate(path);
}

void evaluate_cw(const std::vector<TimeSeriesTrace>& traces, MetricsReport& r) {
  for (const auto& t : traces) r.work_per_trial.push_back(cumulative_work(t));
  r.cumulative_work = aggregate(r.work_per_trial);
}

}  // namespace

MetricsReport evaluate(const ScenarioConfig& cfg, const std::vector<TimeSeriesTrace>& traces) {
  require(!traces.empty(), "no traces to evaluate");
  MetricsReport r;
  r.id = cfg.id;
  r.pair = cfg.pair;
  r.experiment = cfg.experiment;
  r.mode = cfg.mode;
  r.trials = static_cast<int>(traces.size());
  for (const auto& t : traces) require(!t.empty(), "empty trace");
  switch (cfg.experiment) {
    case Experiment::SS: evaluate_ss(cfg, traces, r); break;
    case Experiment::DH: {
      const Pose home = home_pose(cfg);
      evaluate_dh(cfg, make_profile(cfg, home), traces, r);
      break;
    }
    case Experiment::OS: {
      const Pose home = home_pose(cfg);
      evaluate_os(cfg, make_profile(cfg, home), traces, r);
      break;
    }
    case Experiment::CW: evaluate_cw(traces, r); break;
  }
  return r;
}

namespace {

ScenarioResult run_checked(const ScenarioConfig& cfg, Experiment expected) {
  if (cfg.experiment != expected) {
    throw ContractError("scenario '" + cfg.id + "' is a " + to_string(cfg.experiment) + " experiment, not " +
                        to_string(expected));
  }
  return run_scenario(cfg);
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult out;
  for (int k = 0; k < cfg.trials; ++k) out.traces.push_back(simulate_trial(cfg, k));
  out.report = evaluate(cfg, out.traces);
  return out;
}

ScenarioResult run_cumulative_work(const ScenarioConfig& cfg) { return run_checked(cfg, Experiment::CW); }
ScenarioResult run_obstruction_stability(const ScenarioConfig& cfg) { return run_checked(cfg, Experiment::OS); }
ScenarioResult run_settle_stability(const ScenarioConfig& cfg) { return run_checked(cfg, Experiment::SS); }
ScenarioResult run_disturbance_handling(const ScenarioConfig& cfg) { return run_checked(cfg, Experiment::DH); }

}  // namespace fdcc
