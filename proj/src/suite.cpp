#include "fdcc/suite.hpp"

#include "fdcc/ini.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#ifndef FDCC_CONFIG_DIR
#define FDCC_CONFIG_DIR "config"
#endif

namespace fdcc {

namespace fs = std::filesystem;

std::string to_string(TraceOutput t) {
  switch (t) {
    case TraceOutput::None: return "none";
    case TraceOutput::First: return "first";
    case TraceOutput::All: return "all";
  }
  return "first";
}

TraceOutput trace_output_from_string(const std::string& text) {
  if (text == "none") return TraceOutput::None;
  if (text == "first") return TraceOutput::First;
  if (text == "all") return TraceOutput::All;
  throw ContractError("write_traces must be none, first or all (got '" + text + "')");
}

namespace {

// Values ----------------------------------------------------------------------

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class Vec>
std::string fmt_list(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(v.size()); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

double parse_double(const std::string& value) {
  const auto xs = ini::parse_numbers(value);
  if (xs.size() != 1) throw ContractError("expects one number");
  return xs.front();
}

VectorXd parse_vector(const std::string& value, Eigen::Index n) {
  const auto xs = ini::parse_numbers(value);
  if (n >= 0 && static_cast<Eigen::Index>(xs.size()) != n) {
    throw ContractError("expects " + std::to_string(n) + " numbers, got " + std::to_string(xs.size()));
  }
  if (xs.empty()) throw ContractError("expects at least one number");
  return Eigen::Map<const VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

int parse_int(const std::string& value) {
  const double d = parse_double(value);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ContractError("expects an integer");
  return static_cast<int>(d);
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ContractError("expects true or false");
}

// Field table -----------------------------------------------------------------

constexpr unsigned bit(Experiment e) { return 1u << static_cast<unsigned>(e); }
constexpr unsigned kAll = 0xF;
constexpr unsigned kSS = bit(Experiment::SS);
constexpr unsigned kDH = bit(Experiment::DH);
constexpr unsigned kOS = bit(Experiment::OS);
constexpr unsigned kCW = bit(Experiment::CW);
constexpr unsigned kContact = kSS | kDH | kOS;
constexpr unsigned kProfile = kDH | kOS;

struct Field {
  std::string key;
  unsigned mask;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  bool applies(Experiment e) const { return (mask & bit(e)) != 0; }
};

template <class T>
using Ref = T& (*)(ScenarioConfig&);

ScenarioConfig& mut(const ScenarioConfig& c) { return const_cast<ScenarioConfig&>(c); }

Field num(const char* key, unsigned mask, Ref<double> r) {
  return {key, mask, [r](const ScenarioConfig& c) { return fmt(r(mut(c))); },
          [r](ScenarioConfig& c, const std::string& v) { r(c) = parse_double(v); }};
}

Field integer(const char* key, unsigned mask, Ref<int> r) {
  return {key, mask, [r](const ScenarioConfig& c) { return std::to_string(r(mut(c))); },
          [r](ScenarioConfig& c, const std::string& v) { r(c) = parse_int(v); }};
}

Field vec3(const char* key, unsigned mask, Ref<Vector3d> r) {
  return {key, mask, [r](const ScenarioConfig& c) { return fmt_list(r(mut(c))); },
          [r](ScenarioConfig& c, const std::string& v) { r(c) = parse_vector(v, 3); }};
}

Field vec6(const char* key, unsigned mask, Ref<Vector6d> r) {
  return {key, mask, [r](const ScenarioConfig& c) { return fmt_list(r(mut(c))); },
          [r](ScenarioConfig& c, const std::string& v) { r(c) = parse_vector(v, 6); }};
}

// Diagonal inertia given as three principal values.
Field diag(const char* key, unsigned mask, Ref<Matrix3d> r) {
  return {key, mask, [r](const ScenarioConfig& c) { return fmt_list(Vector3d(r(mut(c)).diagonal())); },
          [r](ScenarioConfig& c, const std::string& v) { r(c) = Vector3d(parse_vector(v, 3)).asDiagonal(); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(integer("trials", kAll, [](ScenarioConfig& c) -> int& { return c.trials; }));
    f.push_back(num("duration", kAll, [](ScenarioConfig& c) -> double& { return c.duration; }));
    f.push_back(num("probe_length", kAll, [](ScenarioConfig& c) -> double& { return c.probe_length; }));
    f.push_back(num("tip_radius", kAll, [](ScenarioConfig& c) -> double& { return c.tip_radius; }));
    f.push_back({"home_q", kAll, [](const ScenarioConfig& c) { return fmt_list(c.home_q); },
                 [](ScenarioConfig& c, const std::string& v) { c.home_q = parse_vector(v, -1); }});

    f.push_back(vec3("compliance.k_trans", kAll, [](ScenarioConfig& c) -> Vector3d& { return c.compliance.k_trans; }));
    f.push_back(vec3("compliance.k_rot", kAll, [](ScenarioConfig& c) -> Vector3d& { return c.compliance.k_rot; }));
    f.push_back(vec6("compliance.p_gains", kAll, [](ScenarioConfig& c) -> Vector6d& { return c.compliance.p_gains; }));
    f.push_back(vec6("compliance.d_gains", kAll, [](ScenarioConfig& c) -> Vector6d& { return c.compliance.d_gains; }));
    f.push_back(vec6("compliance.cartesian_damping", kAll,
                     [](ScenarioConfig& c) -> Vector6d& { return c.compliance.cartesian_damping; }));
    f.push_back(num("compliance.derivative_cutoff_hz", kAll,
                    [](ScenarioConfig& c) -> double& { return c.compliance.derivative_cutoff_hz; }));
    f.push_back({"compliance.frame", kAll,
                 [](const ScenarioConfig& c) {
                   return std::string(c.compliance.frame == ComplianceFrame::Base ? "base" : "tool");
                 },
                 [](ScenarioConfig& c, const std::string& v) {
                   if (v == "base") c.compliance.frame = ComplianceFrame::Base;
                   else if (v == "tool") c.compliance.frame = ComplianceFrame::Tool;
                   else throw ContractError("expects base or tool");
                 }});

    f.push_back(num("inertia.end_mass", kAll, [](ScenarioConfig& c) -> double& { return c.inertia.end_mass; }));
    f.push_back(diag("inertia.end_inertia", kAll, [](ScenarioConfig& c) -> Matrix3d& { return c.inertia.end_inertia; }));
    f.push_back(num("inertia.link_mass", kAll, [](ScenarioConfig& c) -> double& { return c.inertia.link_mass; }));
    f.push_back(
        diag("inertia.link_inertia", kAll, [](ScenarioConfig& c) -> Matrix3d& { return c.inertia.link_inertia; }));
    f.push_back(
        num("velocity_retention", kAll, [](ScenarioConfig& c) -> double& { return c.velocity_retention; }));

    f.push_back(num("servo.velocity_bandwidth", kAll,
                    [](ScenarioConfig& c) -> double& { return c.servo.velocity_bandwidth; }));
    f.push_back(num("servo.position_stiffness", kAll,
                    [](ScenarioConfig& c) -> double& { return c.servo.position_stiffness; }));
    f.push_back(
        num("servo.position_damping", kAll, [](ScenarioConfig& c) -> double& { return c.servo.position_damping; }));
    f.push_back(num("servo.velocity_limit", kAll, [](ScenarioConfig& c) -> double& { return c.servo.velocity_limit; }));
    f.push_back(num("servo.acceleration_limit", kAll,
                    [](ScenarioConfig& c) -> double& { return c.servo.acceleration_limit; }));

    f.push_back(num("contact.stiffness", kContact, [](ScenarioConfig& c) -> double& { return c.contact.stiffness; }));
    f.push_back(num("contact.damping", kContact, [](ScenarioConfig& c) -> double& { return c.contact.damping; }));
    f.push_back(num("contact.friction", kContact, [](ScenarioConfig& c) -> double& { return c.contact.friction; }));

    f.push_back(
        vec3("sensor.force_noise_std", kAll, [](ScenarioConfig& c) -> Vector3d& { return c.sensor.force_noise_std; }));
    f.push_back(vec3("sensor.torque_noise_std", kAll,
                     [](ScenarioConfig& c) -> Vector3d& { return c.sensor.torque_noise_std; }));
    f.push_back(vec3("sensor.force_bias", kAll, [](ScenarioConfig& c) -> Vector3d& { return c.sensor.bias.force; }));
    f.push_back(vec3("sensor.torque_bias", kAll, [](ScenarioConfig& c) -> Vector3d& { return c.sensor.bias.torque; }));
    f.push_back(num("sensor.sample_rate", kAll, [](ScenarioConfig& c) -> double& { return c.sensor.sample_rate; }));

    f.push_back(
        num("settle.onset_threshold", kSS, [](ScenarioConfig& c) -> double& { return c.settle.onset_threshold; }));
    f.push_back(num("settle.band_fraction", kSS, [](ScenarioConfig& c) -> double& { return c.settle.band_fraction; }));
    f.push_back(num("settle.dwell", kSS, [](ScenarioConfig& c) -> double& { return c.settle.dwell; }));
    f.push_back(
        num("settle.window_fraction", kSS, [](ScenarioConfig& c) -> double& { return c.settle.window_fraction; }));

    f.push_back(num("profile.lead_back", kProfile, [](ScenarioConfig& c) -> double& { return c.profile.lead_back; }));
    f.push_back(num("profile.lead_in", kProfile, [](ScenarioConfig& c) -> double& { return c.profile.lead_in; }));
    f.push_back(num("profile.p1_length", kProfile, [](ScenarioConfig& c) -> double& { return c.profile.p1_length; }));
    f.push_back(num("profile.p2_length", kProfile, [](ScenarioConfig& c) -> double& { return c.profile.p2_length; }));
    f.push_back(num("profile.p3_length", kProfile, [](ScenarioConfig& c) -> double& { return c.profile.p3_length; }));
    f.push_back(num("profile.lead_out", kProfile, [](ScenarioConfig& c) -> double& { return c.profile.lead_out; }));
    f.push_back(
        num("profile.p1_angle_deg", kProfile, [](ScenarioConfig& c) -> double& { return c.profile.p1_angle_deg; }));
    f.push_back(
        num("profile.p2_angle_deg", kProfile, [](ScenarioConfig& c) -> double& { return c.profile.p2_angle_deg; }));
    f.push_back(
        num("profile.p3_angle_deg", kProfile, [](ScenarioConfig& c) -> double& { return c.profile.p3_angle_deg; }));
    f.push_back(num("profile.width", kProfile, [](ScenarioConfig& c) -> double& { return c.profile.width; }));

    f.push_back(vec3("ss.direction", kSS, [](ScenarioConfig& c) -> Vector3d& { return c.ss.direction; }));
    f.push_back(num("ss.force", kSS, [](ScenarioConfig& c) -> double& { return c.ss.force; }));
    f.push_back(num("ss.gap", kSS, [](ScenarioConfig& c) -> double& { return c.ss.gap; }));

    f.push_back(num("dh.force", kDH, [](ScenarioConfig& c) -> double& { return c.dh.force; }));
    f.push_back(num("dh.speed", kDH, [](ScenarioConfig& c) -> double& { return c.dh.speed; }));
    f.push_back(num("dh.preload_time", kDH, [](ScenarioConfig& c) -> double& { return c.dh.preload_time; }));
    f.push_back(num("dh.path_end", kDH, [](ScenarioConfig& c) -> double& { return c.dh.path_end; }));

    f.push_back(num("os.speed", kOS, [](ScenarioConfig& c) -> double& { return c.os.speed; }));
    f.push_back(num("os.depth", kOS, [](ScenarioConfig& c) -> double& { return c.os.depth; }));
    f.push_back(num("os.path_end", kOS, [](ScenarioConfig& c) -> double& { return c.os.path_end; }));
    f.push_back(num("os.marker_c", kOS, [](ScenarioConfig& c) -> double& { return c.os.marker_c; }));
    f.push_back(num("os.marker_d", kOS, [](ScenarioConfig& c) -> double& { return c.os.marker_d; }));
    f.push_back({"os.artefact", kOS, [](const ScenarioConfig& c) { return std::string(c.os.artefact ? "true" : "false"); },
                 [](ScenarioConfig& c, const std::string& v) { c.os.artefact = parse_bool(v); }});

    f.push_back({"cw.operator", kCW,
                 [](const ScenarioConfig& c) {
                   return std::string(c.cw.operator_model == OperatorModel::Impedance ? "impedance" : "force");
                 },
                 [](ScenarioConfig& c, const std::string& v) {
                   if (v == "impedance") c.cw.operator_model = OperatorModel::Impedance;
                   else if (v == "force") c.cw.operator_model = OperatorModel::Force;
                   else throw ContractError("expects impedance or force");
                 }});
    f.push_back(vec3("cw.axis", kCW, [](ScenarioConfig& c) -> Vector3d& { return c.cw.axis; }));
    f.push_back(num("cw.stroke", kCW, [](ScenarioConfig& c) -> double& { return c.cw.stroke; }));
    f.push_back(integer("cw.cycles", kCW, [](ScenarioConfig& c) -> int& { return c.cw.cycles; }));
    f.push_back({"cw.stroke_times", kCW,
                 [](const ScenarioConfig& c) {
                   return fmt_list(Eigen::Map<const VectorXd>(c.cw.stroke_times.data(),
                                                              static_cast<Eigen::Index>(c.cw.stroke_times.size())));
                 },
                 [](ScenarioConfig& c, const std::string& v) {
                   const VectorXd x = parse_vector(v, -1);
                   c.cw.stroke_times.assign(x.data(), x.data() + x.size());
                 }});
    f.push_back(num("cw.dwell", kCW, [](ScenarioConfig& c) -> double& { return c.cw.dwell; }));
    f.push_back(num("cw.hand_stiffness", kCW, [](ScenarioConfig& c) -> double& { return c.cw.hand_stiffness; }));
    f.push_back(num("cw.hand_damping", kCW, [](ScenarioConfig& c) -> double& { return c.cw.hand_damping; }));
    f.push_back(num("cw.force_amplitude", kCW, [](ScenarioConfig& c) -> double& { return c.cw.force_amplitude; }));
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const Field& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

// Parsing ---------------------------------------------------------------------

std::string where(const std::string& source, int line) { return source + ":" + std::to_string(line) + ": "; }

[[noreturn]] void fail(const std::string& source, int line, const std::string& message) {
  throw ConfigError(where(source, line) + message);
}

enum class Strictness { SkipForeign, RejectForeign };

void apply_entries(ScenarioConfig& cfg, const std::vector<ini::Entry>& entries, const std::string& source,
                   Strictness strict) {
  static const std::set<std::string> reserved = {"experiment", "mode", "pair"};
  for (const ini::Entry& e : entries) {
    if (reserved.contains(e.key)) continue;
    const Field* f = find_field(e.key);
    if (!f) fail(source, e.line, "unknown key '" + e.key + "'");
    if (!f->applies(cfg.experiment)) {
      if (strict == Strictness::SkipForeign) continue;
      fail(source, e.line, "key '" + e.key + "' does not apply to " + to_string(cfg.experiment) + " scenarios");
    }
    try {
      f->set(cfg, e.value);
    } catch (const ContractError& err) {
      fail(source, e.line, "'" + e.key + "' " + err.what());
    }
  }
}

const ini::Entry* find_entry(const ini::Section& s, const std::string& key) {
  for (const auto& e : s.entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

// Line of the last entry whose key ends in a field name quoted in `message`.
int blame_line(const std::vector<const ini::Section*>& layers, const std::string& message, int fallback) {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    const auto& entries = (*it)->entries;
    for (auto e = entries.rbegin(); e != entries.rend(); ++e) {
      const std::string leaf = e->key.substr(e->key.rfind('.') + 1);
      if (message.find("'" + leaf + "'") != std::string::npos || message.find("'" + e->key + "'") != std::string::npos) {
        return e->line;
      }
    }
  }
  return fallback;
}

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '@';
  });
}

std::string default_chain() { return (fs::path(FDCC_CONFIG_DIR) / "ur10e.chain").string(); }

}  // namespace

ScenarioConfig default_scenario(Experiment e) {
  ScenarioConfig c;
  c.experiment = e;
  const double pi = std::numbers::pi;
  c.home_q.resize(6);
  c.home_q << 0.0, -pi / 2, pi / 2, -pi / 2, -pi / 2, 0.0;
  c.chain_path = default_chain();
  auto& k = c.compliance;
  k.k_rot = Vector3d::Constant(200.0);
  if (e == Experiment::CW) {
    k.p_gains << 0.02, 0.02, 0.02, 0.3, 0.3, 0.3;
    k.d_gains << 0.0002, 0.0002, 0.0002, 0.002, 0.002, 0.002;
  } else {
    k.p_gains << 0.0025, 0.0025, 0.0025, 0.035, 0.035, 0.035;
    k.d_gains << 0.000025, 0.000025, 0.000025, 0.00025, 0.00025, 0.00025;
  }
  k.k_trans = (e == Experiment::CW || e == Experiment::OS) ? Vector3d(250.0, 250.0, 100.0) : Vector3d::Constant(1500.0);
  switch (e) {
    case Experiment::SS: c.duration = 15.0; break;
    case Experiment::DH: c.duration = c.dh.preload_time + c.dh.path_end / c.dh.speed + 2.0; break;
    case Experiment::OS: c.duration = 120.0; break;
    case Experiment::CW: c.duration = 30.0; break;
  }
  return c;
}

void ExperimentSuite::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ContractError("unsupported schema_version " + std::to_string(schema_version));
  }
  if (!(controller_rate > 0.0 && std::isfinite(controller_rate))) {
    throw ContractError("'controller_rate' must be positive");
  }
  std::set<std::string> ids;
  for (const auto& s : scenarios) {
    if (!ids.insert(s.id).second) throw ContractError("duplicate scenario id '" + s.id + "'");
    try {
      s.validate();
    } catch (const ContractError& e) {
      throw ContractError("scenario '" + s.id + "': " + e.what());
    }
  }
}

void ExperimentSuite::apply_globals() {
  for (auto& s : scenarios) {
    s.seed = seed;
    s.dt = 1.0 / controller_rate;
    if (!chain_path.empty()) s.chain_path = chain_path;
  }
}

ExperimentSuite parse_suite_text(const std::string& text, const std::string& source, const fs::path& base_dir) {
  std::vector<ini::Section> sections;
  try {
    sections = ini::parse(text, source);
  } catch (const ini::ParseError& e) {
    throw ConfigError(e.what());
  }

  ExperimentSuite suite;
  bool have_version = false;
  std::vector<const ini::Section*> defaults_all;
  std::map<Experiment, std::vector<const ini::Section*>> defaults_exp;
  std::vector<const ini::Section*> scenario_sections;

  for (const ini::Section& s : sections) {
    if (s.kind.empty()) {
      for (const ini::Entry& e : s.entries) {
        try {
          if (e.key == "schema_version") {
            suite.schema_version = parse_int(e.value);
            have_version = true;
          } else if (e.key == "seed") {
            const double v = parse_double(e.value);
            if (v < 0 || v != std::floor(v) || v > 9.007199254740992e15) throw ContractError("expects a non-negative integer");
            suite.seed = static_cast<unsigned long long>(v);
          } else if (e.key == "controller_rate") {
            suite.controller_rate = parse_double(e.value);
          } else if (e.key == "output_dir") {
            suite.output_dir = e.value;
          } else if (e.key == "write_traces") {
            suite.write_traces = trace_output_from_string(e.value);
          } else if (e.key == "chain") {
            const fs::path p(e.value);
            suite.chain_path = (p.is_absolute() ? p : base_dir / p).lexically_normal().string();
          } else {
            fail(source, e.line, "unknown key '" + e.key + "'");
          }
        } catch (const ContractError& err) {
          fail(source, e.line, "'" + e.key + "' " + err.what());
        }
      }
    } else if (s.kind == "defaults") {
      if (s.name.empty()) {
        defaults_all.push_back(&s);
      } else {
        try {
          defaults_exp[experiment_from_string(s.name)].push_back(&s);
        } catch (const ContractError& err) {
          fail(source, s.line, err.what());
        }
      }
    } else if (s.kind == "scenario") {
      if (!valid_id(s.name)) fail(source, s.line, "scenario id '" + s.name + "' is empty or has invalid characters");
      scenario_sections.push_back(&s);
    } else {
      fail(source, s.line, "unknown section kind '" + s.kind + "'");
    }
  }
  if (!have_version) fail(source, 1, "missing schema_version");
  if (suite.schema_version != ExperimentSuite::kSchemaVersion) {
    fail(source, 1, "unsupported schema_version " + std::to_string(suite.schema_version));
  }
  if (!(suite.controller_rate > 0.0)) fail(source, 1, "'controller_rate' must be positive");

  std::set<std::string> ids;
  for (const ini::Section* s : scenario_sections) {
    const ini::Entry* exp_entry = find_entry(*s, "experiment");
    if (!exp_entry) fail(source, s->line, "scenario '" + s->name + "' has no experiment");
    Experiment exp;
    try {
      exp = experiment_from_string(exp_entry->value);
    } catch (const ContractError& err) {
      fail(source, exp_entry->line, err.what());
    }

    ScenarioConfig cfg = default_scenario(exp);
    for (const auto* d : defaults_all) apply_entries(cfg, d->entries, source, Strictness::SkipForeign);
    for (const auto* d : defaults_exp[exp]) apply_entries(cfg, d->entries, source, Strictness::RejectForeign);
    apply_entries(cfg, s->entries, source, Strictness::RejectForeign);

    std::string mode_text = "both";
    if (const auto* m = find_entry(*s, "mode")) mode_text = m->value;
    const ini::Entry* pair_entry = find_entry(*s, "pair");
    std::vector<Mode> modes;
    if (mode_text == "both") {
      modes = {Mode::Velocity, Mode::Position};
    } else {
      try {
        modes = {mode_from_string(mode_text)};
      } catch (const ContractError& err) {
        fail(source, find_entry(*s, "mode")->line, err.what());
      }
    }

    for (Mode m : modes) {
      ScenarioConfig c = cfg;
      c.mode = m;
      c.id = modes.size() == 2 ? s->name + "@" + to_string(m) : s->name;
      c.pair = pair_entry ? pair_entry->value : s->name;
      c.seed = suite.seed;
      c.dt = 1.0 / suite.controller_rate;
      c.chain_path = suite.chain_path.empty() ? default_chain() : suite.chain_path;
      if (!ids.insert(c.id).second) fail(source, s->line, "duplicate scenario id '" + c.id + "'");
      try {
        c.validate();
      } catch (const ContractError& err) {
        std::vector<const ini::Section*> layers = defaults_all;
        layers.insert(layers.end(), defaults_exp[exp].begin(), defaults_exp[exp].end());
        layers.push_back(s);
        fail(source, blame_line(layers, err.what(), s->line), "scenario '" + c.id + "': " + err.what());
      }
      suite.scenarios.push_back(std::move(c));
    }
  }
  if (suite.chain_path.empty()) suite.chain_path = default_chain();
  return suite;
}

ExperimentSuite parse_suite(const std::string& path) {
  std::string text;
  try {
    text = ini::read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_suite_text(text, path, fs::path(path).parent_path());
}

std::string print_scenario_fields(const ScenarioConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) {
    if (f.applies(cfg.experiment)) out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::string print_suite(const ExperimentSuite& suite) {
  std::ostringstream out;
  out << "schema_version = " << suite.schema_version << "\n"
      << "seed = " << suite.seed << "\n"
      << "controller_rate = " << fmt(suite.controller_rate) << "\n"
      << "output_dir = " << suite.output_dir << "\n"
      << "write_traces = " << to_string(suite.write_traces) << "\n"
      << "chain = " << (suite.chain_path.empty() ? default_chain() : suite.chain_path) << "\n";
  for (const auto& s : suite.scenarios) {
    out << "\n[scenario " << s.id << "]\n"
        << "experiment = " << to_string(s.experiment) << "\n"
        << "mode = " << to_string(s.mode) << "\n"
        << "pair = " << s.pair << "\n"
        << print_scenario_fields(s);
  }
  return out.str();
}

std::string config_hash(const ScenarioConfig& cfg) {
  std::string text = "experiment = " + to_string(cfg.experiment) + "\n" + print_scenario_fields(cfg);
  text += "seed = " + std::to_string(cfg.seed) + "\n";
  text += "dt = " + fmt(cfg.dt) + "\n";
  text += "chain:\n" + ini::read_file(cfg.chain_path);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

// Reports ---------------------------------------------------------------------

namespace {

std::vector<std::pair<std::string, std::optional<Stats> MetricsReport::*>> metric_members() {
  return {{"overshoot", &MetricsReport::overshoot},
          {"settling_time", &MetricsReport::settling_time},
          {"steady_state_error", &MetricsReport::steady_state_error},
          {"total_rmse", &MetricsReport::total_rmse},
          {"controller_rmse", &MetricsReport::controller_rmse},
          {"cumulative_work", &MetricsReport::cumulative_work},
          {"time_to_goal", &MetricsReport::time_to_goal},
          {"peak_force", &MetricsReport::peak_force},
          {"max_force_rate", &MetricsReport::max_force_rate},
          {"contact_losses", &MetricsReport::contact_losses},
          {"path_error", &MetricsReport::path_error}};
}

// Diagnostics travel as single-line values without comment characters.
std::string flatten(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r' || c == '#' || c == ';') c = ' ';
  }
  return ini::trim(s);
}

}  // namespace

void write_report(std::ostream& out, const MetricsReport& r) {
  out << "id = " << r.id << "\n"
      << "pair = " << r.pair << "\n"
      << "experiment = " << to_string(r.experiment) << "\n"
      << "mode = " << to_string(r.mode) << "\n"
      << "config_hash = " << r.config_hash << "\n"
      << "trials = " << r.trials << "\n"
      << "fault = " << (r.fault ? "true" : "false") << "\n";
  for (const auto& [name, member] : metric_members()) {
    const auto& s = r.*member;
    if (!s) continue;
    out << "metric." << name << ".mean = " << fmt(s->mean) << "\n"
        << "metric." << name << ".sd = " << fmt(s->sd) << "\n"
        << "metric." << name << ".count = " << s->count << "\n";
  }
  if (!r.work_per_trial.empty()) {
    out << "work_per_trial = "
        << fmt_list(Eigen::Map<const VectorXd>(r.work_per_trial.data(),
                                               static_cast<Eigen::Index>(r.work_per_trial.size())))
        << "\n";
  }
  for (std::size_t i = 0; i < r.diagnostics.size(); ++i) {
    out << "diagnostic." << i << " = " << flatten(r.diagnostics[i]) << "\n";
  }
}

void write_report_file(const fs::path& path, const MetricsReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_report(out, r);
  if (!out) throw std::runtime_error("error while writing '" + path.string() + "'");
}

MetricsReport read_report(const std::string& text, const std::string& source) {
  std::vector<ini::Section> sections;
  try {
    sections = ini::parse(text, source);
  } catch (const ini::ParseError& e) {
    throw ConfigError(e.what());
  }
  if (sections.size() != 1) fail(source, sections[1].line, "report files have no sections");
  MetricsReport r;
  std::map<std::string, std::map<std::string, std::string>> metric_parts;
  std::map<int, std::string> diags;
  bool have_id = false, have_hash = false;
  for (const ini::Entry& e : sections.front().entries) {
    try {
      if (e.key == "id") {
        r.id = e.value;
        have_id = true;
      } else if (e.key == "pair") {
        r.pair = e.value;
      } else if (e.key == "experiment") {
        r.experiment = experiment_from_string(e.value);
      } else if (e.key == "mode") {
        r.mode = mode_from_string(e.value);
      } else if (e.key == "config_hash") {
        r.config_hash = e.value;
        have_hash = true;
      } else if (e.key == "trials") {
        r.trials = parse_int(e.value);
      } else if (e.key == "fault") {
        r.fault = parse_bool(e.value);
      } else if (e.key == "work_per_trial") {
        const VectorXd w = parse_vector(e.value, -1);
        r.work_per_trial.assign(w.data(), w.data() + w.size());
      } else if (e.key.starts_with("metric.")) {
        const auto dot = e.key.rfind('.');
        metric_parts[e.key.substr(7, dot - 7)][e.key.substr(dot + 1)] = e.value;
      } else if (e.key.starts_with("diagnostic.")) {
        diags[parse_int(e.key.substr(11))] = e.value;
      } else {
        fail(source, e.line, "unknown report key '" + e.key + "'");
      }
    } catch (const ContractError& err) {
      fail(source, e.line, "'" + e.key + "' " + err.what());
    }
  }
  if (!have_id || !have_hash) fail(source, 1, "report lacks id or config_hash");
  const auto members = metric_members();
  for (const auto& [name, parts] : metric_parts) {
    auto it = std::find_if(members.begin(), members.end(), [&](const auto& m) { return m.first == name; });
    if (it == members.end()) fail(source, 1, "unknown metric '" + name + "'");
    if (!parts.contains("mean") || !parts.contains("sd") || !parts.contains("count")) {
      fail(source, 1, "metric '" + name + "' needs mean, sd and count");
    }
    Stats s;
    try {
      s.mean = parse_double(parts.at("mean"));
      s.sd = parse_double(parts.at("sd"));
      s.count = parse_int(parts.at("count"));
    } catch (const ContractError& err) {
      fail(source, 1, "metric '" + name + "': " + err.what());
    }
    r.*(it->second) = s;
  }
  for (const auto& [k, d] : diags) r.diagnostics.push_back(d);
  return r;
}

MetricsReport read_report_file(const std::string& path) {
  std::string text;
  try {
    text = ini::read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return read_report(text, path);
}

// Comparison ------------------------------------------------------------------

namespace {

MetricComparison compare_one(const std::string& name, const Stats& v, const Stats& p) {
  MetricComparison m;
  m.name = name;
  m.velocity = v;
  m.position = p;
  m.delta = p.mean - v.mean;
  m.reduction_pct = p.mean != 0.0 ? 100.0 * m.delta / p.mean : 0.0;
  m.ordering = v.mean < p.mean ? Ordering::Better : (v.mean == p.mean ? Ordering::Tie : Ordering::Worse);
  return m;
}

}  // namespace

ModeComparison compare_modes(const MetricsReport& a, const MetricsReport& b) {
  if (a.config_hash != b.config_hash) {
    throw ComparisonError("refusing to compare '" + a.id + "' and '" + b.id + "': config hash " + a.config_hash +
                          " differs from " + b.config_hash);
  }
  if (a.mode == b.mode) {
    throw ComparisonError("refusing to compare '" + a.id + "' and '" + b.id + "': both are " + to_string(a.mode) +
                          " mode");
  }
  const MetricsReport& vel = a.mode == Mode::Velocity ? a : b;
  const MetricsReport& pos = a.mode == Mode::Velocity ? b : a;
  ModeComparison c;
  c.pair = vel.pair.empty() ? vel.id : vel.pair;
  c.config_hash = vel.config_hash;
  for (const auto& [name, member] : metric_members()) {
    const auto& v = vel.*member;
    const auto& p = pos.*member;
    if (v && p) c.metrics.push_back(compare_one(name, *v, *p));
  }
  if (vel.work_per_trial.size() == pos.work_per_trial.size()) {
    for (std::size_t k = 0; k < vel.work_per_trial.size(); ++k) {
      Stats v{vel.work_per_trial[k], 0.0, 1};
      Stats p{pos.work_per_trial[k], 0.0, 1};
      c.work_trials.push_back(compare_one("work_trial_" + std::to_string(k + 1), v, p));
    }
  }
  return c;
}

namespace {

std::string pm(const Stats& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g ± %.2g", s.mean, s.sd);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  // '±' is two bytes but one column.
  std::size_t cols = 0;
  for (unsigned char ch : s) cols += (ch & 0xC0) != 0x80;
  return s + std::string(width > cols ? width - cols : 0, ' ');
}

const char* verdict(Ordering o) {
  switch (o) {
    case Ordering::Better: return "velocity lower";
    case Ordering::Tie: return "tie  <- flagged";
    case Ordering::Worse: return "velocity higher  <- flagged";
  }
  return "";
}

}  // namespace

std::string format_comparison(const ModeComparison& c) {
  std::ostringstream out;
  out << "pair " << c.pair << " (config " << c.config_hash << ")\n";
  out << "  " << pad("metric", 20) << pad("velocity", 22) << pad("position", 22) << pad("pos - vel", 14)
      << pad("reduction", 12) << "\n";
  auto row = [&](const MetricComparison& m) {
    char d[32], r[32];
    std::snprintf(d, sizeof d, "%.4g", m.delta);
    std::snprintf(r, sizeof r, "%.2f%%", m.reduction_pct);
    out << "  " << pad(m.name, 20) << pad(pm(m.velocity), 22) << pad(pm(m.position), 22) << pad(d, 14) << pad(r, 12)
        << verdict(m.ordering) << "\n";
  };
  for (const auto& m : c.metrics) row(m);
  for (const auto& m : c.work_trials) row(m);
  return out.str();
}

// Running ---------------------------------------------------------------------

namespace {

struct Job {
  MetricsReport report;
  std::string error;  // I/O failure; aborts the suite
};

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + p.string() + "': " + ec.message());
}

MetricsReport run_one(const ScenarioConfig& cfg, const fs::path& out_dir, TraceOutput traces) {
  MetricsReport report;
  std::vector<TimeSeriesTrace> kept;
  try {
    ScenarioResult res = run_scenario(cfg);
    report = std::move(res.report);
    kept = std::move(res.traces);
  } catch (const SimulationFault& e) {
    report.id = cfg.id;
    report.pair = cfg.pair;
    report.experiment = cfg.experiment;
    report.mode = cfg.mode;
    report.trials = cfg.trials;
    report.fault = true;
    report.diagnostics.push_back(std::string("fault: ") + e.what());
  }
  report.config_hash = config_hash(cfg);

  const fs::path dir = out_dir / cfg.id;
  ensure_dir(dir);
  const std::size_t n = traces == TraceOutput::None ? 0 : traces == TraceOutput::First ? 1 : kept.size();
  for (std::size_t k = 0; k < std::min(n, kept.size()); ++k) {
    write_csv_file((dir / ("trial_" + std::to_string(k) + ".csv")).string(), kept[k]);
  }
  write_report_file(dir / "report.kv", report);
  return report;
}

}  // namespace

SuiteOutcome run_suite(const ExperimentSuite& suite, const RunOptions& opts) {
  suite.validate();
  const fs::path out_dir(suite.output_dir);
  ensure_dir(out_dir);

  const std::size_t n = suite.scenarios.size();
  std::vector<Job> jobs(n);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& cfg = suite.scenarios[i];
      try {
        jobs[i].report = run_one(cfg, out_dir, suite.write_traces);
      } catch (const std::exception& e) {
        jobs[i].error = cfg.id + ": " + e.what();
      }
      if (!opts.quiet) {
        std::lock_guard lock(log_mutex);
        std::cerr << "[" << cfg.id << "] " << (jobs[i].error.empty() ? (jobs[i].report.fault ? "FAULT" : "done") : "ERROR")
                  << "\n";
      }
    }
  };
  const int workers = std::clamp(opts.jobs, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  for (const Job& j : jobs) {
    if (!j.error.empty()) throw std::runtime_error(j.error);
  }

  SuiteOutcome outcome;
  for (Job& j : jobs) {
    if (j.report.fault) outcome.exit_code = 1;
    outcome.reports.push_back(std::move(j.report));
  }
  // Pairs in order of first appearance.
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < outcome.reports.size(); ++i) {
    const auto& a = outcome.reports[i];
    if (a.fault || std::find(seen.begin(), seen.end(), a.pair) != seen.end()) continue;
    for (std::size_t j = i + 1; j < outcome.reports.size(); ++j) {
      const auto& b = outcome.reports[j];
      if (b.pair == a.pair && !b.fault && b.mode != a.mode) {
        seen.push_back(a.pair);
        outcome.comparisons.push_back(compare_modes(a, b));
        break;
      }
    }
  }

  auto write_text = [&](const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  };
  write_text(out_dir / "summary.txt", format_summary(outcome));
  write_text(out_dir / "summary.kv", format_summary_kv(outcome));
  return outcome;
}

std::string format_summary(const SuiteOutcome& outcome) {
  std::ostringstream out;
  out << pad("scenario", 26) << pad("exp", 5) << pad("mode", 10) << pad("metric", 20) << pad("mean ± sd", 22) << "n\n";
  for (const auto& r : outcome.reports) {
    const auto entries = r.entries();
    if (r.fault || entries.empty()) {
      out << pad(r.id, 26) << pad(to_string(r.experiment), 5) << pad(to_string(r.mode), 10)
          << (r.fault ? "FAULT" : "no metrics") << "\n";
    }
    for (const auto& e : entries) {
      out << pad(r.id, 26) << pad(to_string(r.experiment), 5) << pad(to_string(r.mode), 10) << pad(e.name, 20)
          << pad(pm(e.value), 22) << e.value.count << "\n";
    }
    for (const auto& d : r.diagnostics) out << "  note " << r.id << ": " << d << "\n";
  }
  if (!outcome.comparisons.empty()) out << "\nmode comparisons (lower is better for every metric)\n";
  for (const auto& c : outcome.comparisons) out << "\n" << format_comparison(c);
  return out.str();
}

std::string format_summary_kv(const SuiteOutcome& outcome) {
  std::ostringstream out;
  out << "scenarios = " << outcome.reports.size() << "\n";
  out << "exit_code = " << outcome.exit_code << "\n";
  for (const auto& r : outcome.reports) {
    out << r.id << ".config_hash = " << r.config_hash << "\n";
    out << r.id << ".fault = " << (r.fault ? "true" : "false") << "\n";
    for (const auto& e : r.entries()) {
      out << r.id << "." << e.name << ".mean = " << fmt(e.value.mean) << "\n";
      out << r.id << "." << e.name << ".sd = " << fmt(e.value.sd) << "\n";
    }
  }
  for (const auto& c : outcome.comparisons) {
    for (const auto* list : {&c.metrics, &c.work_trials}) {
      for (const auto& m : *list) {
        out << c.pair << "." << m.name << ".reduction_pct = " << fmt(m.reduction_pct) << "\n";
        out << c.pair << "." << m.name << ".velocity_lower = " << (m.ordering == Ordering::Better ? "true" : "false")
            << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace fdcc
