#pragma once

#include "fdcc/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fdcc {

/// Which per-trial CSVs run_suite writes.
enum class TraceOutput { None, First, All };

std::string to_string(TraceOutput t);
TraceOutput trace_output_from_string(const std::string& text);

/// A batch of scenarios plus the settings they share.
///
/// File grammar (see docs/suite_format.md): a preamble of `key = value`
/// lines, then `[defaults]`, `[defaults <experiment>]` and
/// `[scenario <id>]` sections. Scenario values are layered
/// built-in defaults → [defaults] → [defaults <experiment>] → [scenario].
/// `mode = both` expands into `<id>@velocity` and `<id>@position`.
struct ExperimentSuite {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  unsigned long long seed = 0;
  double controller_rate = 500.0;  // Hz
  std::string output_dir = "out";
  TraceOutput write_traces = TraceOutput::First;
  std::string chain_path;  // resolved; default chain when empty in the file
  std::vector<ScenarioConfig> scenarios;

  /// Throws ContractError naming the offending scenario and field.
  void validate() const;
  /// Pushes seed and rate into every scenario (after CLI overrides).
  void apply_globals();
};

/// Configuration error with the file and line it came from.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario preloaded with the per-experiment parameter table values.
ScenarioConfig default_scenario(Experiment e);

ExperimentSuite parse_suite(const std::string& path);
/// `base_dir` resolves relative chain paths.
ExperimentSuite parse_suite_text(const std::string& text, const std::string& source,
                                 const std::filesystem::path& base_dir);

/// Canonical text form; parse_suite_text(print_suite(s)) reproduces `s`.
std::string print_suite(const ExperimentSuite& suite);
/// `key = value` lines of every field that applies to the scenario's experiment.
std::string print_scenario_fields(const ScenarioConfig& cfg);

/// FNV-1a over the printed physical parameters (not id, mode or pair), the
/// chain file content, the seed and the controller rate. 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

// Reports ------------------------------------------------------------------

void write_report(std::ostream& out, const MetricsReport& r);
void write_report_file(const std::filesystem::path& path, const MetricsReport& r);
MetricsReport read_report(const std::string& text, const std::string& source);
MetricsReport read_report_file(const std::string& path);

/// Refusal to compare reports of different configurations.
class ComparisonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Ordering { Better, Tie, Worse };  // of velocity relative to position

struct MetricComparison {
  std::string name;
  Stats velocity;
  Stats position;
  double delta = 0.0;          // position − velocity
  double reduction_pct = 0.0;  // delta / position · 100; 0 when position is 0
  Ordering ordering = Ordering::Tie;
  bool flagged() const { return ordering != Ordering::Better; }
};

struct ModeComparison {
  std::string pair;
  std::string config_hash;
  std::vector<MetricComparison> metrics;
  /// Per-trial work reduction for CW pairs.
  std::vector<MetricComparison> work_trials;
};

/// Arguments may come in either order; one must be velocity, one position.
ModeComparison compare_modes(const MetricsReport& a, const MetricsReport& b);
std::string format_comparison(const ModeComparison& c);

// Running ------------------------------------------------------------------

struct RunOptions {
  int jobs = 1;
  bool quiet = false;
};

struct SuiteOutcome {
  std::vector<MetricsReport> reports;  // suite order
  std::vector<ModeComparison> comparisons;
  int exit_code = 0;  // 0 ok, 1 a scenario faulted
};

/// Runs every scenario, writes `<out>/<id>/trial_<k>.csv`, `<out>/<id>/report.kv`,
/// `<out>/summary.txt` and `<out>/summary.kv`.
SuiteOutcome run_suite(const ExperimentSuite& suite, const RunOptions& opts = {});

std::string format_summary(const SuiteOutcome& outcome);
std::string format_summary_kv(const SuiteOutcome& outcome);

}  // namespace fdcc
