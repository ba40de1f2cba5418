// Command-line front end: run, validate, compare, plot.

#include "fdcc/ini.hpp"
#include "fdcc/suite.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace fdcc;

namespace {

constexpr int kOk = 0;
constexpr int kFault = 1;
constexpr int kConfig = 2;

struct Overrides {
  std::optional<unsigned long long> seed;
  std::optional<double> rate;
  std::optional<std::string> out;
};

ExperimentSuite load(const std::string& path, const Overrides& o) {
  ExperimentSuite suite = parse_suite(path);
  if (o.seed) suite.seed = *o.seed;
  if (o.rate) suite.controller_rate = *o.rate;
  if (o.out) suite.output_dir = *o.out;
  suite.apply_globals();
  suite.validate();
  return suite;
}

int cmd_run(const std::string& path, const Overrides& o, int jobs, bool quiet) {
  const ExperimentSuite suite = load(path, o);
  RunOptions opts;
  opts.jobs = jobs;
  opts.quiet = quiet;
  const SuiteOutcome outcome = run_suite(suite, opts);
  std::cout << format_summary(outcome);
  std::cout << "\nwrote " << (fs::path(suite.output_dir) / "summary.txt").string() << "\n";
  return outcome.exit_code == 0 ? kOk : kFault;
}

int cmd_validate(const std::string& path, const Overrides& o, bool print) {
  const ExperimentSuite suite = load(path, o);
  if (print) {
    std::cout << print_suite(suite);
    return kOk;
  }
  std::cout << path << ": " << suite.scenarios.size() << " scenario(s) valid\n";
  for (const auto& s : suite.scenarios) {
    std::cout << "  " << s.id << "  " << to_string(s.experiment) << "/" << to_string(s.mode) << "  trials=" << s.trials
              << "  duration=" << s.duration << " s  hash=" << config_hash(s) << "\n";
  }
  return kOk;
}

int cmd_compare(const std::string& a, const std::string& b) {
  const ModeComparison c = compare_modes(read_report_file(a), read_report_file(b));
  std::cout << format_comparison(c);
  return kOk;
}

// Gnuplot script plus whitespace-separated data next to it.
int cmd_plot(const std::string& csv, const std::optional<std::string>& out) {
  const TimeSeriesTrace trace = read_csv_file(csv);
  const fs::path dir = out ? fs::path(*out) : fs::path(csv).parent_path();
  std::error_code ec;
  fs::create_directories(dir.empty() ? fs::path(".") : dir, ec);
  const std::string stem = fs::path(csv).stem().string();
  const fs::path dat = dir / (stem + ".dat");
  const fs::path gp = dir / (stem + ".gp");

  std::ofstream d(dat);
  if (!d) throw std::runtime_error("cannot write '" + dat.string() + "'");
  d << "# time_s |F_meas| |F_true| fx fy fz px py pz\n";
  d.precision(10);
  for (const auto& s : trace.samples) {
    const auto& f = s.wrench_meas.force;
    const auto& p = s.tip_pose.position;
    d << s.time << ' ' << f.norm() << ' ' << s.wrench_true.force.norm() << ' ' << f.x() << ' ' << f.y() << ' ' << f.z()
      << ' ' << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  std::ofstream g(gp);
  if (!g) throw std::runtime_error("cannot write '" + gp.string() + "'");
  g << "# gnuplot " << gp.filename().string() << "\n"
    << "set terminal pngcairo size 1000,700\n"
    << "set output '" << stem << ".png'\n"
    << "set multiplot layout 2,1 title '" << stem << " (" << to_string(trace.mode) << " mode)'\n"
    << "set xlabel 'time [s]'\nset ylabel 'force [N]'\nset grid\n"
    << "plot '" << dat.filename().string() << "' using 1:2 with lines title '|F| measured', \\\n"
    << "     '' using 1:3 with lines title '|F| true'\n"
    << "set ylabel 'tip position [m]'\n"
    << "plot '" << dat.filename().string() << "' using 1:7 with lines title 'x', '' using 1:8 with lines title 'y', "
    << "'' using 1:9 with lines title 'z'\n"
    << "unset multiplot\n";
  std::cout << "wrote " << dat.string() << " and " << gp.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward dynamics compliance control benchmark"};
  app.require_subcommand(1);

  Overrides o;
  int jobs = 1;
  bool quiet = false;
  bool print = false;
  std::string suite_path, report_a, report_b, csv_path;
  std::optional<std::string> plot_out;

  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Override the suite seed");
    sub->add_option("--rate", o.rate, "Override the controller rate in Hz")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Override the output directory");
  };

  CLI::App* run = app.add_subcommand("run", "Run every scenario of a suite");
  run->add_option("suite", suite_path, "Suite file")->required();
  add_overrides(run);
  run->add_option("--jobs,-j", jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);
  run->add_flag("--quiet,-q", quiet, "No per-scenario progress on stderr");

  CLI::App* validate = app.add_subcommand("validate", "Parse and validate a suite");
  validate->add_option("suite", suite_path, "Suite file")->required();
  add_overrides(validate);
  validate->add_flag("--print", print, "Print the expanded suite in canonical form");

  CLI::App* compare = app.add_subcommand("compare", "Compare a velocity and a position report");
  compare->add_option("report_a", report_a, "report.kv")->required();
  compare->add_option("report_b", report_b, "report.kv")->required();

  CLI::App* plot = app.add_subcommand("plot", "Write a gnuplot script and data file for a trace");
  plot->add_option("trace", csv_path, "Trace CSV")->required();
  plot->add_option("--out", plot_out, "Directory for the script and data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(suite_path, o, jobs, quiet);
    if (*validate) return cmd_validate(suite_path, o, print);
    if (*compare) return cmd_compare(report_a, report_b);
    if (*plot) return cmd_plot(csv_path, plot_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ini::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kConfig;
  } catch (const ContractError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kConfig;
  } catch (const ComparisonError& e) {
    std::cerr << "comparison refused: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
