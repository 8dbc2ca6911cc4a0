// lckw: fundamental diagrams, Riemann solutions, simulation and calibration
// for traffic with lane-changing intensity.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "lckw/errors.hpp"

namespace {

using namespace lckw;
using namespace lckw::cli;

struct Options {
  std::string config;
  std::string out;
  std::string units = "us";
  std::optional<std::uint64_t> seed;

  std::string fd;
  std::optional<double> eps;
  std::optional<double> rho_min;
  std::optional<double> rho_max;
  std::optional<std::size_t> points;

  std::vector<double> left;
  std::vector<double> right;
  std::optional<double> xi_min;
  std::optional<double> xi_max;
  std::optional<std::size_t> xi_points;

  std::optional<double> t_end;
  std::optional<double> output_interval;
  std::optional<double> cfl;

  std::optional<double> threshold_factor;
  std::string report;
  std::string trajectories_out;
};

ScenarioConfig load(const Options& o) {
  ScenarioConfig cfg = o.config.empty() ? ScenarioConfig{} : load_config(o.config);
  if (!o.fd.empty()) cfg.fd = parse_fd_spec(o.fd);
  if (o.eps) {
    if (!(*o.eps >= 0.0)) throw ConfigError("--eps must be nonnegative");
    cfg.intensity = IntensityModel::constant(*o.eps);
  }
  return cfg;
}

// Writes to --out when given, else to stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int fd_export(const Options& o) {
  ScenarioConfig cfg = load(o);
  const double scale = cfg.units == UnitSystem::metric ? 1.609344 * cfg.lanes : cfg.lanes;
  if (o.rho_min) cfg.fd_export.rho_min = *o.rho_min * scale;
  if (o.rho_max) cfg.fd_export.rho_max = *o.rho_max * scale;
  if (o.points) cfg.fd_export.points = *o.points;
  Sink sink(o.out);
  export_fd(cfg, parse_units(o.units), sink.stream());
  return 0;
}

int riemann(const Options& o) {
  const ScenarioConfig cfg = load(o);
  RiemannSpec spec = cfg.riemann.value_or(RiemannSpec{});
  if (!o.left.empty()) spec.left = {o.left[0], o.left[1]};
  if (!o.right.empty()) spec.right = {o.right[0], o.right[1]};
  if (!cfg.riemann && (o.left.empty() || o.right.empty())) {
    throw ConfigError("riemann needs --left and --right states or a 'riemann' config section");
  }
  if (o.xi_min) spec.xi_min = *o.xi_min;
  if (o.xi_max) spec.xi_max = *o.xi_max;
  if (o.xi_points) spec.xi_points = *o.xi_points;
  std::unique_ptr<std::ofstream> csv;
  if (!o.out.empty()) {
    csv = std::make_unique<std::ofstream>(o.out);
    if (!*csv) throw ConfigError("cannot write '" + o.out + "'");
  }
  report_riemann(cfg.require_fd(), spec, parse_units(o.units), std::cout, csv.get());
  return 0;
}

int simulate(const Options& o) {
  ScenarioConfig cfg = load(o);
  if (!cfg.scenario) throw ConfigError("simulate needs a config with a 'road' section");
  RoadScenario scn = *cfg.scenario;
  if (o.t_end) scn.t_end = *o.t_end;
  if (o.output_interval) scn.output_interval = *o.output_interval;
  if (o.cfl) scn.cfl = *o.cfl;
  Sink sink(o.out);
  write_simulation(scn, parse_units(o.units), sink.stream());
  return 0;
}

int calibrate_cmd(const Options& o) {
  ScenarioConfig cfg = load(o);
  if (o.config.empty() && !o.seed) {
    throw ConfigError("calibrate needs --config or --seed (synthetic corpus)");
  }
  if (o.threshold_factor) {
    if (!cfg.calibrate) cfg.calibrate = CalibrateSpec{};
    cfg.calibrate->threshold_factor = *o.threshold_factor;
  }
  if (o.config.empty()) {
    // Synthetic defaults: six 12 ft lanes of the 65 mph / 40 / 240 per-lane diagram.
    cfg.lanes = 6.0;
    if (!cfg.fd) cfg.fd = FundamentalDiagram::triangular(65.0, 240.0, 1440.0);
  }
  const CalibrationOutput result = run_calibration(cfg, o.seed);
  const UnitSystem units = parse_units(o.units);

  if (!o.trajectories_out.empty()) {
    std::ofstream tr(o.trajectories_out);
    if (!tr) throw ConfigError("cannot write '" + o.trajectories_out + "'");
    write_trajectories(tr, result.synthetic_records);
  }
  std::string report_path = o.report;
  if (report_path.empty() && !o.out.empty()) {
    report_path = std::filesystem::path(o.out).replace_extension(".fits.csv").string();
  }
  Sink sink(o.out);
  write_samples(result.samples, units, sink.stream());
  if (report_path.empty()) {
    std::cout << '\n';
    write_fit_report(result.fits, units, std::cout);
  } else {
    std::ofstream rep(report_path);
    if (!rep) throw ConfigError("cannot write '" + report_path + "'");
    write_fit_report(result.fits, units, rep);
  }
  if (result.dropped > 0) {
    std::cerr << "warning: " << result.dropped
              << " separation crossings never reached the threshold and were dropped\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinematic-wave traffic model with lane-changing intensity"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Scenario configuration (YAML)");
  app.add_option("--out", o.out, "Output CSV path (default: stdout)");
  app.add_option("--units", o.units, "Output units")->check(CLI::IsMember({"us", "metric"}));
  app.add_option("--seed", o.seed, "Seed for the synthetic trajectory corpus");

  auto* fd = app.add_subcommand("fd-export", "Tabulate the fundamental diagram");
  fd->add_option("--fd", o.fd, "triangular:v_f,rho_c,rho_j or max-sensitivity:v_f,c_j,rho_j");
  fd->add_option("--eps", o.eps, "Constant lane-changing intensity");
  fd->add_option("--rho-min", o.rho_min, "Smallest density of the grid");
  fd->add_option("--rho-max", o.rho_max, "Largest density of the grid");
  fd->add_option("--points", o.points, "Number of grid points")->check(CLI::Range(2, 10000000));

  auto* rm = app.add_subcommand("riemann", "Solve one Riemann problem");
  rm->add_option("--fd", o.fd, "triangular:v_f,rho_c,rho_j or max-sensitivity:v_f,c_j,rho_j");
  rm->add_option("--left", o.left, "Left state: EPS RHO")->expected(2);
  rm->add_option("--right", o.right, "Right state: EPS RHO")->expected(2);
  rm->add_option("--xi-min", o.xi_min, "Smallest x/t of the sample grid");
  rm->add_option("--xi-max", o.xi_max, "Largest x/t of the sample grid");
  rm->add_option("--xi-points", o.xi_points, "Points of the sample grid")->check(CLI::Range(2, 10000000));

  auto* sim = app.add_subcommand("simulate", "Run the Godunov simulator");
  sim->add_option("--t-end", o.t_end, "Final time [h]");
  sim->add_option("--output-interval", o.output_interval, "Snapshot spacing [h]");
  sim->add_option("--cfl", o.cfl, "CFL number in (0, 1]");

  auto* cal = app.add_subcommand("calibrate", "Detect lane changes and fit intensity laws");
  cal->add_option("--threshold-factor", o.threshold_factor, "Delta y as a multiple of the vehicle width");
  cal->add_option("--report", o.report, "Fit report CSV path");
  cal->add_option("--trajectories-out", o.trajectories_out, "Write the synthetic corpus as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 1;
  }

  try {
    if (*fd) return fd_export(o);
    if (*rm) return riemann(o);
    if (*sim) return simulate(o);
    if (*cal) return calibrate_cmd(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
