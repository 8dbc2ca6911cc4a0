#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "lckw/errors.hpp"

using namespace lckw;
using namespace lckw::cli;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const char* const tri_yaml =
    "units: us\n"
    "fd: {type: triangular, free_speed: 65, critical_density: 40, jam_density: 240}\n";

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "test.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

CsvTable table_of(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

}  // namespace

TEST_CASE("numbers survive a CSV round trip") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-12, 12);
  std::vector<double> values{0.0, 1.0, -2.5, 2600.0 / 1.1, 1e-300, 123456789012.0};
  for (int i = 0; i < 500; ++i) values.push_back(mant(rng) * std::pow(10.0, expo(rng)));

  std::ostringstream first;
  {
    CsvWriter w(first, {"value"});
    for (double v : values) w.row(std::span<const double>(&v, 1));
  }
  const CsvTable t = table_of(first.str());
  REQUIRE(t.rows.size() == values.size());
  std::ostringstream second;
  {
    CsvWriter w(second, {"value"});
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const double v = t.number(r, 0);
      w.row(std::span<const double>(&v, 1));
    }
  }
  CHECK(first.str() == second.str());
  CHECK(format_number(2600.0 / 1.1) == "2363.63636364");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("CSV reader reports missing columns and bad numbers") {
  const CsvTable t = table_of("a,b\n1,x\n\n2,3\n");
  CHECK(t.rows.size() == 2);
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(t.column("c"), ConfigError);
  CHECK_THROWS_AS(t.number(0, 1), ConfigError);
  CHECK(t.number(1, 1) == 3.0);
}

TEST_CASE("trajectory CSV ignores extra columns and converts metres") {
  std::istringstream in("vehicle_id,t,x,y,lane,width\n7,0.5,100,3.6,2,1.8\n");
  const auto recs = read_trajectories(in, 1.0 / 0.3048);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].vehicle_id == 7);
  CHECK(recs[0].t == 0.5);
  CHECK_THAT(recs[0].x, WithinRel(100.0 / 0.3048, 1e-14));
  CHECK_THAT(recs[0].y, WithinRel(3.6 / 0.3048, 1e-14));
  CHECK(recs[0].lane == 2);

  std::ostringstream out;
  write_trajectories(out, recs);
  std::istringstream back(out.str());
  const auto again = read_trajectories(back);
  REQUIRE(again.size() == 1);
  CHECK(again[0].x == std::stod(format_number(recs[0].x)));
}

TEST_CASE("config errors carry line, column and field") {
  CHECK_THAT(config_error(std::string(tri_yaml) + "bogus: 1\n"),
             ContainsSubstring("test.yaml:3:") && ContainsSubstring("bogus"));
  CHECK_THAT(config_error("fd: {type: triangular, free_speed: 65, critical_density: 40, jam_density: 240}\n"),
             ContainsSubstring("units"));
  CHECK_THAT(config_error("units: us\nfd:\n  type: triangular\n  free_speed: 65\n  critical_density: 300\n"
                          "  jam_density: 240\n"),
             ContainsSubstring("test.yaml:3:") && ContainsSubstring("fd"));
  CHECK_THAT(config_error(std::string(tri_yaml) + "intensity: {type: nope}\n"),
             ContainsSubstring("intensity.type") && ContainsSubstring("nope"));
  CHECK_THAT(config_error("units: imperial\n"), ContainsSubstring("units"));
  CHECK_THAT(config_error("units: [us\n"), ContainsSubstring("test.yaml"));
}

TEST_CASE("metric configs are converted to core units") {
  const ScenarioConfig cfg = parse_config(
      "units: metric\n"
      "fd: {type: triangular, free_speed: 100, critical_density: 25, jam_density: 150}\n");
  const auto& fd = cfg.require_fd();
  CHECK_THAT(fd.free_speed(), WithinRel(100.0 / 1.609344, 1e-12));
  CHECK_THAT(fd.jam_density(), WithinRel(150.0 * 1.609344, 1e-12));
  CHECK_THAT(capacity(fd, 0.0), WithinRel(2500.0, 1e-12));
}

TEST_CASE("lanes scale per-lane densities") {
  const ScenarioConfig cfg = parse_config(std::string(tri_yaml) + "lanes: 3\n");
  CHECK_THAT(capacity(cfg.require_fd(), 0.0), WithinRel(7800.0, 1e-12));
}

TEST_CASE("diagram strings for the command line") {
  CHECK_THAT(capacity(parse_fd_spec("triangular:65,40,240"), 0.0), WithinRel(2600.0, 1e-14));
  CHECK_FALSE(parse_fd_spec("max-sensitivity:65,-15,240").is_triangular());
  CHECK_THROWS_AS(parse_fd_spec("parabolic:1,2,3"), ConfigError);
  CHECK_THROWS_AS(parse_fd_spec("triangular:65,40"), ConfigError);
}

TEST_CASE("fd export with constant intensity peaks at the reduced capacity") {
  ScenarioConfig cfg = parse_config(std::string(tri_yaml) + "intensity: 0.1\n");
  std::ostringstream out;
  export_fd(cfg, UnitSystem::us, out);
  const CsvTable t = table_of(out.str());
  const std::size_t q = t.column("q_lc");
  double best = 0.0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) best = std::max(best, t.number(r, q));
  CHECK_THAT(best, WithinRel(2600.0 / 1.1, 1e-9));
}

TEST_CASE("fd export without lane changing has equal flow columns") {
  ScenarioConfig cfg = parse_config(std::string(tri_yaml) + "intensity: 0\n");
  std::ostringstream out;
  export_fd(cfg, UnitSystem::us, out);
  const CsvTable t = table_of(out.str());
  REQUIRE(t.rows.size() >= 2);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CHECK(t.rows[r][t.column("q_lc")] == t.rows[r][t.column("q_no_lc")]);
  }
}

TEST_CASE("fd export with the reverse-lambda model shows a flow drop") {
  ScenarioConfig cfg = parse_config(std::string(tri_yaml) +
                                    "intensity: {type: reverse_lambda}\nfd_export: {points: 481}\n");
  std::ostringstream out;
  export_fd(cfg, UnitSystem::us, out);
  const CsvTable t = table_of(out.str());
  const std::size_t rho = t.column("rho");
  const std::size_t q = t.column("q_lc");
  double below = 0.0, at = -1.0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.number(r, rho) < 40.0) below = t.number(r, q);
    if (t.number(r, rho) == 40.0) at = t.number(r, q);
  }
  REQUIRE(at >= 0.0);
  CHECK(below > at);
}

TEST_CASE("riemann report renders the solution") {
  const auto fd = parse_fd_spec("triangular:65,40,240");
  RiemannSpec spec;
  spec.left = {0.1, 200.0};
  spec.right = {0.0, 230.0};
  std::ostringstream text, csv;
  report_riemann(fd, spec, UnitSystem::us, text, &csv);
  CHECK_THAT(text.str(), ContainsSubstring("type 5") && ContainsSubstring("flux 130"));
  const CsvTable t = table_of(csv.str());
  CHECK(t.rows.size() == spec.xi_points);
  CHECK(t.column("xi") == 0);
}

TEST_CASE("simulation output is time-major with one row per cell") {
  ScenarioConfig cfg = parse_config(std::string(tri_yaml) +
                                    "road: {length: 1, cells: 10}\n"
                                    "initial_density: 20\n"
                                    "upstream: {demand: 1300}\n"
                                    "downstream: free\n"
                                    "time: {t_end: 0.01, output_interval: 0.005}\n");
  REQUIRE(cfg.scenario.has_value());
  std::ostringstream out;
  write_simulation(*cfg.scenario, UnitSystem::us, out);
  const CsvTable t = table_of(out.str());
  CHECK(t.header == std::vector<std::string>{"t", "x", "rho", "eps", "v", "q"});
  REQUIRE(t.rows.size() == 30);
  CHECK(t.number(0, 0) == 0.0);
  CHECK(t.number(29, 0) == 0.01);
  CHECK_THAT(t.number(0, 1), WithinAbs(0.05, 1e-12));
  for (std::size_t r = 0; r < t.rows.size(); ++r) CHECK_THAT(t.number(r, 5), WithinRel(1300.0, 1e-9));
}

TEST_CASE("simulation output in metric units") {
  ScenarioConfig cfg = parse_config(std::string(tri_yaml) +
                                    "road: {length: 1, cells: 4}\n"
                                    "initial_density: 20\n"
                                    "upstream: {demand: 1300}\n"
                                    "time: {t_end: 0}\n");
  std::ostringstream out;
  write_simulation(*cfg.scenario, UnitSystem::metric, out);
  const CsvTable t = table_of(out.str());
  CHECK_THAT(t.number(0, 1), WithinRel(0.125 * 1.609344, 1e-11));
  CHECK_THAT(t.number(0, 2), WithinRel(20.0 / 1.609344, 1e-11));
  CHECK_THAT(t.number(0, 4), WithinRel(65.0 * 1.609344, 1e-11));
}

TEST_CASE("synthetic calibration recovers the angle law") {
  ScenarioConfig cfg = parse_config(
      "units: us\nlanes: 6\n"
      "fd: {type: triangular, free_speed: 65, critical_density: 40, jam_density: 240}\n"
      "calibrate:\n  synthetic: {densities: [100, 150, 200, 250]}\n");
  const CalibrationOutput out = run_calibration(cfg, 1);
  REQUIRE(out.fits.theta.has_value());
  CHECK_THAT(out.fits.theta->slope, WithinRel(0.0121, 0.02));
  CHECK(out.fits.theta->r_squared >= 0.99);
  REQUIRE(out.fits.capacity.has_value());
  CHECK(out.fits.capacity->reduction > 0.0);
  CHECK_FALSE(out.synthetic_records.empty());

  std::ostringstream report;
  write_fit_report(out.fits, UnitSystem::us, report);
  const CsvTable t = table_of(report.str());
  CHECK(t.header == std::vector<std::string>{"model", "param_a", "param_b", "r_squared", "n"});
  CHECK(t.rows[0][0] == "theta_linear");

  std::ostringstream samples;
  write_samples(out.samples, UnitSystem::us, samples);
  CHECK(table_of(samples.str()).header ==
        std::vector<std::string>{"t_start", "T", "rho", "v", "q", "theta_deg", "eps"});
}
