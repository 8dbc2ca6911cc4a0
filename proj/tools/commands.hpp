#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "config.hpp"
#include "lckw/calibrate.hpp"
#include "lckw/riemann.hpp"

namespace lckw::cli {

/// Tabulates rho, eps, rho_bar, V, Q with and without the lane-changing
/// effect, and lambda_1 over the configured density grid. The capacity
/// point of a constant intensity is added to the grid.
void export_fd(const ScenarioConfig& cfg, UnitSystem units, std::ostream& out);

/// Human-readable Riemann solution; optionally a CSV of sample(xi).
void report_riemann(const FundamentalDiagram& fd, const RiemannSpec& spec, UnitSystem units,
                    std::ostream& text, std::ostream* csv);

/// Runs the scenario and writes t,x,rho,eps,v,q rows, time-major.
void write_simulation(const RoadScenario& scn, UnitSystem units, std::ostream& out);

struct FitReport {
  std::optional<calibrate::LinearFit> theta;  // theta [deg] against rho
  std::optional<calibrate::CurveFit> eps_reciprocal;
  std::optional<calibrate::CurveFit> eps_exponential;
  std::optional<calibrate::CapacityComparison> capacity;
};

struct CalibrationOutput {
  std::vector<calibrate::CalibrationSample> samples;
  FitReport fits;
  std::size_t events = 0;
  std::size_t dropped = 0;
  std::vector<calibrate::TrajectoryRecord> synthetic_records;  // filled in synthetic mode
};

/// Calibration pipeline over the configured datasets, or over a synthetic
/// corpus when a seed is given or no datasets are configured.
CalibrationOutput run_calibration(const ScenarioConfig& cfg, std::optional<std::uint64_t> seed);

void write_samples(const std::vector<calibrate::CalibrationSample>& samples, UnitSystem units,
                   std::ostream& out);
void write_fit_report(const FitReport& fits, UnitSystem units, std::ostream& out);

}  // namespace lckw::cli
