#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lckw/calibrate.hpp"
#include "lckw/fundamental_diagram.hpp"
#include "lckw/godunov.hpp"
#include "lckw/intensity.hpp"
#include "lckw/synthetic.hpp"

namespace lckw::cli {

/// us: mi, mi/h, veh/mi, ft for trajectories. metric: km, km/h, veh/km, m.
enum class UnitSystem { us, metric };

UnitSystem parse_units(const std::string& name);

struct FdExportSpec {
  double rho_min = 0.0;
  std::optional<double> rho_max;  // default: jam density
  std::size_t points = 241;
  double x = 0.0;  // location at which the intensity model is evaluated [mi]
};

struct RiemannSpec {
  TrafficState left;
  TrafficState right;
  std::optional<double> xi_min;
  std::optional<double> xi_max;
  std::size_t xi_points = 201;
};

struct TrajectoryDataset {
  std::filesystem::path path;
  double interval = 0.0;  // T [s]
  double stride = 0.0;    // [s]; 0 means T
};

struct SyntheticSpec {
  std::vector<double> densities;  // [veh/mi], one dataset each
  double interval = 100.0;        // [s]
  std::size_t intervals = 3;
  double lateral_noise = 0.0;     // [ft]
  synthetic::Laws laws;
};

struct CalibrateSpec {
  std::vector<double> separations{12.0, 24.0, 36.0, 48.0, 60.0};  // [ft]
  double vehicle_width = 6.3;       // w [ft]
  double threshold_factor = 1.0;    // Delta y = factor w
  double pre_fraction = 0.5;
  std::size_t smoothing_window = 0;
  calibrate::Section section{950.0, 1850.0};
  std::vector<TrajectoryDataset> datasets;
  std::optional<SyntheticSpec> synthetic;
  std::string capacity_model = "exponential";  // which eps fit feeds the capacity comparison

  double threshold() const { return threshold_factor * vehicle_width; }
};

/// Parsed configuration in core units (mi, h, veh/mi, veh/h; ft and s for
/// trajectories). Densities and flows in the file are per lane; `lanes`
/// scales them to road totals.
struct ScenarioConfig {
  UnitSystem units = UnitSystem::us;
  double lanes = 1.0;
  std::optional<FundamentalDiagram> fd;
  IntensitySchedule intensity = IntensityModel{};
  bool has_intensity = false;
  std::optional<RoadScenario> scenario;
  FdExportSpec fd_export;
  std::optional<RiemannSpec> riemann;
  std::optional<CalibrateSpec> calibrate;
  std::filesystem::path base_dir;

  /// The fundamental diagram, or ConfigError when none was declared.
  const FundamentalDiagram& require_fd() const;
};

/// Parses YAML text. Errors are ConfigError messages of the form
/// "<source>:<line>:<column>: <field>: <problem>".
ScenarioConfig parse_config(const std::string& text, const std::string& source = "config",
                            const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

/// Parses "triangular:v_f,rho_c,rho_j" or "max-sensitivity:v_f,c_j,rho_j".
FundamentalDiagram parse_fd_spec(const std::string& text);

}  // namespace lckw::cli
