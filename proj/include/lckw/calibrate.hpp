#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lckw/fundamental_diagram.hpp"
#include "lckw/intensity.hpp"

namespace lckw::calibrate {

// Trajectory quantities use the NGSIM convention: feet and seconds.

struct TrajectoryRecord {
  std::int64_t vehicle_id = 0;
  double t = 0.0;  // [s]
  double x = 0.0;  // longitudinal [ft]
  double y = 0.0;  // lateral [ft]
  int lane = 0;
};

struct TrajectoryPoint {
  double t;
  double x;
  double y;
  int lane;
};

struct VehicleTrajectory {
  std::int64_t vehicle_id = 0;
  std::vector<TrajectoryPoint> points;  // strictly increasing in t
};

/// Groups records by vehicle (ordered by id) and sorts each by time. Throws
/// DomainError on duplicate timestamps for a vehicle.
std::vector<VehicleTrajectory> group_by_vehicle(std::span<const TrajectoryRecord> records);

/// Centered moving average of y over `window` samples (0 or 1 leaves the
/// trajectory untouched).
VehicleTrajectory smooth_lateral(const VehicleTrajectory& v, std::size_t window);

struct LaneChangeEvent {
  std::int64_t vehicle_id = 0;
  double separation = 0.0;  // y of the crossed line [ft]
  double t_cross = 0.0;     // [s]
  double x_cross = 0.0;     // [ft]
  double t_start = 0.0;     // [s]
  double t_end = 0.0;       // [s]
  double dx = 0.0;          // [ft]
  double dy = 0.0;          // [ft]
  double theta = 0.0;       // atan(dy / dx) [rad]

  double duration() const { return t_end - t_start; }
};

struct DetectionOptions {
  double threshold = 6.3;       // lateral displacement Delta y [ft]
  double pre_fraction = 0.5;    // share of the threshold accumulated before the crossing
  std::size_t smoothing_window = 0;
};

struct DetectionResult {
  std::vector<LaneChangeEvent> events;
  std::size_t dropped = 0;  // crossings whose window never reached the threshold
};

/// One event per crossing of a lane-separation line. The event window is
/// the shortest interval around the crossing over which the lateral
/// displacement reaches the threshold, split pre_fraction / (1 - pre_fraction)
/// around the crossing and shifted to the other side at data edges.
DetectionResult detect_lane_changes(const VehicleTrajectory& vehicle,
                                    std::span<const double> separations,
                                    const DetectionOptions& opts);
DetectionResult detect_lane_changes(std::span<const VehicleTrajectory> vehicles,
                                    std::span<const double> separations,
                                    const DetectionOptions& opts);

struct Section {
  double x_a = 0.0;  // [ft]
  double x_b = 0.0;  // [ft]
  double length_ft() const { return x_b - x_a; }
};

struct Interval {
  double t_start = 0.0;   // [s]
  double duration = 0.0;  // T [s]
  double t_end() const { return t_start + duration; }
};

/// Per-interval aggregates over a section, in core units.
struct CalibrationSample {
  Interval interval;
  Section section;
  double rho = 0.0;  // [veh/mi]
  double v = 0.0;    // [mi/h]
  double q = 0.0;    // [veh/h]
  std::optional<double> theta_mean_deg;
  double eps = 0.0;
  double vehicle_time = 0.0;       // [veh s]
  double vehicle_distance = 0.0;   // [veh ft]
  double lane_change_time = 0.0;   // [veh s]
  std::size_t event_count = 0;
};

/// Total time and distance a trajectory spends inside the section during
/// [t_lo, t_hi], with linear interpolation between samples.
struct Occupancy {
  double time = 0.0;      // [s]
  double distance = 0.0;  // [ft]
};
Occupancy occupancy(const VehicleTrajectory& v, const Section& section, double t_lo, double t_hi);

/// Edie-style aggregation: rho = vehicle-time / (T L), v = distance /
/// vehicle-time, q = rho v, eps = lane-changing time / vehicle-time.
/// Throws DomainError when no vehicle-time falls inside.
CalibrationSample aggregate_interval(std::span<const VehicleTrajectory> vehicles,
                                     std::span<const LaneChangeEvent> events,
                                     const Section& section, const Interval& interval);

/// Intervals of length T starting at the first passage of x_b, advancing by
/// stride, and ending no later than the last passage of x_a.
std::vector<Interval> select_intervals(std::span<const VehicleTrajectory> vehicles,
                                       const Section& section, double duration, double stride);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

struct CurveFit {
  double a = 0.0;
  double b = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  std::size_t excluded = 0;
};

/// R^2 = 1 - SS_res / SS_tot, with the convention R^2 = 1 when both vanish.
double r_squared(std::span<const double> ys, std::span<const double> predicted);

/// Ordinary least squares y = intercept + slope x.
LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys);

/// y = a + b / x, fitted in the regressor 1/x; R^2 in original space.
CurveFit fit_reciprocal(std::span<const double> xs, std::span<const double> ys);

/// y = a exp(b x), fitted as ln y = ln a + b x over samples with y > 0;
/// R^2 in original space.
CurveFit fit_exponential(std::span<const double> xs, std::span<const double> ys);

struct CapacityComparison {
  double cap_no_lc = 0.0;  // max (1+eps) rho V((1+eps) rho)
  double rho_no_lc = 0.0;
  double cap_lc = 0.0;     // max rho V((1+eps) rho)
  double rho_lc = 0.0;
  double reduction = 0.0;  // 1 - cap_lc / cap_no_lc
};

/// Maximizes both flow forms over the density range spanned by the samples.
CapacityComparison capacity_comparison(std::span<const CalibrationSample> samples,
                                       const FundamentalDiagram& fd,
                                       const IntensityModel& intensity);

/// Same, over an explicit density range [rho_lo, rho_hi].
CapacityComparison capacity_comparison(double rho_lo, double rho_hi, const FundamentalDiagram& fd,
                                       const IntensityModel& intensity);

struct PipelineOptions {
  DetectionOptions detection;
  Section section;
  double interval = 0.0;  // T [s]
  double stride = 0.0;    // [s]; <= 0 means non-overlapping (stride = T)
};

struct PipelineResult {
  std::vector<CalibrationSample> samples;
  std::size_t event_count = 0;
  std::size_t dropped = 0;
};

/// Grouping, detection, interval selection and aggregation for one dataset.
PipelineResult run_pipeline(std::span<const TrajectoryRecord> records,
                            std::span<const double> separations, const PipelineOptions& opts);

}  // namespace lckw::calibrate
