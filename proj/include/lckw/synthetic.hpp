#pragma once

#include <cstdint>
#include <vector>

#include "lckw/calibrate.hpp"
#include "lckw/fundamental_diagram.hpp"

namespace lckw::synthetic {

/// Ground-truth laws used to synthesize lane-changing trajectories:
/// theta [deg] = theta_intercept + theta_slope rho and eps = eps_a exp(eps_b rho).
struct Laws {
  double theta_intercept = -0.5016;
  double theta_slope = 0.0121;
  double eps_a = 0.5579;
  double eps_b = -0.0048;

  double theta_deg(double rho) const { return theta_intercept + theta_slope * rho; }
  double eps(double rho) const;
};

struct CorpusOptions {
  FundamentalDiagram fd = FundamentalDiagram::triangular(65.0, 240.0, 1440.0);  // six lanes
  Laws laws;
  calibrate::Section section{950.0, 1850.0};
  double extent = 2800.0;     // recorded road length [ft]
  double crossing_x = 1400.0; // middle of every lateral maneuver [ft]
  double lane_width = 12.0;   // [ft]
  int lane_count = 6;
  double threshold = 6.3;     // detection threshold the eps law refers to [ft]
  double sample_dt = 0.2;     // [s]
  double lateral_noise = 0.0; // standard deviation of added y noise [ft]
  std::uint64_t seed = 1;
};

/// One synthetic dataset: a stationary stream at one density whose
/// lane-changing pattern repeats every `interval` seconds.
struct Dataset {
  double density = 0.0;      // [veh/mi]
  double speed = 0.0;        // [mi/h]
  double interval = 0.0;     // T, adjusted to a whole pattern period [s]
  double theta_deg = 0.0;    // true lane-changing angle
  double eps = 0.0;          // intensity realized by the pattern
  double eps_law = 0.0;      // intensity the law prescribes
  std::size_t block = 0;     // vehicles per pattern period
  std::size_t block_events = 0;
  std::vector<calibrate::TrajectoryRecord> records;
};

/// y-values of the lines between adjacent lanes.
std::vector<double> lane_separations(double lane_width, int lane_count);

/// Generates a dataset at the given density with about `interval_count`
/// full intervals of nominal length `interval` between the first passage of
/// x_b and the last passage of x_a. Vehicle ids start at id_offset + 1.
Dataset generate(const CorpusOptions& opts, double density, double interval,
                 std::size_t interval_count, std::int64_t id_offset = 0);

/// A single vehicle at constant speed [ft/s] that moves one lane over
/// `maneuver_length` feet with a smoothstep lateral profile centered at x_mid.
calibrate::VehicleTrajectory curved_lane_change(std::int64_t id, double speed, double lane_width,
                                                double maneuver_length, double x_mid,
                                                double extent, double dt);

}  // namespace lckw::synthetic
