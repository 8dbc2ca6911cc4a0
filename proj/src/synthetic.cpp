#include "lckw/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lckw/errors.hpp"
#include "lckw/units.hpp"

namespace lckw::synthetic {

double Laws::eps(double rho) const { return eps_a * std::exp(eps_b * rho); }

std::vector<double> lane_separations(double lane_width, int lane_count) {
  std::vector<double> out;
  for (int i = 1; i < lane_count; ++i) out.push_back(lane_width * i);
  return out;
}

Dataset generate(const CorpusOptions& opts, double density, double interval,
                 std::size_t interval_count, std::int64_t id_offset) {
  if (!(density > 0.0)) throw DomainError("synthetic density must be positive");
  if (!(interval > 0.0) || interval_count == 0) {
    throw DomainError("synthetic corpus needs a positive interval and at least one of them");
  }
  Dataset ds;
  ds.density = density;
  ds.theta_deg = opts.laws.theta_deg(density);
  ds.eps_law = opts.laws.eps(density);
  if (!(ds.theta_deg > 0.0) || ds.theta_deg >= 90.0) {
    throw DomainError("angle law gives " + std::to_string(ds.theta_deg) + " deg at density " +
                      std::to_string(density));
  }
  ds.speed = opts.fd.speed(density * (1.0 + ds.eps_law));
  if (!(ds.speed > 0.0)) throw DomainError("synthetic stream would be jammed");

  const double v = units::mph_to_fps(ds.speed);
  const double headway = units::feet_per_mile / density;
  ds.block = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(v * interval / headway)));
  ds.interval = static_cast<double>(ds.block) * headway / v;

  const double tan_theta = std::tan(units::degrees_to_radians(ds.theta_deg));
  const double per_vehicle = ds.eps_law * opts.section.length_ft() * tan_theta / opts.threshold;
  ds.block_events = static_cast<std::size_t>(std::llround(per_vehicle * static_cast<double>(ds.block)));
  ds.eps = static_cast<double>(ds.block_events) / static_cast<double>(ds.block) * opts.threshold /
           (opts.section.length_ft() * tan_theta);

  const std::size_t max_changes =
      (ds.block_events + ds.block - 1) / ds.block;  // ceil(events per vehicle)
  if (static_cast<int>(max_changes) >= opts.lane_count) {
    throw DomainError("pattern needs " + std::to_string(max_changes) +
                      " lane changes per vehicle; not enough lanes");
  }
  // Event windows must lie inside the section.
  const double half_span = 0.5 * static_cast<double>(max_changes) * opts.lane_width / tan_theta;
  const double window_reach = half_span - (0.5 * opts.lane_width - 0.5 * opts.threshold) / tan_theta;
  if (opts.crossing_x - window_reach < opts.section.x_a ||
      opts.crossing_x + window_reach > opts.section.x_b) {
    throw DomainError("lane-change windows at density " + std::to_string(density) +
                      " do not fit inside the section");
  }

  // Every trajectory is recorded from entry to exit. The section stays fully
  // populated from the first passage of x_b until the last entry reaches x_a.
  const double t_first = opts.section.x_b / v;
  const double t_last_entry = t_first - opts.section.x_a / v +
                              (static_cast<double>(interval_count) + 0.5) * ds.interval;
  const auto vehicles = static_cast<std::size_t>(std::floor(v * t_last_entry / headway)) + 1;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> noise(0.0, opts.lateral_noise > 0.0 ? opts.lateral_noise : 1.0);

  auto events_of = [&](std::size_t k) {
    const auto b = static_cast<long double>(ds.block);
    const auto e = static_cast<long double>(ds.block_events);
    const auto hi = static_cast<std::size_t>(std::floor((k + 1) * e / b));
    const auto lo = static_cast<std::size_t>(std::floor(k * e / b));
    return hi - lo;
  };

  for (std::size_t k = 0; k < vehicles; ++k) {
    const std::size_t m = events_of(k % ds.block);
    const auto lanes_free = static_cast<std::size_t>(opts.lane_count) - m;
    const std::size_t lane0 = k % lanes_free;
    const double y0 = (static_cast<double>(lane0) + 0.5) * opts.lane_width;
    const double lateral = static_cast<double>(m) * opts.lane_width;
    const double x_start = opts.crossing_x - 0.5 * lateral / tan_theta;
    const double t_enter = static_cast<double>(k) * headway / v;
    const double t_leave = t_enter + opts.extent / v;
    const std::int64_t id = id_offset + static_cast<std::int64_t>(k) + 1;

    for (auto j = static_cast<std::int64_t>(std::ceil(t_enter / opts.sample_dt));; ++j) {
      const double t = static_cast<double>(j) * opts.sample_dt;
      if (t > t_leave) break;
      const double x = v * (t - t_enter);
      double y = y0 + std::clamp((x - x_start) * tan_theta, 0.0, lateral);
      if (opts.lateral_noise > 0.0) y += noise(rng);
      const int lane = static_cast<int>(std::floor(y / opts.lane_width)) + 1;
      ds.records.push_back({id, t, x, y, std::clamp(lane, 1, opts.lane_count)});
    }
  }
  return ds;
}

calibrate::VehicleTrajectory curved_lane_change(std::int64_t id, double speed, double lane_width,
                                                double maneuver_length, double x_mid,
                                                double extent, double dt) {
  if (!(speed > 0.0) || !(maneuver_length > 0.0) || !(dt > 0.0)) {
    throw DomainError("curved lane change needs positive speed, length and time step");
  }
  calibrate::VehicleTrajectory v;
  v.vehicle_id = id;
  const double x0 = x_mid - 0.5 * maneuver_length;
  for (std::size_t j = 0;; ++j) {
    const double t = static_cast<double>(j) * dt;
    const double x = speed * t;
    if (x > extent) break;
    const double u = std::clamp((x - x0) / maneuver_length, 0.0, 1.0);
    const double y = 0.5 * lane_width + lane_width * u * u * (3.0 - 2.0 * u);
    v.points.push_back({t, x, y, u < 0.5 ? 1 : 2});
  }
  return v;
}

}  // namespace lckw::synthetic
