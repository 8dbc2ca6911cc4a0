#include "lckw/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>

#include "lckw/errors.hpp"
#include "lckw/units.hpp"

namespace lckw::calibrate {

namespace {

// Linear interpolation of a trajectory at time t (clamped to its span).
TrajectoryPoint point_at(const VehicleTrajectory& v, double t) {
  const auto& p = v.points;
  if (t <= p.front().t) return p.front();
  if (t >= p.back().t) return p.back();
  auto it = std::upper_bound(p.begin(), p.end(), t,
                             [](double value, const TrajectoryPoint& q) { return value < q.t; });
  const TrajectoryPoint& b = *it;
  const TrajectoryPoint& a = *(it - 1);
  const double w = (t - a.t) / (b.t - a.t);
  return {t, a.x + w * (b.x - a.x), a.y + w * (b.y - a.y), w < 0.5 ? a.lane : b.lane};
}

int side_of(double y, double line) { return y > line ? 1 : (y < line ? -1 : 0); }

struct Node {
  double t;
  double d;  // signed lateral distance from the line, positive on the target side
};

// Walks nodes outward from the crossing and returns the first time at which
// the signed distance reaches `target` (d <= target when going backward,
// d >= target when going forward).
std::optional<double> reach(const std::vector<Node>& nodes, double target, bool backward) {
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const Node& a = nodes[k - 1];
    const Node& b = nodes[k];
    const bool hit = backward ? b.d <= target : b.d >= target;
    if (!hit) continue;
    if (b.d == a.d) return b.t;
    const double w = (target - a.d) / (b.d - a.d);
    return a.t + std::clamp(w, 0.0, 1.0) * (b.t - a.t);
  }
  return std::nullopt;
}

// Mean of ys anchored at the first element so identical values average exactly.
double shifted_mean(std::span<const double> ys) {
  const double y0 = ys.front();
  double acc = 0.0;
  for (double y : ys) acc += y - y0;
  return y0 + acc / static_cast<double>(ys.size());
}

double golden_max(const auto& f, double lo, double hi) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(b)); ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<VehicleTrajectory> group_by_vehicle(std::span<const TrajectoryRecord> records) {
  std::map<std::int64_t, VehicleTrajectory> by_id;
  for (const auto& r : records) {
    auto& v = by_id[r.vehicle_id];
    v.vehicle_id = r.vehicle_id;
    v.points.push_back({r.t, r.x, r.y, r.lane});
  }
  std::vector<VehicleTrajectory> out;
  out.reserve(by_id.size());
  for (auto& [id, v] : by_id) {
    std::stable_sort(v.points.begin(), v.points.end(),
                     [](const TrajectoryPoint& a, const TrajectoryPoint& b) { return a.t < b.t; });
    for (std::size_t i = 1; i < v.points.size(); ++i) {
      if (!(v.points[i].t > v.points[i - 1].t)) {
        throw DomainError("vehicle " + std::to_string(id) + " has duplicate timestamp " +
                          std::to_string(v.points[i].t));
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

VehicleTrajectory smooth_lateral(const VehicleTrajectory& v, std::size_t window) {
  if (window <= 1) return v;
  VehicleTrajectory out = v;
  const std::size_t n = v.points.size();
  const std::size_t half = window / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) acc += v.points[k].y;
    out.points[i].y = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

DetectionResult detect_lane_changes(const VehicleTrajectory& vehicle,
                                    std::span<const double> separations,
                                    const DetectionOptions& opts) {
  if (!(opts.threshold > 0.0)) throw DomainError("lane-changing threshold must be positive");
  if (!(opts.pre_fraction >= 0.0) || opts.pre_fraction > 1.0) {
    throw DomainError("pre-crossing fraction must lie in [0, 1]");
  }
  DetectionResult result;
  const VehicleTrajectory traj = smooth_lateral(vehicle, opts.smoothing_window);
  const auto& p = traj.points;
  if (p.size() < 2) return result;

  const double d_pre = opts.pre_fraction * opts.threshold;
  const double d_post = opts.threshold - d_pre;

  for (double line : separations) {
    int last_side = 0;
    std::size_t last_idx = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const int side = side_of(p[k].y, line);
      if (side == 0) continue;
      if (last_side != 0 && side != last_side) {
        const std::size_t j = last_idx;
        const double f = (line - p[j].y) / (p[j + 1].y - p[j].y);
        const double t_cross = p[j].t + f * (p[j + 1].t - p[j].t);
        const double dir = static_cast<double>(side);

        std::vector<Node> back{{t_cross, 0.0}};
        for (std::size_t i = j + 1; i-- > 0;) back.push_back({p[i].t, dir * (p[i].y - line)});
        std::vector<Node> fwd{{t_cross, 0.0}};
        for (std::size_t i = j + 1; i < p.size(); ++i) fwd.push_back({p[i].t, dir * (p[i].y - line)});

        auto t_start = reach(back, -d_pre, true);
        auto t_end = reach(fwd, d_post, false);
        if (!t_start && t_end) {
          // Data starts too late: take the first sample and extend forward.
          t_start = p.front().t;
          const double achieved = -dir * (p.front().y - line);
          t_end = reach(fwd, opts.threshold - achieved, false);
        } else if (t_start && !t_end) {
          t_end = p.back().t;
          const double achieved = dir * (p.back().y - line);
          t_start = reach(back, -(opts.threshold - achieved), true);
        }

        bool kept = false;
        if (t_start && t_end && *t_end > *t_start) {
          const TrajectoryPoint a = point_at(traj, *t_start);
          const TrajectoryPoint b = point_at(traj, *t_end);
          const TrajectoryPoint c = point_at(traj, t_cross);
          LaneChangeEvent e;
          e.vehicle_id = traj.vehicle_id;
          e.separation = line;
          e.t_cross = t_cross;
          e.x_cross = c.x;
          e.t_start = *t_start;
          e.t_end = *t_end;
          e.dx = b.x - a.x;
          e.dy = std::abs(b.y - a.y);
          if (e.dx > 0.0 && e.dy > 0.0) {
            e.theta = std::atan(e.dy / e.dx);
            result.events.push_back(e);
            kept = true;
          }
        }
        if (!kept) ++result.dropped;
      }
      last_side = side;
      last_idx = k;
    }
  }
  std::sort(result.events.begin(), result.events.end(),
            [](const LaneChangeEvent& a, const LaneChangeEvent& b) { return a.t_cross < b.t_cross; });
  return result;
}

DetectionResult detect_lane_changes(std::span<const VehicleTrajectory> vehicles,
                                    std::span<const double> separations,
                                    const DetectionOptions& opts) {
  DetectionResult all;
  for (const auto& v : vehicles) {
    DetectionResult r = detect_lane_changes(v, separations, opts);
    all.events.insert(all.events.end(), r.events.begin(), r.events.end());
    all.dropped += r.dropped;
  }
  return all;
}

Occupancy occupancy(const VehicleTrajectory& v, const Section& section, double t_lo, double t_hi) {
  Occupancy occ;
  const auto& p = v.points;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    const double ta = std::max(p[k].t, t_lo);
    const double tb = std::min(p[k + 1].t, t_hi);
    if (!(tb > ta)) continue;
    const double vx = (p[k + 1].x - p[k].x) / (p[k + 1].t - p[k].t);
    const double xa = p[k].x + vx * (ta - p[k].t);
    double lo = ta;
    double hi = tb;
    if (vx == 0.0) {
      if (xa < section.x_a || xa > section.x_b) continue;
    } else {
      double t1 = ta + (section.x_a - xa) / vx;
      double t2 = ta + (section.x_b - xa) / vx;
      if (t1 > t2) std::swap(t1, t2);
      lo = std::max(lo, t1);
      hi = std::min(hi, t2);
      if (!(hi > lo)) continue;
    }
    occ.time += hi - lo;
    occ.distance += std::abs(vx) * (hi - lo);
  }
  return occ;
}

CalibrationSample aggregate_interval(std::span<const VehicleTrajectory> vehicles,
                                     std::span<const LaneChangeEvent> events,
                                     const Section& section, const Interval& interval) {
  if (!(section.x_b > section.x_a)) throw DomainError("section needs x_b > x_a");
  if (!(interval.duration > 0.0)) throw DomainError("interval duration must be positive");
  const double t0 = interval.t_start;
  const double t1 = interval.t_end();

  CalibrationSample s;
  s.interval = interval;
  s.section = section;

  std::unordered_map<std::int64_t, const VehicleTrajectory*> index;
  for (const auto& v : vehicles) {
    index[v.vehicle_id] = &v;
    const Occupancy o = occupancy(v, section, t0, t1);
    s.vehicle_time += o.time;
    s.vehicle_distance += o.distance;
  }
  if (!(s.vehicle_time > 0.0)) {
    throw DomainError("no vehicle-time inside section [" + std::to_string(section.x_a) + ", " +
                      std::to_string(section.x_b) + "] during [" + std::to_string(t0) + ", " +
                      std::to_string(t1) + "]");
  }

  double theta_sum = 0.0;
  for (const auto& e : events) {
    auto it = index.find(e.vehicle_id);
    if (it == index.end()) continue;
    const double lo = std::max(t0, e.t_start);
    const double hi = std::min(t1, e.t_end);
    if (hi > lo) s.lane_change_time += occupancy(*it->second, section, lo, hi).time;
    if (e.t_cross >= t0 && e.t_cross < t1 && e.x_cross >= section.x_a && e.x_cross <= section.x_b) {
      theta_sum += e.theta;
      ++s.event_count;
    }
  }

  const double length_mi = units::feet_to_miles(section.length_ft());
  const double vehicle_hours = units::seconds_to_hours(s.vehicle_time);
  s.rho = s.vehicle_time / (interval.duration * length_mi);
  s.v = units::feet_to_miles(s.vehicle_distance) / vehicle_hours;
  s.q = s.rho * s.v;
  s.eps = s.lane_change_time / s.vehicle_time;
  if (s.event_count > 0) {
    s.theta_mean_deg = units::radians_to_degrees(theta_sum / static_cast<double>(s.event_count));
  }
  return s;
}

std::vector<Interval> select_intervals(std::span<const VehicleTrajectory> vehicles,
                                       const Section& section, double duration, double stride) {
  if (!(duration > 0.0) || !(stride > 0.0)) {
    throw DomainError("interval duration and stride must be positive");
  }
  double first_b = std::numeric_limits<double>::infinity();
  double last_a = -std::numeric_limits<double>::infinity();
  for (const auto& v : vehicles) {
    const auto& p = v.points;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      auto passage = [&](double x) -> std::optional<double> {
        if ((p[k].x < x && p[k + 1].x >= x) || (p[k].x == x && k == 0)) {
          if (p[k + 1].x == p[k].x) return p[k].t;
          return p[k].t + (x - p[k].x) / (p[k + 1].x - p[k].x) * (p[k + 1].t - p[k].t);
        }
        return std::nullopt;
      };
      if (auto t = passage(section.x_b)) first_b = std::min(first_b, *t);
      if (auto t = passage(section.x_a)) last_a = std::max(last_a, *t);
    }
  }
  std::vector<Interval> out;
  if (!std::isfinite(first_b) || !std::isfinite(last_a)) return out;
  for (std::size_t k = 0;; ++k) {
    const double start = first_b + static_cast<double>(k) * stride;
    if (start + duration > last_a + 1e-9) break;
    out.push_back({start, duration});
  }
  return out;
}

double r_squared(std::span<const double> ys, std::span<const double> predicted) {
  const double mean = shifted_mean(ys);
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    ss_tot += (ys[i] - mean) * (ys[i] - mean);
    ss_res += (ys[i] - predicted[i]) * (ys[i] - predicted[i]);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("fit needs equally many x and y values");
  if (xs.size() < 2) throw DomainError("linear fit needs at least two points");
  const double mx = shifted_mean(xs);
  const double my = shifted_mean(ys);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("linear fit needs at least two distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.n = xs.size();
  std::vector<double> pred(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) pred[i] = fit.intercept + fit.slope * xs[i];
  fit.r_squared = r_squared(ys, pred);
  return fit;
}

CurveFit fit_reciprocal(std::span<const double> xs, std::span<const double> ys) {
  std::vector<double> inv(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0)) throw DomainError("reciprocal fit needs positive x values");
    inv[i] = 1.0 / xs[i];
  }
  const LinearFit lin = fit_linear(inv, ys);
  return CurveFit{lin.intercept, lin.slope, lin.r_squared, lin.n, 0};
}

CurveFit fit_exponential(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("fit needs equally many x and y values");
  std::vector<double> kept_x;
  std::vector<double> kept_y;
  std::vector<double> log_y;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] > 0.0) {
      kept_x.push_back(xs[i]);
      kept_y.push_back(ys[i]);
      log_y.push_back(std::log(ys[i]));
    }
  }
  if (kept_x.size() < 2) throw DomainError("exponential fit needs at least two positive y values");
  const LinearFit lin = fit_linear(kept_x, log_y);
  CurveFit fit;
  fit.a = std::exp(lin.intercept);
  fit.b = lin.slope;
  fit.n = kept_x.size();
  fit.excluded = xs.size() - kept_x.size();
  std::vector<double> pred(kept_x.size());
  for (std::size_t i = 0; i < kept_x.size(); ++i) pred[i] = fit.a * std::exp(fit.b * kept_x[i]);
  fit.r_squared = r_squared(kept_y, pred);
  return fit;
}

CapacityComparison capacity_comparison(std::span<const CalibrationSample> samples,
                                       const FundamentalDiagram& fd,
                                       const IntensityModel& intensity) {
  if (samples.empty()) throw DomainError("capacity comparison needs at least one sample");
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                      [](const auto& a, const auto& b) { return a.rho < b.rho; });
  return capacity_comparison(lo->rho, hi->rho, fd, intensity);
}

CapacityComparison capacity_comparison(double rho_lo, double rho_hi, const FundamentalDiagram& fd,
                                       const IntensityModel& intensity) {
  if (!(rho_hi >= rho_lo) || !(rho_lo >= 0.0)) throw DomainError("invalid density range");

  // Flows are -inf where the effective density exceeds jam.
  auto flow_with = [&](double rho) {
    const double eps = eval_intensity(intensity, 0.0, rho);
    const TrafficState s{eps, rho};
    if (s.effective_density() > fd.jam_density()) return -std::numeric_limits<double>::infinity();
    return flow_lc(fd, s);
  };
  auto flow_without = [&](double rho) {
    const double eps = eval_intensity(intensity, 0.0, rho);
    const TrafficState s{eps, rho};
    if (s.effective_density() > fd.jam_density()) return -std::numeric_limits<double>::infinity();
    return flow_no_lc(fd, s);
  };

  auto maximize = [&](const auto& f) {
    constexpr int n = 4000;
    const double h = (rho_hi - rho_lo) / n;
    int best = 0;
    double best_val = f(rho_lo);
    for (int i = 1; i <= n; ++i) {
      const double v = f(rho_lo + i * h);
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    double arg = rho_lo + best * h;
    if (h > 0.0) {
      const double a = std::max(rho_lo, arg - h);
      const double b = std::min(rho_hi, arg + h);
      const double refined = golden_max(f, a, b);
      if (f(refined) > best_val) {
        arg = refined;
        best_val = f(refined);
      }
    }
    return std::pair{arg, best_val};
  };

  CapacityComparison out;
  std::tie(out.rho_no_lc, out.cap_no_lc) = maximize(flow_without);
  std::tie(out.rho_lc, out.cap_lc) = maximize(flow_with);
  if (!(out.cap_no_lc > 0.0)) throw DomainError("no positive flow in the sampled density range");
  out.reduction = 1.0 - out.cap_lc / out.cap_no_lc;
  return out;
}

PipelineResult run_pipeline(std::span<const TrajectoryRecord> records,
                            std::span<const double> separations, const PipelineOptions& opts) {
  const std::vector<VehicleTrajectory> vehicles = group_by_vehicle(records);
  const DetectionResult detected = detect_lane_changes(vehicles, separations, opts.detection);
  const double stride = opts.stride > 0.0 ? opts.stride : opts.interval;
  PipelineResult out;
  out.event_count = detected.events.size();
  out.dropped = detected.dropped;
  for (const Interval& iv : select_intervals(vehicles, opts.section, opts.interval, stride)) {
    out.samples.push_back(aggregate_interval(vehicles, detected.events, opts.section, iv));
  }
  return out;
}

}  // namespace lckw::calibrate
