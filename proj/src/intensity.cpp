#include "lckw/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lckw/errors.hpp"
#include "lckw/units.hpp"

namespace lckw {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double raw_value(const IntensityModel& model, double x, double rho, std::size_t& clamps);

double raw_value(const PiecewiseIntensity& m, double x, double rho, std::size_t& clamps) {
  const auto& bp = m.breakpoints;
  if (!(x >= bp.front()) || x > bp.back()) {
    throw DomainError("position " + std::to_string(x) + " outside intensity coverage [" +
                      std::to_string(bp.front()) + ", " + std::to_string(bp.back()) + "]");
  }
  // upper_bound gives the first breakpoint > x, so segment index is one less.
  auto it = std::upper_bound(bp.begin(), bp.end(), x);
  auto idx = static_cast<std::size_t>(std::distance(bp.begin(), it));
  idx = idx == 0 ? 0 : idx - 1;
  idx = std::min(idx, m.segments.size() - 1);
  return eval_intensity(m.segments[idx], x, rho, clamps);
}

double raw_value(const IntensityModel& model, double x, double rho, std::size_t& clamps) {
  return std::visit(
      overloaded{
          [](const ConstantIntensity& m) { return m.eps; },
          [rho](const ReverseLambdaIntensity& m) {
            if (rho < m.critical_density) return 0.0;
            const double r = rho / m.jam_density;
            return (2.0 - 2.0 * r) / (15.0 + 2.0 * r);
          },
          [rho](const TabulatedIntensity& m) {
            const auto& d = m.density;
            if (rho <= d.front()) return m.eps.front();
            if (rho >= d.back()) return m.eps.back();
            auto it = std::upper_bound(d.begin(), d.end(), rho);
            const auto i = static_cast<std::size_t>(std::distance(d.begin(), it)) - 1;
            const double w = (rho - d[i]) / (d[i + 1] - d[i]);
            return m.eps[i] + w * (m.eps[i + 1] - m.eps[i]);
          },
          [rho](const ReciprocalIntensity& m) {
            return m.a + m.b / std::max(rho, m.min_density);
          },
          [rho](const ExponentialIntensity& m) { return m.a * std::exp(m.b * rho); },
          [x, rho, &clamps](const PiecewiseIntensity& m) { return raw_value(m, x, rho, clamps); }},
      model.variant());
}

}  // namespace

IntensityModel::IntensityModel(ReverseLambdaIntensity m) : model_(m) {
  if (!(m.critical_density > 0.0) || !(m.critical_density < m.jam_density)) {
    throw DomainError("reverse-lambda intensity requires 0 < rho_c < rho_j");
  }
}

IntensityModel::IntensityModel(TabulatedIntensity m) {
  if (m.density.empty() || m.density.size() != m.eps.size()) {
    throw DomainError("tabulated intensity needs matching, non-empty density and eps columns");
  }
  if (!std::is_sorted(m.density.begin(), m.density.end()) ||
      std::adjacent_find(m.density.begin(), m.density.end()) != m.density.end()) {
    throw DomainError("tabulated intensity densities must be strictly increasing");
  }
  model_ = std::move(m);
}

IntensityModel::IntensityModel(PiecewiseIntensity m) {
  if (m.segments.empty() || m.breakpoints.size() != m.segments.size() + 1) {
    throw DomainError("piecewise intensity needs n+1 breakpoints for n segments");
  }
  for (std::size_t i = 1; i < m.breakpoints.size(); ++i) {
    if (!(m.breakpoints[i] > m.breakpoints[i - 1])) {
      throw DomainError("piecewise intensity breakpoints must be strictly increasing");
    }
  }
  model_ = std::move(m);
}

bool IntensityModel::density_dependent() const {
  return std::visit(overloaded{[](const ConstantIntensity&) { return false; },
                               [](const PiecewiseIntensity& m) {
                                 return std::any_of(m.segments.begin(), m.segments.end(),
                                                    [](const IntensityModel& s) {
                                                      return s.density_dependent();
                                                    });
                               },
                               [](const auto&) { return true; }},
                    model_);
}

double eval_intensity(const IntensityModel& model, double x, double rho, std::size_t& clamp_count) {
  const double eps = raw_value(model, x, rho, clamp_count);
  if (std::isnan(eps)) throw DomainError("intensity evaluated to NaN");
  if (eps < 0.0) {
    ++clamp_count;
    return 0.0;
  }
  return eps;
}

double eval_intensity(const IntensityModel& model, double x, double rho) {
  std::size_t ignored = 0;
  return eval_intensity(model, x, rho, ignored);
}

IntensitySchedule::IntensitySchedule(std::vector<double> start_times,
                                     std::vector<IntensityModel> models)
    : start_times_(std::move(start_times)), models_(std::move(models)) {
  if (models_.empty() || start_times_.size() != models_.size()) {
    throw DomainError("intensity schedule needs one start time per snapshot");
  }
  for (std::size_t i = 1; i < start_times_.size(); ++i) {
    if (!(start_times_[i] > start_times_[i - 1])) {
      throw DomainError("intensity schedule start times must be strictly increasing");
    }
  }
}

const IntensityModel& IntensitySchedule::at(double t) const {
  auto it = std::upper_bound(start_times_.begin(), start_times_.end(), t);
  if (it == start_times_.begin()) return models_.front();
  return models_[static_cast<std::size_t>(std::distance(start_times_.begin(), it)) - 1];
}

bool IntensitySchedule::density_dependent() const {
  return std::any_of(models_.begin(), models_.end(),
                     [](const IntensityModel& m) { return m.density_dependent(); });
}

double lane_change_duration(double lane_width, double speed, double theta) {
  if (!(speed > 0.0)) throw DomainError("lane-change duration needs a positive speed");
  if (!(theta > 0.0) || !(theta < units::pi / 2.0)) {
    throw DomainError("lane-changing angle must lie in (0, pi/2)");
  }
  if (!(lane_width >= 0.0)) throw DomainError("lane width must be nonnegative");
  return lane_width / (speed * std::tan(theta));
}

double lane_change_angle(double lane_width, double speed, double duration) {
  if (!(speed > 0.0) || !(duration > 0.0) || !(lane_width > 0.0)) {
    throw DomainError("lane-change angle needs positive width, speed and duration");
  }
  return std::atan(lane_width / (speed * duration));
}

double UniformTrafficSpec::lane_change_time() const {
  if (t_lc) return *t_lc;
  if (lane_width && speed && theta) return lane_change_duration(*lane_width, *speed, *theta);
  throw DomainError("uniform traffic needs t_lc or (lane_width, speed, theta)");
}

double UniformTrafficSpec::traversal() const {
  if (traversal_time) {
    if (length && speed && *speed > 0.0) {
      const double derived = *length / *speed;
      if (std::abs(derived - *traversal_time) > 1e-12 * std::max(1.0, std::abs(derived))) {
        throw DomainError("traversal time disagrees with length / speed");
      }
    }
    return *traversal_time;
  }
  if (length && speed && *speed > 0.0) return *length / *speed;
  throw DomainError("uniform traffic needs a traversal time or (length, speed)");
}

double uniform_intensity(const UniformTrafficSpec& spec) {
  if (!(spec.alpha >= 0.0) || !(spec.rho_lc >= 0.0) || !(spec.rho >= 0.0)) {
    throw DomainError("uniform traffic quantities must be nonnegative");
  }
  if (spec.rho_lc > spec.rho) throw DomainError("lane-changing density exceeds total density");
  if (!(spec.rho > 0.0)) throw DomainError("uniform intensity needs a positive density");
  const double t_total = spec.traversal();
  if (!(t_total > 0.0)) throw DomainError("uniform intensity needs a positive traversal time");
  const double t_lc = spec.lane_change_time();
  if (!(t_lc >= 0.0)) throw DomainError("lane-change duration must be nonnegative");
  return spec.alpha * spec.rho_lc * t_lc / (spec.rho * t_total);
}

double onramp_intensity(double q_on, double t_lc, double rho, double length) {
  if (!(rho * length > 0.0)) throw DomainError("on-ramp intensity needs rho * L > 0");
  if (!(q_on >= 0.0) || !(t_lc >= 0.0)) {
    throw DomainError("on-ramp flow and lane-change duration must be nonnegative");
  }
  return 2.5 * q_on * t_lc / (rho * length);
}

}  // namespace lckw
