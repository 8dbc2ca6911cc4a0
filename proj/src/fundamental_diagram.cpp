#include "lckw/fundamental_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lckw/errors.hpp"

namespace lckw {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Slope magnitude of the triangular congested branch.
double congested_slope(const TriangularParams& p) {
  return p.critical_density * p.free_speed / (p.jam_density - p.critical_density);
}

double ms_exponent(const MaxSensitivityParams& p, double rho_bar) {
  return std::abs(p.jam_wave_speed) / p.free_speed * (p.jam_density / rho_bar - 1.0);
}

double ms_speed(const MaxSensitivityParams& p, double rho_bar) {
  if (rho_bar <= 0.0) return p.free_speed;
  // v_f (1 - exp(1 - exp(z))) written with expm1 so V(rho_j) is exactly 0.
  const double z = ms_exponent(p, rho_bar);
  return -p.free_speed * std::expm1(-std::expm1(z));
}

double ms_speed_derivative_times_density(const MaxSensitivityParams& p, double rho_bar) {
  // rho_bar V'(rho_bar) = -v_f a rho_j / rho_bar * exp(z + 1 - e^z)
  if (rho_bar <= 0.0) return 0.0;
  const double a = std::abs(p.jam_wave_speed) / p.free_speed;
  const double z = ms_exponent(p, rho_bar);
  const double e = std::exp(z);
  return -p.free_speed * a * p.jam_density / rho_bar * std::exp(z + 1.0 - e);
}

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

FundamentalDiagram FundamentalDiagram::triangular(double free_speed, double critical_density,
                                                  double jam_density) {
  if (!(free_speed > 0.0) || !(jam_density > 0.0) || !(critical_density > 0.0) ||
      !(critical_density < jam_density)) {
    throw DomainError("triangular diagram requires v_f > 0 and 0 < rho_c < rho_j");
  }
  return FundamentalDiagram(TriangularParams{free_speed, critical_density, jam_density});
}

FundamentalDiagram FundamentalDiagram::max_sensitivity(double free_speed, double jam_wave_speed,
                                                       double jam_density) {
  if (!(free_speed > 0.0) || !(jam_density > 0.0) || !(jam_wave_speed < 0.0)) {
    throw DomainError("maximum-sensitivity diagram requires v_f > 0, c_j < 0 and rho_j > 0");
  }
  return FundamentalDiagram(MaxSensitivityParams{free_speed, jam_wave_speed, jam_density});
}

FundamentalDiagram::FundamentalDiagram(Params p) : params_(p) {
  std::visit(overloaded{
                 [this](const TriangularParams& t) { critical_rho_bar_ = t.critical_density; },
                 [this](const MaxSensitivityParams& m) {
                   // Q' is strictly decreasing from v_f to c_j: bisect its sign change.
                   double lo = 0.0;
                   double hi = m.jam_density;
                   for (int i = 0; i < 200; ++i) {
                     const double mid = 0.5 * (lo + hi);
                     if (mid <= lo || mid >= hi) break;
                     if (flow_slope(mid) > 0.0) {
                       lo = mid;
                     } else {
                       hi = mid;
                     }
                   }
                   critical_rho_bar_ = 0.5 * (lo + hi);
                 }},
             params_);
  max_flow_ = flow(critical_rho_bar_);
}

double FundamentalDiagram::free_speed() const {
  return std::visit([](const auto& p) { return p.free_speed; }, params_);
}

double FundamentalDiagram::jam_density() const {
  return std::visit([](const auto& p) { return p.jam_density; }, params_);
}

double FundamentalDiagram::jam_wave_speed() const {
  return std::visit(overloaded{[](const TriangularParams& t) { return -congested_slope(t); },
                               [](const MaxSensitivityParams& m) { return m.jam_wave_speed; }},
                    params_);
}

double FundamentalDiagram::max_wave_speed() const {
  return std::max(free_speed(), std::abs(jam_wave_speed()));
}

double FundamentalDiagram::speed(double rho_bar) const {
  if (!(rho_bar >= 0.0) || rho_bar > jam_density()) {
    throw DomainError("effective density " + describe(rho_bar) + " outside [0, " +
                      describe(jam_density()) + "]");
  }
  return std::visit(overloaded{[rho_bar](const TriangularParams& t) {
                                 if (rho_bar <= t.critical_density) return t.free_speed;
                                 return congested_slope(t) * (t.jam_density - rho_bar) / rho_bar;
                               },
                               [rho_bar](const MaxSensitivityParams& m) {
                                 return ms_speed(m, rho_bar);
                               }},
                    params_);
}

double FundamentalDiagram::flow(double rho_bar) const {
  if (const auto* t = std::get_if<TriangularParams>(&params_)) {
    if (!(rho_bar >= 0.0) || rho_bar > t->jam_density) speed(rho_bar);  // throws
    if (rho_bar <= t->critical_density) return t->free_speed * rho_bar;
    return congested_slope(*t) * (t->jam_density - rho_bar);
  }
  return rho_bar * speed(rho_bar);
}

double FundamentalDiagram::flow_slope(double rho_bar) const {
  return std::visit(overloaded{[rho_bar](const TriangularParams& t) {
                                 return rho_bar < t.critical_density ? t.free_speed
                                                                     : -congested_slope(t);
                               },
                               [rho_bar](const MaxSensitivityParams& m) {
                                 return ms_speed(m, rho_bar) +
                                        ms_speed_derivative_times_density(m, rho_bar);
                               }},
                    params_);
}

double FundamentalDiagram::flow_slope_below(double rho_bar) const {
  if (const auto* t = std::get_if<TriangularParams>(&params_)) {
    return rho_bar <= t->critical_density ? t->free_speed : -congested_slope(*t);
  }
  return flow_slope(rho_bar);
}

double max_density(const FundamentalDiagram& fd, double eps) {
  return fd.jam_density() / (1.0 + eps);
}

void validate(const FundamentalDiagram& fd, const TrafficState& s) {
  if (!(s.eps >= 0.0) || !std::isfinite(s.eps)) {
    throw DomainError("lane-changing intensity " + describe(s.eps) + " must be >= 0");
  }
  if (!(s.rho >= 0.0) || s.rho > max_density(fd, s.eps)) {
    throw DomainError("density " + describe(s.rho) + " outside [0, " +
                      describe(max_density(fd, s.eps)) + "] at intensity " + describe(s.eps));
  }
}

double speed(const FundamentalDiagram& fd, double rho_bar) { return fd.speed(rho_bar); }

double flow_lc(const FundamentalDiagram& fd, const TrafficState& s) {
  validate(fd, s);
  const double rho_bar = std::min(s.effective_density(), fd.jam_density());
  return s.rho * fd.speed(rho_bar);
}

double flow_no_lc(const FundamentalDiagram& fd, const TrafficState& s) {
  return (1.0 + s.eps) * flow_lc(fd, s);
}

double wave_speed(const FundamentalDiagram& fd, const TrafficState& s) {
  validate(fd, s);
  if (fd.is_triangular()) {
    // Decide the branch on the transitional curve so the kink is congested
    // exactly where supply/demand switch branches.
    return s.rho >= critical_density(fd, s.eps) ? fd.jam_wave_speed() : fd.free_speed();
  }
  return fd.flow_slope(std::min(s.effective_density(), fd.jam_density()));
}

double critical_density(const FundamentalDiagram& fd, double eps) {
  if (!(eps >= 0.0)) throw DomainError("lane-changing intensity " + describe(eps) + " must be >= 0");
  return fd.critical_effective_density() / (1.0 + eps);
}

double capacity(const FundamentalDiagram& fd, double eps) {
  return flow_lc(fd, TrafficState{eps, critical_density(fd, eps)});
}

bool is_undercritical(const FundamentalDiagram& fd, const TrafficState& s) {
  return s.rho <= critical_density(fd, s.eps);
}

double density_for_flow(const FundamentalDiagram& fd, double eps, double q, Branch branch) {
  const double gamma = critical_density(fd, eps);
  const double rho_max = max_density(fd, eps);
  const double cap = capacity(fd, eps);
  q = std::clamp(q, 0.0, cap);

  if (const auto* t = std::get_if<TriangularParams>(&fd.params())) {
    if (branch == Branch::undercritical) {
      return std::clamp(q / t->free_speed, 0.0, gamma);
    }
    const double rho_bar = t->jam_density - q * (1.0 + eps) / congested_slope(*t);
    return std::clamp(rho_bar / (1.0 + eps), gamma, rho_max);
  }

  // Flow is strictly increasing on [0, Gamma] and strictly decreasing on
  // [Gamma, rho_max]; bisect to full double precision.
  double lo = branch == Branch::undercritical ? 0.0 : gamma;
  double hi = branch == Branch::undercritical ? gamma : rho_max;
  const bool increasing = branch == Branch::undercritical;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = flow_lc(fd, TrafficState{eps, mid});
    if ((f < q) == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Return the endpoint whose flow is closer to q.
  const double f_lo = flow_lc(fd, TrafficState{eps, lo});
  const double f_hi = flow_lc(fd, TrafficState{eps, hi});
  return std::abs(f_lo - q) <= std::abs(f_hi - q) ? lo : hi;
}

}  // namespace lckw
