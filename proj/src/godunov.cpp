#include "lckw/godunov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lckw/errors.hpp"
#include "lckw/riemann.hpp"

namespace lckw {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> cell_intensities(const RoadScenario& scn, const std::vector<double>& rho,
                                     double t, std::size_t& clamps) {
  const IntensityModel& model = scn.intensity.at(t);
  std::vector<double> eps(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    eps[i] = eval_intensity(model, scn.cell_center(i), rho[i], clamps);
  }
  return eps;
}

double upstream_demand(const RoadScenario& scn, double t) {
  return std::visit(overloaded{[t](const FlowSchedule& f) { return f.at(t); },
                               [&scn](const TrafficState& s) { return demand(scn.fd, s); }},
                    scn.upstream);
}

double downstream_supply(const RoadScenario& scn, double t) {
  return std::visit(overloaded{[&scn](const FreeOutflow&) { return capacity(scn.fd, 0.0); },
                               [t](const FlowSchedule& f) { return f.at(t); },
                               [&scn](const TrafficState& s) { return supply(scn.fd, s); }},
                    scn.downstream);
}

}  // namespace

double FlowSchedule::at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return values.front();
  return values[static_cast<std::size_t>(std::distance(times.begin(), it)) - 1];
}

double SimState::total_vehicles(double dx) const {
  return std::accumulate(rho.begin(), rho.end(), 0.0) * dx;
}

void validate(const RoadScenario& scn) {
  if (scn.cell_count < 1) throw DomainError("scenario needs at least one cell");
  if (!(scn.length > 0.0)) throw DomainError("scenario length must be positive");
  if (!(scn.cfl > 0.0) || scn.cfl > 1.0) throw DomainError("cfl must lie in (0, 1]");
  if (!(scn.t_end >= 0.0)) throw DomainError("t_end must be nonnegative");
  if (scn.initial_density.size() != scn.cell_count) {
    throw DomainError("initial density has " + std::to_string(scn.initial_density.size()) +
                      " values for " + std::to_string(scn.cell_count) + " cells");
  }
  auto check_flow = [](const FlowSchedule& f) {
    if (f.times.empty() || f.times.size() != f.values.size()) {
      throw DomainError("flow schedule needs one value per time");
    }
    for (double v : f.values) {
      if (!(v >= 0.0)) throw DomainError("boundary flows must be nonnegative");
    }
  };
  std::visit(overloaded{check_flow, [&scn](const TrafficState& s) { validate(scn.fd, s); }},
             scn.upstream);
  std::visit(overloaded{[](const FreeOutflow&) {}, check_flow,
                        [&scn](const TrafficState& s) { validate(scn.fd, s); }},
             scn.downstream);
}

SimState initial_state(const RoadScenario& scn) {
  validate(scn);
  SimState s;
  s.t = 0.0;
  s.rho = scn.initial_density;
  s.eps = cell_intensities(scn, s.rho, 0.0, s.clamp_count);
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    try {
      validate(scn.fd, TrafficState{s.eps[i], s.rho[i]});
    } catch (const DomainError& e) {
      throw DomainError("initial state of cell " + std::to_string(i) + ": " + e.what());
    }
  }
  return s;
}

double stable_dt(const RoadScenario& scn) {
  return scn.cfl * scn.cell_width() / scn.fd.max_wave_speed();
}

std::vector<double> interface_fluxes(const RoadScenario& scn, const SimState& state) {
  const std::size_t n = state.rho.size();
  std::vector<double> q(n + 1);
  q[0] = std::min(upstream_demand(scn, state.t), supply(scn.fd, {state.eps[0], state.rho[0]}));
  for (std::size_t i = 1; i < n; ++i) {
    q[i] = boundary_flux(scn.fd, {state.eps[i - 1], state.rho[i - 1]},
                         {state.eps[i], state.rho[i]});
  }
  q[n] = std::min(demand(scn.fd, {state.eps[n - 1], state.rho[n - 1]}),
                  downstream_supply(scn, state.t));
  return q;
}

SimState step(const RoadScenario& scn, const SimState& state, double dt) {
  const std::size_t n = state.rho.size();
  const double dx = scn.cell_width();
  const double ratio = dt / dx;
  const std::vector<double> q = interface_fluxes(scn, state);

  SimState next;
  next.t = state.t + dt;
  next.rho.resize(n);
  next.clamp_count = state.clamp_count;
  for (std::size_t i = 0; i < n; ++i) {
    next.rho[i] = state.rho[i] + ratio * (q[i] - q[i + 1]);
  }
  next.cumulative_inflow = state.cumulative_inflow + q[0] * dt;
  next.cumulative_outflow = state.cumulative_outflow + q[n] * dt;

  if (scn.intensity.density_dependent() || scn.intensity.size() > 1) {
    next.eps = cell_intensities(scn, next.rho, next.t, next.clamp_count);
  } else {
    next.eps = state.eps;
  }

  const double tol = 1e-9 * scn.fd.jam_density();
  for (std::size_t i = 0; i < n; ++i) {
    const double rho_max = max_density(scn.fd, next.eps[i]);
    double& r = next.rho[i];
    if (r < 0.0 && r >= -tol) r = 0.0;
    if (r > rho_max && r <= rho_max + tol) r = rho_max;
    if (!(r >= 0.0) || r > rho_max) {
      std::ostringstream os;
      os.precision(12);
      os << "numerical blow-up in cell " << i << " at t = " << next.t << " h: rho = " << r
         << ", eps = " << next.eps[i];
      throw NumericalError(os.str());
    }
  }
  return next;
}

Snapshot make_snapshot(const RoadScenario& scn, const SimState& state) {
  Snapshot snap{state, {}, {}};
  const std::size_t n = state.rho.size();
  snap.speed.resize(n);
  snap.flow.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TrafficState s{state.eps[i], state.rho[i]};
    snap.speed[i] = scn.fd.speed(std::min(s.effective_density(), scn.fd.jam_density()));
    snap.flow[i] = flow_lc(scn.fd, s);
  }
  return snap;
}

std::vector<Snapshot> run(const RoadScenario& scn) {
  SimState state = initial_state(scn);
  std::vector<Snapshot> out;
  out.push_back(make_snapshot(scn, state));

  const double dt_max = stable_dt(scn);
  const bool periodic = scn.output_interval > 0.0;
  std::size_t next_index = 1;
  auto next_output = [&] {
    return periodic ? std::min(static_cast<double>(next_index) * scn.output_interval, scn.t_end)
                    : scn.t_end;
  };

  while (state.t < scn.t_end) {
    const double target = next_output();
    double dt = std::min(dt_max, target - state.t);
    const bool hits_target = dt >= target - state.t;
    state = step(scn, state, dt);
    if (hits_target) {
      state.t = target;  // remove accumulated round-off
      out.push_back(make_snapshot(scn, state));
      ++next_index;
    }
  }
  return out;
}

}  // namespace lckw
