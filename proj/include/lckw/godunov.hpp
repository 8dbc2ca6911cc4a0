#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "lckw/fundamental_diagram.hpp"
#include "lckw/intensity.hpp"

namespace lckw {

/// Piecewise-constant flow in time: values[i] applies from times[i] on.
struct FlowSchedule {
  std::vector<double> times{0.0};
  std::vector<double> values{0.0};

  static FlowSchedule constant(double q) { return FlowSchedule{{0.0}, {q}}; }
  double at(double t) const;
};

/// Outflow limited only by the zero-intensity capacity.
struct FreeOutflow {};

/// Upstream boundary: a demand flow, or a ghost state whose demand is used.
using UpstreamBoundary = std::variant<FlowSchedule, TrafficState>;
/// Downstream boundary: a supply flow, a ghost state whose supply is used,
/// or free outflow.
using DownstreamBoundary = std::variant<FreeOutflow, FlowSchedule, TrafficState>;

struct RoadScenario {
  double length = 1.0;  // [mi]
  std::size_t cell_count = 1;
  FundamentalDiagram fd = FundamentalDiagram::triangular(65.0, 40.0, 240.0);
  IntensitySchedule intensity = IntensityModel{};
  std::vector<double> initial_density;  // one per cell [veh/mi]
  UpstreamBoundary upstream = FlowSchedule::constant(0.0);
  DownstreamBoundary downstream = FreeOutflow{};
  double cfl = 0.9;
  double t_end = 0.0;            // [h]
  double output_interval = 0.0;  // [h]; <= 0 emits only the first and last snapshots
  double x_origin = 0.0;         // position of the upstream end [mi]

  double cell_width() const { return length / static_cast<double>(cell_count); }
  double cell_center(std::size_t i) const {
    return x_origin + (static_cast<double>(i) + 0.5) * cell_width();
  }
};

struct SimState {
  double t = 0.0;
  std::vector<double> rho;
  std::vector<double> eps;
  double cumulative_inflow = 0.0;   // [veh]
  double cumulative_outflow = 0.0;  // [veh]
  std::size_t clamp_count = 0;      // negative intensities clamped to zero

  double total_vehicles(double dx) const;
};

/// Snapshot row data for output: density, intensity, speed and flow per cell.
struct Snapshot {
  SimState state;
  std::vector<double> speed;
  std::vector<double> flow;
};

/// Throws DomainError for an inconsistent scenario.
void validate(const RoadScenario& scn);

/// Initial state at t = 0 with intensities evaluated per cell.
SimState initial_state(const RoadScenario& scn);

/// cfl * dx / max(v_f, |jam wave speed|).
double stable_dt(const RoadScenario& scn);

/// Interface fluxes q_{-1/2}, ..., q_{n-1/2} (n+1 values) for the state.
std::vector<double> interface_fluxes(const RoadScenario& scn, const SimState& state);

/// One Godunov update of length dt. Throws NumericalError if a cell leaves
/// the admissible set.
SimState step(const RoadScenario& scn, const SimState& state, double dt);

Snapshot make_snapshot(const RoadScenario& scn, const SimState& state);

/// Advances to t_end emitting snapshots every output_interval (and at t_end).
std::vector<Snapshot> run(const RoadScenario& scn);

}  // namespace lckw
