#pragma once

#include <string_view>
#include <vector>

#include "lckw/fundamental_diagram.hpp"

namespace lckw {

/// Local demand: the largest flow sendable by a state, max Q over densities
/// not above rho at the same intensity.
double demand(const FundamentalDiagram& fd, const TrafficState& s);

/// Local supply: the largest flow receivable by a state, max Q over
/// densities not below rho at the same intensity.
double supply(const FundamentalDiagram& fd, const TrafficState& s);

/// Interface flux min{D(left), S(right)}.
double boundary_flux(const FundamentalDiagram& fd, const TrafficState& left,
                     const TrafficState& right);

enum class WaveFamily { standing, shock, rarefaction };

std::string_view to_string(WaveFamily family);

/// One elementary wave of a Riemann solution. Standing waves sit at x/t = 0
/// and may change eps; shocks and rarefactions keep eps fixed. For shocks
/// and standing waves speed_lo == speed_hi.
struct Wave {
  WaveFamily family;
  TrafficState left;
  TrafficState right;
  double speed_lo;
  double speed_hi;
};

/// Self-similar solution of the Riemann problem (U_L | U_R).
struct RiemannSolution {
  FundamentalDiagram fd;
  TrafficState left;
  TrafficState right;
  int type_id = 0;
  std::vector<Wave> waves;  // ordered left to right
  std::vector<TrafficState> intermediates;
  double boundary_flux = 0.0;
};

/// Wave-pattern type 1..10. Types 1-4 have an under-critical left state,
/// 5-10 an over-critical one; on region boundaries the lowest applicable
/// type is returned.
int classify(const FundamentalDiagram& fd, const TrafficState& left, const TrafficState& right);

/// Exact solution built from standing waves along constant-flux curves and
/// 1-waves along constant-eps curves. Throws NumericalError if the required
/// intermediate state does not exist.
RiemannSolution solve(const FundamentalDiagram& fd, const TrafficState& left,
                      const TrafficState& right);

/// State at x/t = xi. Exactly on a discontinuity the downstream state is
/// returned, so sample(sol, 0) carries the boundary flux.
TrafficState sample(const RiemannSolution& sol, double xi);

}  // namespace lckw
