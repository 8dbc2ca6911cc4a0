#include "lckw/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lckw/errors.hpp"

namespace lckw {

double demand(const FundamentalDiagram& fd, const TrafficState& s) {
  if (is_undercritical(fd, s)) return flow_lc(fd, s);
  return capacity(fd, s.eps);
}

double supply(const FundamentalDiagram& fd, const TrafficState& s) {
  if (is_undercritical(fd, s)) {
    validate(fd, s);
    return capacity(fd, s.eps);
  }
  return flow_lc(fd, s);
}

double boundary_flux(const FundamentalDiagram& fd, const TrafficState& left,
                     const TrafficState& right) {
  return std::min(demand(fd, left), supply(fd, right));
}

std::string_view to_string(WaveFamily family) {
  switch (family) {
    case WaveFamily::standing:
      return "standing";
    case WaveFamily::shock:
      return "shock";
    case WaveFamily::rarefaction:
      return "rarefaction";
  }
  return "unknown";
}

namespace {

bool on_or_above_curve(const FundamentalDiagram& fd, const TrafficState& s) {
  return s.rho >= critical_density(fd, s.eps);
}

// Characteristic speed seen from lower densities. Differs from wave_speed
// only at the kink of the triangular diagram.
double wave_speed_below(const FundamentalDiagram& fd, const TrafficState& s) {
  if (fd.is_triangular()) {
    return s.rho > critical_density(fd, s.eps) ? fd.jam_wave_speed() : fd.free_speed();
  }
  return wave_speed(fd, s);
}

TrafficState critical_state(const FundamentalDiagram& fd, double eps) {
  return {eps, critical_density(fd, eps)};
}

// State at intensity eps on the given branch carrying flow q.
TrafficState on_branch(const FundamentalDiagram& fd, double eps, double q, Branch branch) {
  const double cap = capacity(fd, eps);
  if (q > cap * (1.0 + 1e-12)) {
    throw NumericalError("no state at intensity " + std::to_string(eps) + " carries flow " +
                         std::to_string(q) + " (capacity " + std::to_string(cap) + ")");
  }
  return {eps, density_for_flow(fd, eps, q, branch)};
}

// Other end of a standing wave starting at `from`. With unchanged intensity
// the constant-flux curve through `from` is the point itself.
TrafficState standing_partner(const FundamentalDiagram& fd, const TrafficState& from, double eps,
                              double q, Branch branch) {
  if (from.eps == eps) return from;
  return on_branch(fd, eps, q, branch);
}

bool degenerate(const FundamentalDiagram& fd, const TrafficState& a, const TrafficState& b) {
  return a.eps == b.eps && std::abs(a.rho - b.rho) <= 1e-12 * fd.jam_density();
}

// Density on the constant-eps curve between rho_lo and rho_hi whose
// characteristic speed equals xi.
double rarefaction_density(const FundamentalDiagram& fd, double eps, double rho_lo, double rho_hi,
                           double xi) {
  if (fd.is_triangular()) return std::clamp(critical_density(fd, eps), rho_lo, rho_hi);
  double lo = rho_lo;  // speed decreases with density
  double hi = rho_hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (wave_speed(fd, TrafficState{eps, mid}) > xi) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

int classify(const FundamentalDiagram& fd, const TrafficState& left, const TrafficState& right) {
  validate(fd, left);
  validate(fd, right);
  const double q_l = flow_lc(fd, left);
  const double q_r = flow_lc(fd, right);
  const double cap_l = capacity(fd, left.eps);
  const double cap_r = capacity(fd, right.eps);
  const bool right_uc = is_undercritical(fd, right);
  const bool right_oc = on_or_above_curve(fd, right);

  if (is_undercritical(fd, left)) {
    if (right_uc && q_r <= q_l && q_l <= cap_r) return 1;
    if (q_r > q_l) return 2;
    if (right_oc && q_r <= q_l) return 3;
    return 4;
  }
  if (right_oc && q_r <= q_l) return 5;
  if (right_oc && q_l < q_r && q_r <= cap_l) return 6;
  if (right_uc && q_r <= cap_l && cap_l <= cap_r) return 7;
  if (q_r > cap_l) return 8;
  if (right_uc && cap_r < q_l) return 9;
  return 10;
}

RiemannSolution solve(const FundamentalDiagram& fd, const TrafficState& left,
                      const TrafficState& right) {
  RiemannSolution sol{fd, left, right, 0, {}, {}, 0.0};
  sol.type_id = classify(fd, left, right);

  const double q_l = flow_lc(fd, left);
  const double q_r = flow_lc(fd, right);
  const double cap_l = capacity(fd, left.eps);
  const double cap_r = capacity(fd, right.eps);

  // Chain of states U_L, intermediates..., U_R; the standing wave sits
  // between chain[standing] and chain[standing + 1].
  std::vector<TrafficState> chain;
  std::size_t standing = 0;
  switch (sol.type_id) {
    case 1:
    case 2:
      chain = {left, standing_partner(fd, left, right.eps, q_l, Branch::undercritical), right};
      standing = 0;
      break;
    case 3:
    case 5:
    case 6:
      chain = {left, standing_partner(fd, right, left.eps, q_r, Branch::overcritical), right};
      standing = 1;
      break;
    case 4:
    case 9:
    case 10:
      chain = {left, on_branch(fd, left.eps, cap_r, Branch::overcritical),
               critical_state(fd, right.eps), right};
      standing = 1;
      break;
    case 7:
    case 8: {
      const TrafficState u1 = critical_state(fd, left.eps);
      chain = {left, u1, standing_partner(fd, u1, right.eps, cap_l, Branch::undercritical), right};
      standing = 1;
      break;
    }
    default:
      throw NumericalError("unreachable Riemann type " + std::to_string(sol.type_id));
  }
  sol.intermediates.assign(chain.begin() + 1, chain.end() - 1);

  // Collapse zero-strength waves onto the given end states.
  const std::size_t last = chain.size() - 1;
  for (std::size_t i = 0; i + 1 < last; ++i) {
    if (degenerate(fd, chain[i], chain[i + 1])) chain[i + 1] = chain[i];
  }
  for (std::size_t i = last - 1; i > 0; --i) {
    if (degenerate(fd, chain[i], chain[i + 1])) chain[i] = chain[i + 1];
  }

  for (std::size_t i = 0; i < last; ++i) {
    const TrafficState& a = chain[i];
    const TrafficState& b = chain[i + 1];
    if (a == b) continue;
    const bool left_of_standing = i < standing;
    if (i == standing && a.eps != b.eps) {
      sol.waves.push_back({WaveFamily::standing, a, b, 0.0, 0.0});
      continue;
    }
    if (a.eps != b.eps) {
      throw NumericalError("1-wave across an intensity jump in Riemann type " +
                           std::to_string(sol.type_id));
    }
    Wave w{};
    w.left = a;
    w.right = b;
    if (a.rho < b.rho) {
      w.family = WaveFamily::shock;
      const double s = (flow_lc(fd, b) - flow_lc(fd, a)) / (b.rho - a.rho);
      w.speed_lo = w.speed_hi = s;
    } else {
      w.family = WaveFamily::rarefaction;
      w.speed_lo = wave_speed_below(fd, a);
      w.speed_hi = wave_speed(fd, b);
    }
    // Waves of the left intensity travel backward, those of the right one
    // forward; clamp round-off around the standing wave.
    if (left.eps != right.eps) {
      if (left_of_standing) {
        w.speed_lo = std::min(w.speed_lo, 0.0);
        w.speed_hi = std::min(w.speed_hi, 0.0);
      } else {
        w.speed_lo = std::max(w.speed_lo, 0.0);
        w.speed_hi = std::max(w.speed_hi, 0.0);
      }
    }
    // Two fans meeting at the transitional curve form one fan.
    if (!sol.waves.empty() && w.family == WaveFamily::rarefaction &&
        sol.waves.back().family == WaveFamily::rarefaction && sol.waves.back().right == w.left) {
      sol.waves.back().right = w.right;
      sol.waves.back().speed_hi = w.speed_hi;
      continue;
    }
    sol.waves.push_back(w);
  }

  sol.boundary_flux = flow_lc(fd, sample(sol, 0.0));
  return sol;
}

TrafficState sample(const RiemannSolution& sol, double xi) {
  for (const Wave& w : sol.waves) {
    if (xi < w.speed_lo) return w.left;
    if (xi < w.speed_hi) {
      // Interior of a rarefaction fan.
      const double rho = rarefaction_density(sol.fd, w.left.eps, w.right.rho, w.left.rho, xi);
      return {w.left.eps, rho};
    }
  }
  return sol.waves.empty() ? sol.right : sol.waves.back().right;
}

}  // namespace lckw
