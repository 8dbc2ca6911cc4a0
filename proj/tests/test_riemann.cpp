#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "lckw/fundamental_diagram.hpp"
#include "lckw/riemann.hpp"

using namespace lckw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const FundamentalDiagram tri = FundamentalDiagram::triangular(65.0, 40.0, 240.0);
const FundamentalDiagram ms = FundamentalDiagram::max_sensitivity(65.0, -15.0, 240.0);

// Closed-form demand and supply of the (65, 40, 240) triangle in terms of
// effective density: D = min(v_f rho_bar, C) / (1+eps), S = min(w (rho_j - rho_bar), C) / (1+eps).
double tri_demand(const TrafficState& s) {
  return std::min(65.0 * s.effective_density(), 2600.0) / (1.0 + s.eps);
}
double tri_supply(const TrafficState& s) {
  return std::min(13.0 * (240.0 - s.effective_density()), 2600.0) / (1.0 + s.eps);
}

std::vector<TrafficState> grid_states(const FundamentalDiagram& fd, int n) {
  std::vector<TrafficState> out;
  for (double eps : {0.0, 0.05, 0.1, 0.2}) {
    for (int k = 0; k < n; ++k) {
      out.push_back({eps, k == n - 1 ? max_density(fd, eps) : max_density(fd, eps) * k / (n - 1)});
    }
  }
  return out;
}

void check_solution(const FundamentalDiagram& fd, const TrafficState& l, const TrafficState& r) {
  const RiemannSolution sol = solve(fd, l, r);
  const double scale = capacity(fd, 0.0);
  const double expected = boundary_flux(fd, l, r);
  CHECK_THAT(sol.boundary_flux, WithinAbs(expected, 1e-8 * std::max(expected, 1.0)));
  CHECK_THAT(flow_lc(fd, sample(sol, 0.0)), WithinAbs(sol.boundary_flux, 1e-9 * scale));

  for (std::size_t i = 0; i < sol.waves.size(); ++i) {
    const Wave& w = sol.waves[i];
    CHECK(w.speed_lo <= w.speed_hi);
    if (i > 0) CHECK(sol.waves[i - 1].speed_hi <= w.speed_lo + 1e-9 * fd.max_wave_speed());
    if (w.family == WaveFamily::standing) {
      CHECK(w.speed_lo == 0.0);
      CHECK(w.speed_hi == 0.0);
      CHECK_THAT(flow_lc(fd, w.left), WithinAbs(flow_lc(fd, w.right), 1e-9 * scale));
      // Both ends on the same side of the transitional curve (or on it).
      const double tol = 1e-9 * fd.jam_density();
      const bool l_uc = w.left.rho <= critical_density(fd, w.left.eps) + tol;
      const bool l_oc = w.left.rho >= critical_density(fd, w.left.eps) - tol;
      const bool r_uc = w.right.rho <= critical_density(fd, w.right.eps) + tol;
      const bool r_oc = w.right.rho >= critical_density(fd, w.right.eps) - tol;
      CHECK(((l_uc && r_uc) || (l_oc && r_oc)));
    } else {
      CHECK(w.left.eps == w.right.eps);
    }
    if (w.family == WaveFamily::shock) {
      const double rh = (flow_lc(fd, w.right) - flow_lc(fd, w.left)) / (w.right.rho - w.left.rho);
      CHECK_THAT(w.speed_lo, WithinAbs(rh, 1e-9 * fd.max_wave_speed()));
    }
  }
}

}  // namespace

TEST_CASE("demand examples") {
  CHECK_THAT(demand(tri, {0.0, 20.0}), WithinRel(1300.0, 1e-14));
  CHECK_THAT(demand(tri, {0.0, 240.0}), WithinRel(2600.0, 1e-14));
  for (double eps : {0.0, 0.1, 0.3}) {
    CHECK_THAT(demand(tri, {eps, critical_density(tri, eps)}), WithinRel(capacity(tri, eps), 1e-14));
    CHECK_THAT(demand(ms, {eps, critical_density(ms, eps)}), WithinRel(capacity(ms, eps), 1e-14));
  }
}

TEST_CASE("supply examples") {
  CHECK_THAT(supply(tri, {0.0, 0.0}), WithinRel(2600.0, 1e-14));
  CHECK_THAT(supply(tri, {0.1, 200.0}), WithinRel(0.2 * 65.0 * 20.0 / 1.1, 1e-12));
  for (double eps : {0.0, 0.1, 0.3}) {
    CHECK_THAT(supply(tri, {eps, max_density(tri, eps)}), WithinAbs(0.0, 1e-9));
    CHECK_THAT(supply(ms, {eps, max_density(ms, eps)}), WithinAbs(0.0, 1e-9));
  }
}

TEST_CASE("boundary flux examples") {
  CHECK_THAT(boundary_flux(tri, {0.0, 240.0}, {0.0, 0.0}), WithinRel(2600.0, 1e-14));
  for (const TrafficState s : {TrafficState{0.0, 20.0}, TrafficState{0.1, 150.0}, TrafficState{0.2, 0.0}}) {
    CHECK_THAT(boundary_flux(tri, s, s), WithinAbs(flow_lc(tri, s), 1e-12));
  }
  CHECK_THAT(boundary_flux(tri, {0.0, 40.0}, {0.1, 200.0}), WithinAbs(236.36, 0.005));
}

TEST_CASE("demand and supply match closed forms and bound the flow") {
  for (const auto& s : grid_states(tri, 60)) {
    CHECK_THAT(demand(tri, s), WithinAbs(tri_demand(s), 1e-9));
    CHECK_THAT(supply(tri, s), WithinAbs(tri_supply(s), 1e-9));
  }
  for (const auto* fd : {&tri, &ms}) {
    for (const auto& s : grid_states(*fd, 60)) {
      CHECK(demand(*fd, s) >= flow_lc(*fd, s));
      CHECK(supply(*fd, s) >= flow_lc(*fd, s));
    }
  }
}

TEST_CASE("classification examples") {
  CHECK(classify(tri, {0.0, 20.0}, {0.1, 20.0}) == 1);
  CHECK(classify(tri, {0.0, 40.0}, {0.1, 200.0}) == 3);
  CHECK(classify(tri, {0.0, 240.0}, {0.0, 10.0}) == 7);
}

TEST_CASE("type 1 solution") {
  const RiemannSolution sol = solve(tri, {0.0, 20.0}, {0.1, 20.0});
  CHECK(sol.type_id == 1);
  CHECK_THAT(sol.boundary_flux, WithinRel(1300.0, 1e-14));
  REQUIRE(sol.intermediates.size() == 1);
  CHECK_THAT(sol.intermediates[0].rho, WithinRel(20.0, 1e-12));
  CHECK(sol.intermediates[0].eps == 0.1);
  // U1 coincides with U_R, so the trailing 1-wave has zero strength and is omitted.
  REQUIRE(sol.waves.size() == 1);
  CHECK(sol.waves[0].family == WaveFamily::standing);
  const TrafficState at0 = sample(sol, 0.0);
  CHECK_THAT(flow_lc(tri, at0), WithinRel(1300.0, 1e-12));
}

TEST_CASE("type 5 solution") {
  const TrafficState l{0.1, 200.0};
  const TrafficState r{0.0, 230.0};
  const RiemannSolution sol = solve(tri, l, r);
  CHECK(sol.type_id == 5);
  CHECK_THAT(sol.boundary_flux, WithinRel(130.0, 1e-12));
  REQUIRE(sol.intermediates.size() == 1);
  // On the congested branch at eps = 0.1: 13 (240 - 1.1 rho) / 1.1 = 130.
  const double rho1 = (240.0 - 130.0 * 1.1 / 13.0) / 1.1;
  CHECK_THAT(sol.intermediates[0].rho, WithinRel(rho1, 1e-12));
  REQUIRE(sol.waves.size() == 2);
  CHECK(sol.waves[0].family == WaveFamily::shock);
  CHECK(sol.waves[1].family == WaveFamily::standing);
  const double rh = (130.0 - flow_lc(tri, l)) / (rho1 - 200.0);
  CHECK_THAT(sol.waves[0].speed_lo, WithinRel(rh, 1e-10));
  CHECK(sol.waves[0].speed_lo < 0.0);
}

TEST_CASE("equal states give an empty wave list") {
  for (const auto* fd : {&tri, &ms}) {
    const TrafficState s{0.1, 77.0};
    const RiemannSolution sol = solve(*fd, s, s);
    CHECK(sol.waves.empty());
    CHECK_THAT(sol.boundary_flux, WithinRel(flow_lc(*fd, s), 1e-14));
    CHECK(sample(sol, -100.0) == s);
    CHECK(sample(sol, 100.0) == s);
  }
}

TEST_CASE("sampling far from the fan returns the end states") {
  const TrafficState l{0.0, 150.0};
  const TrafficState r{0.2, 30.0};
  for (const auto* fd : {&tri, &ms}) {
    const RiemannSolution sol = solve(*fd, l, r);
    CHECK(sample(sol, -1000.0) == l);
    CHECK(sample(sol, 1000.0) == r);
  }
}

TEST_CASE("rarefaction interior follows the characteristic speed") {
  // Jam release at constant intensity: a centered fan.
  const RiemannSolution sol = solve(ms, {0.1, max_density(ms, 0.1)}, {0.1, 0.0});
  REQUIRE(sol.waves.size() == 1);
  CHECK(sol.waves[0].family == WaveFamily::rarefaction);
  for (double xi : {-10.0, 0.0, 20.0, 50.0}) {
    const TrafficState s = sample(sol, xi);
    CHECK_THAT(wave_speed(ms, s), WithinAbs(xi, 1e-6));
  }
}

TEST_CASE("min-flux equivalence and wave invariants on a state grid") {
  for (const auto* fd : {&tri, &ms}) {
    const auto states = grid_states(*fd, 40);
    std::set<int> types;
    for (const auto& l : states) {
      for (const auto& r : states) {
        check_solution(*fd, l, r);
        const int t = classify(*fd, l, r);
        CHECK(t == classify(*fd, l, r));
        CHECK((t >= 1 && t <= 10));
        types.insert(t);
      }
    }
    CHECK(types.size() == 10);
  }
}

TEST_CASE("each type has its documented wave pattern") {
  struct Case {
    TrafficState l, r;
    int type;
  };
  // One representative per type on the triangular diagram.
  const Case cases[] = {
      {{0.0, 20.0}, {0.1, 10.0}, 1},   {{0.1, 10.0}, {0.0, 30.0}, 2},
      {{0.0, 30.0}, {0.1, 200.0}, 3},  {{0.0, 39.0}, {0.2, 10.0}, 4},
      {{0.1, 200.0}, {0.0, 230.0}, 5}, {{0.1, 200.0}, {0.0, 200.0}, 6},
      {{0.1, 200.0}, {0.0, 10.0}, 7},  {{0.2, 190.0}, {0.0, 39.0}, 8},
      {{0.0, 50.0}, {0.1, 10.0}, 9},   {{0.0, 100.0}, {0.1, 10.0}, 10},
  };
  for (const auto& c : cases) {
    INFO("type " << c.type);
    CHECK(classify(tri, c.l, c.r) == c.type);
    check_solution(tri, c.l, c.r);
    check_solution(ms, c.l, c.r);
  }
}
