#include <catch_amalgamated.hpp>

#include <cmath>

#include "lckw/errors.hpp"
#include "lckw/fundamental_diagram.hpp"
#include "lckw/intensity.hpp"
#include "lckw/units.hpp"

using namespace lckw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double ft = 1.0 / 5280.0;   // mi
constexpr double sec = 1.0 / 3600.0;  // h
}  // namespace

TEST_CASE("lane-change duration and angle") {
  // D = 12 ft, v = 60 mph, t = 2.5 s gives an angle of about 3.1 degrees.
  const double theta = lane_change_angle(12.0 * ft, 60.0, 2.5 * sec);
  CHECK_THAT(units::radians_to_degrees(theta), WithinAbs(3.1, 0.05));
  CHECK_THAT(theta, WithinRel(std::atan(12.0 / (88.0 * 2.5)), 1e-12));

  CHECK_THAT(lane_change_duration(1.0, 1.0, units::pi / 4.0), WithinRel(1.0, 1e-15));
  const double t = lane_change_duration(12.0, 88.0, units::degrees_to_radians(3.1226));
  CHECK_THAT(t, WithinAbs(2.5, 1e-3));

  CHECK_THROWS_AS(lane_change_duration(12.0, 88.0, 0.0), DomainError);
  CHECK_THROWS_AS(lane_change_duration(12.0, 0.0, 0.1), DomainError);
  CHECK_THROWS_AS(lane_change_duration(12.0, 88.0, units::pi / 2.0), DomainError);
}

TEST_CASE("uniform intensity") {
  UniformTrafficSpec s;
  s.alpha = 1.5;
  s.rho = 90.0;
  s.rho_lc = 30.0;
  s.t_lc = 2.5;
  s.traversal_time = 11.4;
  CHECK_THAT(uniform_intensity(s), WithinRel(0.5 * 2.5 / 11.4, 1e-14));
  CHECK_THAT(uniform_intensity(s), WithinAbs(0.1096, 5e-5));

  s.rho_lc = 0.0;
  CHECK(uniform_intensity(s) == 0.0);

  UniformTrafficSpec all;
  all.alpha = 1.0;
  all.rho = 50.0;
  all.rho_lc = 50.0;
  all.t_lc = 7.0;
  all.traversal_time = 7.0;
  CHECK(uniform_intensity(all) == 1.0);

  UniformTrafficSpec zero = all;
  zero.rho = 0.0;
  zero.rho_lc = 0.0;
  CHECK_THROWS_AS(uniform_intensity(zero), DomainError);
  zero = all;
  zero.traversal_time = 0.0;
  CHECK_THROWS_AS(uniform_intensity(zero), DomainError);
}

TEST_CASE("uniform intensity derives T and t_LC from geometry") {
  UniformTrafficSpec s;
  s.alpha = 1.5;
  s.rho = 120.0;
  s.rho_lc = 40.0;
  s.length = 1000.0 * ft;
  s.speed = 60.0;
  s.lane_width = 12.0 * ft;
  s.theta = std::atan(12.0 / (88.0 * 2.5));
  CHECK_THAT(s.traversal(), WithinRel(1000.0 / 88.0 * sec, 1e-14));
  CHECK_THAT(s.lane_change_time(), WithinRel(2.5 * sec, 1e-12));
  CHECK_THAT(uniform_intensity(s), WithinRel(0.11, 1e-12));

  s.traversal_time = 11.4 * sec;  // inconsistent with L / v
  CHECK_THROWS_AS(uniform_intensity(s), DomainError);
}

TEST_CASE("uniform intensity is invariant under joint density scaling") {
  UniformTrafficSpec s;
  s.alpha = 1.3;
  s.rho = 77.0;
  s.rho_lc = 21.0;
  s.t_lc = 3.1;
  s.traversal_time = 17.0;
  const double base = uniform_intensity(s);
  for (double k : {0.5, 2.0, 3.7, 10.0}) {
    UniformTrafficSpec t = s;
    t.rho *= k;
    t.rho_lc *= k;
    CHECK_THAT(uniform_intensity(t), WithinRel(base, 1e-14));
  }
}

TEST_CASE("on-ramp intensity") {
  const double eps = onramp_intensity(800.0, 5.0 * sec, 200.0, 900.0 * ft);
  CHECK_THAT(eps, WithinAbs(0.0815, 0.0005));
  CHECK_THAT(eps, WithinRel(2.5 * 800.0 * (5.0 / 3600.0) / (200.0 * 900.0 / 5280.0), 1e-14));
  CHECK(onramp_intensity(0.0, 5.0 * sec, 200.0, 900.0 * ft) == 0.0);
  CHECK_THAT(onramp_intensity(800.0, 5.0 * sec, 200.0, 1800.0 * ft), WithinRel(eps / 2.0, 1e-14));
  CHECK_THROWS_AS(onramp_intensity(800.0, 5.0 * sec, 0.0, 900.0 * ft), DomainError);
}

TEST_CASE("reverse-lambda intensity") {
  const IntensityModel m(ReverseLambdaIntensity{40.0, 240.0});
  CHECK(eval_intensity(m, 0.0, 240.0) == 0.0);
  CHECK_THAT(eval_intensity(m, 0.0, 40.0), WithinRel(5.0 / 46.0, 1e-14));
  CHECK(eval_intensity(m, 0.0, std::nextafter(40.0, 0.0)) == 0.0);
  CHECK(m.density_dependent());

  // The jump produces a flow drop at the critical density.
  const FundamentalDiagram fd = FundamentalDiagram::triangular(65.0, 40.0, 240.0);
  const double below = flow_lc(fd, {eval_intensity(m, 0.0, 40.0 - 1e-9), 40.0 - 1e-9});
  const double at = flow_lc(fd, {eval_intensity(m, 0.0, 40.0), 40.0});
  CHECK(below > at);
}

TEST_CASE("fitted intensity forms") {
  const IntensityModel rec(ReciprocalIntensity{-0.0247, 24.2712});
  CHECK_THAT(eval_intensity(rec, 0.0, 200.0), WithinAbs(0.0967, 5e-5));
  const IntensityModel ex(ExponentialIntensity{0.5579, -0.0048});
  CHECK_THAT(eval_intensity(ex, 0.0, 100.0), WithinRel(0.5579 * std::exp(-0.48), 1e-14));

  // Negative tails are clamped and counted.
  std::size_t clamps = 0;
  CHECK(eval_intensity(rec, 0.0, 2000.0, clamps) == 0.0);
  CHECK(clamps == 1);
  CHECK(eval_intensity(rec, 0.0, 100.0, clamps) > 0.0);
  CHECK(clamps == 1);

  // The floor keeps the empty road finite.
  CHECK(std::isfinite(eval_intensity(rec, 0.0, 0.0)));
}

TEST_CASE("tabulated intensity interpolates linearly") {
  const IntensityModel m(TabulatedIntensity{{0.0, 100.0, 200.0}, {0.0, 0.2, 0.1}});
  CHECK_THAT(eval_intensity(m, 0.0, 50.0), WithinRel(0.1, 1e-14));
  CHECK_THAT(eval_intensity(m, 0.0, 150.0), WithinRel(0.15, 1e-14));
  CHECK(eval_intensity(m, 0.0, 500.0) == 0.1);
  CHECK_THROWS_AS(IntensityModel(TabulatedIntensity{{0.0, 0.0}, {0.1, 0.2}}), DomainError);
}

TEST_CASE("piecewise intensity by location") {
  const IntensityModel m(PiecewiseIntensity{
      {0.0, 1.0, 2.0, 3.0},
      {IntensityModel::constant(0.0), IntensityModel::constant(0.1), IntensityModel::constant(0.0)}});
  CHECK(eval_intensity(m, 0.5, 10.0) == 0.0);
  CHECK(eval_intensity(m, 1.0, 10.0) == 0.1);  // segments are closed on the left
  CHECK(eval_intensity(m, std::nextafter(2.0, 0.0), 10.0) == 0.1);
  CHECK(eval_intensity(m, 2.0, 10.0) == 0.0);
  CHECK(eval_intensity(m, 3.0, 10.0) == 0.0);  // last segment includes its right end
  CHECK_THROWS_AS(eval_intensity(m, 3.5, 10.0), DomainError);
  CHECK_THROWS_AS(eval_intensity(m, -0.1, 10.0), DomainError);
  CHECK_FALSE(m.density_dependent());
  CHECK_THROWS_AS(IntensityModel(PiecewiseIntensity{{0.0, 1.0}, {}}), DomainError);
  CHECK_THROWS_AS(
      IntensityModel(PiecewiseIntensity{{1.0, 0.0}, {IntensityModel::constant(0.1)}}),
      DomainError);
}

TEST_CASE("evaluated intensities are never negative") {
  const IntensityModel models[] = {
      IntensityModel(ReciprocalIntensity{-0.3, 10.0}),
      IntensityModel(ExponentialIntensity{-0.1, 0.01}),
      IntensityModel(TabulatedIntensity{{0.0, 100.0}, {0.2, -0.2}}),
      IntensityModel(ReverseLambdaIntensity{40.0, 240.0}),
  };
  for (const auto& m : models) {
    for (int i = 0; i <= 300; ++i) CHECK(eval_intensity(m, 0.0, i * 1.0) >= 0.0);
  }
}

TEST_CASE("intensity schedule switches snapshots at their start times") {
  const IntensitySchedule s({0.0, 0.5}, {IntensityModel::constant(0.0), IntensityModel::constant(0.2)});
  CHECK(eval_intensity(s.at(0.0), 0.0, 1.0) == 0.0);
  CHECK(eval_intensity(s.at(0.49), 0.0, 1.0) == 0.0);
  CHECK(eval_intensity(s.at(0.5), 0.0, 1.0) == 0.2);
  CHECK(s.size() == 2);
  CHECK_THROWS_AS(IntensitySchedule({0.5, 0.5}, {IntensityModel{}, IntensityModel{}}), DomainError);
}
