#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

namespace lckw {

struct ConstantIntensity {
  double eps = 0.0;
};

/// eps(rho) = 0 below rho_c and (2 - 2 rho/rho_j) / (15 + 2 rho/rho_j) from
/// rho_c upward. The jump at rho_c produces a reverse-lambda flow-density curve.
struct ReverseLambdaIntensity {
  double critical_density;
  double jam_density;
};

/// Linear interpolation in a (density, eps) table; constant beyond the ends.
struct TabulatedIntensity {
  std::vector<double> density;
  std::vector<double> eps;
};

/// eps(rho) = a + b / rho. Densities below min_density are evaluated at
/// min_density so the empty road stays finite.
struct ReciprocalIntensity {
  double a = 0.0;
  double b = 0.0;
  double min_density = 1.0;
};

/// eps(rho) = a exp(b rho).
struct ExponentialIntensity {
  double a = 0.0;
  double b = 0.0;
};

class IntensityModel;

/// Location-dependent intensity: segment i covers [breakpoints[i],
/// breakpoints[i+1]); the last segment also includes its right end.
struct PiecewiseIntensity {
  std::vector<double> breakpoints;
  std::vector<IntensityModel> segments;
};

class IntensityModel {
 public:
  using Variant = std::variant<ConstantIntensity, ReverseLambdaIntensity, TabulatedIntensity,
                               ReciprocalIntensity, ExponentialIntensity, PiecewiseIntensity>;

  IntensityModel() : model_(ConstantIntensity{}) {}
  IntensityModel(ConstantIntensity m) : model_(m) {}
  IntensityModel(ReverseLambdaIntensity m);
  IntensityModel(TabulatedIntensity m);
  IntensityModel(ReciprocalIntensity m) : model_(m) {}
  IntensityModel(ExponentialIntensity m) : model_(m) {}
  IntensityModel(PiecewiseIntensity m);

  static IntensityModel constant(double eps) { return ConstantIntensity{eps}; }

  const Variant& variant() const { return model_; }
  /// True when the value depends on density (and so must be re-evaluated as
  /// densities evolve).
  bool density_dependent() const;

 private:
  Variant model_;
};

/// Evaluates eps at position x [mi] and density rho. Negative values are
/// clamped to zero; each clamp increments clamp_count.
double eval_intensity(const IntensityModel& model, double x, double rho, std::size_t& clamp_count);
double eval_intensity(const IntensityModel& model, double x, double rho);

/// Time-varying intensity as a list of snapshots; snapshot i applies from
/// start_times[i] until the next one starts.
class IntensitySchedule {
 public:
  IntensitySchedule(IntensityModel model) : start_times_{0.0}, models_{std::move(model)} {}
  IntensitySchedule(std::vector<double> start_times, std::vector<IntensityModel> models);

  const IntensityModel& at(double t) const;
  bool density_dependent() const;
  std::size_t size() const { return models_.size(); }

 private:
  std::vector<double> start_times_;
  std::vector<IntensityModel> models_;
};

/// Duration of one lane change, D / (v tan theta). Any consistent units.
double lane_change_duration(double lane_width, double speed, double theta);

/// Lane-changing angle implied by a duration, atan(D / (v t_LC)).
double lane_change_angle(double lane_width, double speed, double duration);

/// Uniform traffic in a lane-changing section. Units must be consistent; the
/// library convention is mi, h, veh/mi, rad.
struct UniformTrafficSpec {
  double alpha = 0.0;     // mean lane changes per lane-changing vehicle
  double rho_lc = 0.0;    // density of lane-changing vehicles
  double rho = 0.0;       // total density
  std::optional<double> t_lc;            // lane-change duration
  std::optional<double> traversal_time;  // T
  std::optional<double> length;          // L
  std::optional<double> lane_width;      // D
  std::optional<double> speed;           // v
  std::optional<double> theta;           // lane-changing angle

  /// t_LC, given directly or derived from D, v and theta.
  double lane_change_time() const;
  /// T, given directly or derived as L / v.
  double traversal() const;
};

/// eps = alpha rho_LC t_LC / (rho T).
double uniform_intensity(const UniformTrafficSpec& spec);

/// On-ramp driven estimate eps = 2.5 q_on t_LC / (rho L).
double onramp_intensity(double q_on, double t_lc, double rho, double length);

}  // namespace lckw
