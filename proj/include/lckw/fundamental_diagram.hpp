#pragma once

#include <variant>

namespace lckw {

/// Piecewise-linear diagram: free-flow branch of slope v_f up to the
/// critical density, linear congested branch down to zero flow at jam.
struct TriangularParams {
  double free_speed;        // v_f [mi/h]
  double critical_density;  // rho_c
  double jam_density;       // rho_j
};

/// Smooth, strictly concave diagram parameterized by free-flow speed and
/// the (negative) shock speed of jammed traffic.
struct MaxSensitivityParams {
  double free_speed;      // v_f [mi/h]
  double jam_wave_speed;  // c_j < 0 [mi/h]
  double jam_density;     // rho_j
};

/// Speed-density law V(rho_bar) of effective density. Immutable after
/// construction; the capacity point is precomputed.
class FundamentalDiagram {
 public:
  using Params = std::variant<TriangularParams, MaxSensitivityParams>;

  static FundamentalDiagram triangular(double free_speed, double critical_density,
                                       double jam_density);
  static FundamentalDiagram max_sensitivity(double free_speed, double jam_wave_speed,
                                            double jam_density);

  const Params& params() const { return params_; }
  bool is_triangular() const { return std::holds_alternative<TriangularParams>(params_); }

  double free_speed() const;
  double jam_density() const;
  /// Characteristic speed at jam density (negative).
  double jam_wave_speed() const;
  /// Largest characteristic speed magnitude, max(v_f, |jam wave speed|).
  double max_wave_speed() const;

  /// V(rho_bar); throws DomainError outside [0, rho_j].
  double speed(double rho_bar) const;
  /// Q(rho_bar) = rho_bar V(rho_bar).
  double flow(double rho_bar) const;
  /// dQ/drho_bar. For the triangular diagram the kink takes the congested
  /// slope; flow_slope_below() gives the one-sided slope from lower densities.
  double flow_slope(double rho_bar) const;
  double flow_slope_below(double rho_bar) const;

  /// Effective density at which Q is maximal (zero-intensity critical density).
  double critical_effective_density() const { return critical_rho_bar_; }
  /// max Q at zero intensity.
  double max_flow() const { return max_flow_; }

 private:
  explicit FundamentalDiagram(Params p);

  Params params_;
  double critical_rho_bar_ = 0.0;
  double max_flow_ = 0.0;
};

/// U = (eps, rho): lane-changing intensity and total density.
struct TrafficState {
  double eps = 0.0;
  double rho = 0.0;

  double effective_density() const { return rho * (1.0 + eps); }
  friend bool operator==(const TrafficState&, const TrafficState&) = default;
};

/// rho_j / (1 + eps), the largest admissible total density at intensity eps.
double max_density(const FundamentalDiagram& fd, double eps);

/// Throws DomainError when eps < 0 or rho lies outside [0, rho_j/(1+eps)].
void validate(const FundamentalDiagram& fd, const TrafficState& s);

/// V(rho_bar).
double speed(const FundamentalDiagram& fd, double rho_bar);

/// Flow with lane-changing effect, rho V(rho(1+eps)).
double flow_lc(const FundamentalDiagram& fd, const TrafficState& s);

/// Flow counting lane-changers twice, (1+eps) rho V(rho(1+eps)).
double flow_no_lc(const FundamentalDiagram& fd, const TrafficState& s);

/// Nonzero eigenvalue of the (eps, rho) system, Q'(rho(1+eps)).
double wave_speed(const FundamentalDiagram& fd, const TrafficState& s);

/// Transitional curve Gamma(eps): the density where wave_speed vanishes.
double critical_density(const FundamentalDiagram& fd, double eps);

/// Maximum flow at intensity eps, attained at Gamma(eps).
double capacity(const FundamentalDiagram& fd, double eps);

/// Under-critical: rho <= Gamma(eps). The transitional curve itself counts
/// as under-critical.
bool is_undercritical(const FundamentalDiagram& fd, const TrafficState& s);

enum class Branch { undercritical, overcritical };

/// Density on the given branch at intensity eps whose flow equals q. q is
/// clamped to [0, capacity(eps)].
double density_for_flow(const FundamentalDiagram& fd, double eps, double q, Branch branch);

}  // namespace lckw
