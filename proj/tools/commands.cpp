#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "csv.hpp"
#include "lckw/errors.hpp"
#include "lckw/godunov.hpp"
#include "lckw/synthetic.hpp"
#include "lckw/units.hpp"

namespace lckw::cli {

namespace {

// Core (mi, veh/mi) to output units.
struct OutputScale {
  double length = 1.0;
  double density = 1.0;

  explicit OutputScale(UnitSystem u) {
    if (u == UnitSystem::metric) {
      length = units::km_per_mile;
      density = 1.0 / units::km_per_mile;
    }
  }
};

std::string describe(const TrafficState& s, const OutputScale& sc) {
  return "(eps=" + format_number(s.eps) + ", rho=" + format_number(s.rho * sc.density) + ")";
}

}  // namespace

void export_fd(const ScenarioConfig& cfg, UnitSystem units, std::ostream& out) {
  const FundamentalDiagram& fd = cfg.require_fd();
  const IntensityModel& model = cfg.intensity.at(0.0);
  const FdExportSpec& spec = cfg.fd_export;
  const double rho_max = spec.rho_max.value_or(fd.jam_density());
  if (spec.points < 2 || !(rho_max > spec.rho_min) || spec.rho_min < 0.0) {
    throw ConfigError("density grid needs at least 2 points and 0 <= rho_min < rho_max");
  }
  std::vector<double> grid;
  for (std::size_t i = 0; i < spec.points; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(spec.points - 1);
    grid.push_back(spec.rho_min + w * (rho_max - spec.rho_min));
  }
  if (!model.density_dependent()) {
    const double gamma = critical_density(fd, eval_intensity(model, spec.x, 0.0));
    if (gamma > spec.rho_min && gamma < rho_max) grid.push_back(gamma);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const OutputScale sc(units);
  CsvWriter w(out, {"rho", "eps", "rho_bar", "v", "q_lc", "q_no_lc", "lambda"});
  for (double rho : grid) {
    const TrafficState s{eval_intensity(model, spec.x, rho), rho};
    if (s.effective_density() > fd.jam_density()) continue;
    const double row[] = {rho * sc.density,
                          s.eps,
                          s.effective_density() * sc.density,
                          fd.speed(s.effective_density()) * sc.length,
                          flow_lc(fd, s),
                          flow_no_lc(fd, s),
                          wave_speed(fd, s) * sc.length};
    w.row(row);
  }
}

void report_riemann(const FundamentalDiagram& fd, const RiemannSpec& spec, UnitSystem units,
                    std::ostream& text, std::ostream* csv) {
  const RiemannSolution sol = solve(fd, spec.left, spec.right);
  const OutputScale sc(units);
  text << "left " << describe(sol.left, sc) << '\n';
  text << "right " << describe(sol.right, sc) << '\n';
  text << "type " << sol.type_id << '\n';
  text << "flux " << format_number(sol.boundary_flux) << '\n';
  for (std::size_t i = 0; i < sol.intermediates.size(); ++i) {
    text << "U" << i + 1 << ' ' << describe(sol.intermediates[i], sc) << '\n';
  }
  for (const Wave& wv : sol.waves) {
    text << "wave " << to_string(wv.family) << " speed [" << format_number(wv.speed_lo * sc.length)
         << ", " << format_number(wv.speed_hi * sc.length) << "] " << describe(wv.left, sc)
         << " -> " << describe(wv.right, sc) << '\n';
  }
  if (!csv) return;
  const double reach = 1.1 * fd.max_wave_speed();
  const double lo = spec.xi_min.value_or(-reach);
  const double hi = spec.xi_max.value_or(reach);
  if (spec.xi_points < 2 || !(hi > lo)) throw ConfigError("xi grid needs 2 points and xi_min < xi_max");
  CsvWriter w(*csv, {"xi", "eps", "rho", "q"});
  for (std::size_t i = 0; i < spec.xi_points; ++i) {
    const double xi = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(spec.xi_points - 1);
    const TrafficState s = sample(sol, xi);
    const double row[] = {xi * sc.length, s.eps, s.rho * sc.density, flow_lc(fd, s)};
    w.row(row);
  }
}

void write_simulation(const RoadScenario& scn, UnitSystem units, std::ostream& out) {
  const OutputScale sc(units);
  CsvWriter w(out, {"t", "x", "rho", "eps", "v", "q"});
  for (const Snapshot& snap : run(scn)) {
    for (std::size_t i = 0; i < snap.state.rho.size(); ++i) {
      const double row[] = {snap.state.t,        scn.cell_center(i) * sc.length,
                            snap.state.rho[i] * sc.density, snap.state.eps[i],
                            snap.speed[i] * sc.length, snap.flow[i]};
      w.row(row);
    }
  }
}

CalibrationOutput run_calibration(const ScenarioConfig& cfg, std::optional<std::uint64_t> seed) {
  const CalibrateSpec spec = cfg.calibrate.value_or(CalibrateSpec{});
  calibrate::PipelineOptions opts;
  opts.detection.threshold = spec.threshold();
  opts.detection.pre_fraction = spec.pre_fraction;
  opts.detection.smoothing_window = spec.smoothing_window;
  opts.section = spec.section;

  CalibrationOutput out;
  auto absorb = [&out](const calibrate::PipelineResult& r) {
    out.samples.insert(out.samples.end(), r.samples.begin(), r.samples.end());
    out.events += r.event_count;
    out.dropped += r.dropped;
  };

  const bool synthetic_mode = seed.has_value() || spec.datasets.empty();
  std::optional<FundamentalDiagram> fd = cfg.fd;
  if (synthetic_mode) {
    SyntheticSpec syn = spec.synthetic.value_or(SyntheticSpec{});
    if (syn.densities.empty()) {
      for (double d = 100.0; d <= 250.0; d += 15.0) syn.densities.push_back(d);
    }
    synthetic::CorpusOptions corpus;
    if (fd) corpus.fd = *fd;
    fd = corpus.fd;
    corpus.laws = syn.laws;
    corpus.section = spec.section;
    corpus.threshold = spec.threshold();
    corpus.lateral_noise = syn.lateral_noise;
    corpus.seed = seed.value_or(1);
    std::int64_t next_id = 0;
    for (double density : syn.densities) {
      synthetic::Dataset ds = synthetic::generate(corpus, density, syn.interval, syn.intervals, next_id);
      next_id += 1000000;
      corpus.seed += 1;
      opts.interval = ds.interval;
      opts.stride = ds.interval;
      absorb(calibrate::run_pipeline(ds.records, spec.separations, opts));
      out.synthetic_records.insert(out.synthetic_records.end(), ds.records.begin(), ds.records.end());
    }
  } else {
    const double to_feet = cfg.units == UnitSystem::metric ? 1.0 / units::meters_per_foot : 1.0;
    for (const TrajectoryDataset& d : spec.datasets) {
      std::ifstream in(d.path);
      if (!in) throw ConfigError("cannot open trajectory file '" + d.path.string() + "'");
      const auto records = read_trajectories(in, to_feet);
      opts.interval = d.interval;
      opts.stride = d.stride;
      absorb(calibrate::run_pipeline(records, spec.separations, opts));
    }
  }
  if (out.samples.empty()) throw DomainError("no calibration intervals fit inside the data");

  std::vector<double> rho;
  std::vector<double> eps;
  std::vector<double> rho_theta;
  std::vector<double> theta;
  for (const auto& s : out.samples) {
    rho.push_back(s.rho);
    eps.push_back(s.eps);
    if (s.theta_mean_deg) {
      rho_theta.push_back(s.rho);
      theta.push_back(*s.theta_mean_deg);
    }
  }
  auto attempt = [](auto&& f) -> decltype(std::optional{f()}) {
    try {
      return f();
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };
  out.fits.theta = attempt([&] { return calibrate::fit_linear(rho_theta, theta); });
  out.fits.eps_reciprocal = attempt([&] { return calibrate::fit_reciprocal(rho, eps); });
  out.fits.eps_exponential = attempt([&] { return calibrate::fit_exponential(rho, eps); });

  if (fd && spec.capacity_model != "none") {
    std::optional<IntensityModel> model;
    if (spec.capacity_model == "exponential" && out.fits.eps_exponential) {
      model = IntensityModel(ExponentialIntensity{out.fits.eps_exponential->a, out.fits.eps_exponential->b});
    } else if (spec.capacity_model == "reciprocal" && out.fits.eps_reciprocal) {
      model = IntensityModel(ReciprocalIntensity{out.fits.eps_reciprocal->a, out.fits.eps_reciprocal->b});
    }
    if (model) out.fits.capacity = calibrate::capacity_comparison(out.samples, *fd, *model);
  }
  return out;
}

void write_samples(const std::vector<calibrate::CalibrationSample>& samples, UnitSystem units,
                   std::ostream& out) {
  const OutputScale sc(units);
  CsvWriter w(out, {"t_start", "T", "rho", "v", "q", "theta_deg", "eps"});
  for (const auto& s : samples) {
    w.row({format_number(s.interval.t_start), format_number(s.interval.duration),
           format_number(s.rho * sc.density), format_number(s.v * sc.length), format_number(s.q),
           s.theta_mean_deg ? format_number(*s.theta_mean_deg) : std::string{},
           format_number(s.eps)});
  }
}

void write_fit_report(const FitReport& fits, UnitSystem units, std::ostream& out) {
  const OutputScale sc(units);
  // A slope per veh/mi becomes a slope per output density unit.
  const double per_density = 1.0 / sc.density;
  CsvWriter w(out, {"model", "param_a", "param_b", "r_squared", "n"});
  if (fits.theta) {
    w.row({"theta_linear", format_number(fits.theta->intercept),
           format_number(fits.theta->slope * per_density), format_number(fits.theta->r_squared),
           std::to_string(fits.theta->n)});
  }
  if (fits.eps_reciprocal) {
    w.row({"eps_reciprocal", format_number(fits.eps_reciprocal->a),
           format_number(fits.eps_reciprocal->b * sc.density),
           format_number(fits.eps_reciprocal->r_squared), std::to_string(fits.eps_reciprocal->n)});
  }
  if (fits.eps_exponential) {
    w.row({"eps_exponential", format_number(fits.eps_exponential->a),
           format_number(fits.eps_exponential->b * per_density),
           format_number(fits.eps_exponential->r_squared), std::to_string(fits.eps_exponential->n)});
  }
  if (fits.capacity) {
    // Capacity rows: param_a is the capacity [veh/h], param_b its density.
    const auto& c = *fits.capacity;
    w.row({"capacity_no_lc", format_number(c.cap_no_lc), format_number(c.rho_no_lc * sc.density),
           "", ""});
    w.row({"capacity_lc", format_number(c.cap_lc), format_number(c.rho_lc * sc.density), "", ""});
    w.row({"capacity_reduction", format_number(c.reduction), "", "", ""});
  }
}

}  // namespace lckw::cli
