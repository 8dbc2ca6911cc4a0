#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lckw/errors.hpp"
#include "lckw/units.hpp"

namespace lckw::cli {

namespace {

// Scale factors from file units to core units.
struct Scale {
  double length = 1.0;   // file length -> mi
  double density = 1.0;  // file per-lane density -> veh/mi total
  double flow = 1.0;     // file per-lane flow -> veh/h total
  double raw_density = 1.0;  // file density -> veh/mi without lane scaling
  double feet = 1.0;     // file trajectory length -> ft
};

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& path,
                         const std::string& problem) const {
    std::ostringstream os;
    const YAML::Mark m = at.Mark();
    os << source_;
    if (m.line >= 0) os << ':' << m.line + 1 << ':' << m.column + 1;
    os << ": " << path << ": " << problem;
    throw ConfigError(os.str());
  }

  void allow(const YAML::Node& node, const std::string& path,
             std::initializer_list<const char*> keys) const {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, join(path, key), "unknown field");
    }
  }

  YAML::Node child(const YAML::Node& node, const std::string& path, const char* key) const {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
    YAML::Node c = node[key];
    if (!c) fail(node, join(path, key), "missing required field");
    return c;
  }

  double number(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path, "expected a number");
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, path, "expected a number, got '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& parent, const std::string& path, const char* key) const {
    return number(child(parent, path, key), join(path, key));
  }

  double number_or(const YAML::Node& parent, const std::string& path, const char* key,
                   double fallback) const {
    if (!parent[key]) return fallback;
    return number(parent[key], join(path, key));
  }

  std::size_t count(const YAML::Node& node, const std::string& path) const {
    const double v = number(node, path);
    if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
      fail(node, path, "expected a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
  }

  std::string text(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path, "expected a string");
    return node.Scalar();
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence()) fail(node, path, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.push_back(number(node[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  // Runs f, re-raising library domain errors with the node's position.
  template <class F>
  auto checked(const YAML::Node& at, const std::string& path, F&& f) const {
    try {
      return f();
    } catch (const DomainError& e) {
      fail(at, path, e.what());
    }
  }

 private:
  std::string source_;
};

FundamentalDiagram parse_fd(const Reader& r, const YAML::Node& node, const Scale& sc) {
  const std::string path = "fd";
  const std::string type = r.text(r.child(node, path, "type"), "fd.type");
  if (type == "triangular") {
    r.allow(node, path, {"type", "free_speed", "critical_density", "jam_density"});
    const double vf = r.number(node, path, "free_speed") * sc.length;
    const double rc = r.number(node, path, "critical_density") * sc.density;
    const double rj = r.number(node, path, "jam_density") * sc.density;
    return r.checked(node, path, [&] { return FundamentalDiagram::triangular(vf, rc, rj); });
  }
  if (type == "max_sensitivity") {
    r.allow(node, path, {"type", "free_speed", "jam_wave_speed", "jam_density"});
    const double vf = r.number(node, path, "free_speed") * sc.length;
    const double cj = r.number(node, path, "jam_wave_speed") * sc.length;
    const double rj = r.number(node, path, "jam_density") * sc.density;
    return r.checked(node, path, [&] { return FundamentalDiagram::max_sensitivity(vf, cj, rj); });
  }
  r.fail(node["type"], "fd.type", "unknown diagram '" + type +
                                      "' (expected triangular or max_sensitivity)");
}

IntensityModel parse_model(const Reader& r, const YAML::Node& node, const std::string& path,
                           const Scale& sc, const std::optional<FundamentalDiagram>& fd) {
  if (node.IsScalar()) {
    return r.checked(node, path, [&] { return IntensityModel::constant(r.number(node, path)); });
  }
  const std::string type = r.text(r.child(node, path, "type"), Reader::join(path, "type"));
  if (type == "constant") {
    r.allow(node, path, {"type", "eps"});
    return IntensityModel::constant(r.number(node, path, "eps"));
  }
  if (type == "reverse_lambda") {
    r.allow(node, path, {"type", "critical_density", "jam_density"});
    std::optional<double> rc;
    std::optional<double> rj;
    if (fd && fd->is_triangular()) {
      const auto& p = std::get<TriangularParams>(fd->params());
      rc = p.critical_density;
      rj = p.jam_density;
    }
    if (node["critical_density"]) rc = r.number(node, path, "critical_density") * sc.density;
    if (node["jam_density"]) rj = r.number(node, path, "jam_density") * sc.density;
    if (!rc || !rj) {
      r.fail(node, path, "reverse_lambda needs critical_density and jam_density "
                         "(or a triangular fd to take them from)");
    }
    return r.checked(node, path, [&] { return IntensityModel(ReverseLambdaIntensity{*rc, *rj}); });
  }
  if (type == "table") {
    r.allow(node, path, {"type", "density", "eps"});
    auto rho = r.numbers(r.child(node, path, "density"), Reader::join(path, "density"));
    for (double& x : rho) x *= sc.density;
    const auto eps = r.numbers(r.child(node, path, "eps"), Reader::join(path, "eps"));
    return r.checked(node, path, [&] { return IntensityModel(TabulatedIntensity{rho, eps}); });
  }
  if (type == "reciprocal") {
    r.allow(node, path, {"type", "a", "b", "min_density"});
    ReciprocalIntensity m;
    m.a = r.number(node, path, "a");
    m.b = r.number(node, path, "b") * sc.density;
    m.min_density = r.number_or(node, path, "min_density", 1.0) * sc.density;
    return r.checked(node, path, [&] { return IntensityModel(m); });
  }
  if (type == "exponential") {
    r.allow(node, path, {"type", "a", "b"});
    ExponentialIntensity m;
    m.a = r.number(node, path, "a");
    m.b = r.number(node, path, "b") / sc.density;
    return r.checked(node, path, [&] { return IntensityModel(m); });
  }
  if (type == "piecewise") {
    r.allow(node, path, {"type", "breakpoints", "segments"});
    auto bp = r.numbers(r.child(node, path, "breakpoints"), Reader::join(path, "breakpoints"));
    for (double& x : bp) x *= sc.length;
    const YAML::Node segs = r.child(node, path, "segments");
    if (!segs.IsSequence()) r.fail(segs, Reader::join(path, "segments"), "expected a list");
    std::vector<IntensityModel> models;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      models.push_back(
          parse_model(r, segs[i], Reader::join(path, "segments") + "[" + std::to_string(i) + "]",
                      sc, fd));
    }
    return r.checked(node, path, [&] { return IntensityModel(PiecewiseIntensity{bp, models}); });
  }
  r.fail(node["type"], Reader::join(path, "type"),
         "unknown intensity model '" + type +
             "' (expected constant, reverse_lambda, table, reciprocal, exponential or piecewise)");
}

IntensitySchedule parse_intensity(const Reader& r, const YAML::Node& node, const Scale& sc,
                                  const std::optional<FundamentalDiagram>& fd) {
  if (node.IsMap() && node["schedule"]) {
    r.allow(node, "intensity", {"schedule"});
    const YAML::Node list = node["schedule"];
    if (!list.IsSequence() || list.size() == 0) {
      r.fail(list, "intensity.schedule", "expected a nonempty list");
    }
    std::vector<double> starts;
    std::vector<IntensityModel> models;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = "intensity.schedule[" + std::to_string(i) + "]";
      r.allow(list[i], p, {"start", "model"});
      starts.push_back(r.number(list[i], p, "start"));
      models.push_back(parse_model(r, r.child(list[i], p, "model"), p + ".model", sc, fd));
    }
    return r.checked(node, "intensity", [&] { return IntensitySchedule(starts, models); });
  }
  return IntensitySchedule(parse_model(r, node, "intensity", sc, fd));
}

TrafficState parse_state(const Reader& r, const YAML::Node& node, const std::string& path,
                         const Scale& sc) {
  r.allow(node, path, {"eps", "density"});
  return {r.number(node, path, "eps"), r.number(node, path, "density") * sc.density};
}

FlowSchedule parse_flow_schedule(const Reader& r, const YAML::Node& node, const std::string& path,
                                 const Scale& sc) {
  if (!node.IsSequence() || node.size() == 0) r.fail(node, path, "expected a nonempty list");
  FlowSchedule f{{}, {}};
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    r.allow(node[i], p, {"t", "flow"});
    const double t = r.number(node[i], p, "t");
    if (!f.times.empty() && !(t > f.times.back())) r.fail(node[i], p, "times must increase");
    f.times.push_back(t);
    f.values.push_back(r.number(node[i], p, "flow") * sc.flow);
  }
  return f;
}

UpstreamBoundary parse_upstream(const Reader& r, const YAML::Node& node, const Scale& sc) {
  const std::string path = "upstream";
  r.allow(node, path, {"demand", "demand_schedule", "state"});
  if (node.size() != 1) r.fail(node, path, "give exactly one of demand, demand_schedule, state");
  if (node["demand"]) return FlowSchedule::constant(r.number(node, path, "demand") * sc.flow);
  if (node["demand_schedule"]) {
    return parse_flow_schedule(r, node["demand_schedule"], "upstream.demand_schedule", sc);
  }
  return parse_state(r, node["state"], "upstream.state", sc);
}

DownstreamBoundary parse_downstream(const Reader& r, const YAML::Node& node, const Scale& sc) {
  const std::string path = "downstream";
  if (node.IsScalar()) {
    if (node.Scalar() == "free") return FreeOutflow{};
    r.fail(node, path, "expected 'free' or a mapping");
  }
  r.allow(node, path, {"supply", "supply_schedule", "state"});
  if (node.size() != 1) r.fail(node, path, "give exactly one of supply, supply_schedule, state");
  if (node["supply"]) return FlowSchedule::constant(r.number(node, path, "supply") * sc.flow);
  if (node["supply_schedule"]) {
    return parse_flow_schedule(r, node["supply_schedule"], "downstream.supply_schedule", sc);
  }
  return parse_state(r, node["state"], "downstream.state", sc);
}

std::vector<double> parse_initial_density(const Reader& r, const YAML::Node& node,
                                          const RoadScenario& scn, const Scale& sc) {
  const std::string path = "initial_density";
  if (node.IsScalar()) {
    return std::vector<double>(scn.cell_count, r.number(node, path) * sc.density);
  }
  if (!node.IsSequence() || node.size() == 0) {
    r.fail(node, path, "expected a number or a nonempty list of {from, to, density} segments");
  }
  struct Seg {
    double from, to, rho;
  };
  std::vector<Seg> segs;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    r.allow(node[i], p, {"from", "to", "density"});
    Seg s{r.number(node[i], p, "from") * sc.length, r.number(node[i], p, "to") * sc.length,
          r.number(node[i], p, "density") * sc.density};
    if (!(s.to > s.from)) r.fail(node[i], p, "needs to > from");
    if (!segs.empty() && std::abs(s.from - segs.back().to) > 1e-9 * scn.length) {
      r.fail(node[i], p, "segments must be contiguous");
    }
    segs.push_back(s);
  }
  const double x0 = scn.x_origin;
  const double x1 = scn.x_origin + scn.length;
  const double tol = 1e-9 * scn.length;
  if (std::abs(segs.front().from - x0) > tol || std::abs(segs.back().to - x1) > tol) {
    r.fail(node, path, "segments must cover the road from x_origin to x_origin + length");
  }
  std::vector<double> rho(scn.cell_count);
  for (std::size_t i = 0; i < scn.cell_count; ++i) {
    const double xc = scn.cell_center(i);
    auto it = std::find_if(segs.begin(), segs.end(), [xc](const Seg& s) { return xc < s.to; });
    rho[i] = (it == segs.end() ? segs.back() : *it).rho;
  }
  return rho;
}

CalibrateSpec parse_calibrate(const Reader& r, const YAML::Node& node, const Scale& sc,
                              const std::filesystem::path& base_dir) {
  const std::string path = "calibrate";
  r.allow(node, path,
          {"separations", "vehicle_width", "threshold_factor", "pre_fraction", "smoothing_window",
           "section", "datasets", "synthetic", "capacity_model"});
  CalibrateSpec c;
  if (node["separations"]) {
    c.separations = r.numbers(node["separations"], "calibrate.separations");
    for (double& y : c.separations) y *= sc.feet;
  }
  c.vehicle_width = r.number_or(node, path, "vehicle_width", 6.3 / sc.feet) * sc.feet;
  c.threshold_factor = r.number_or(node, path, "threshold_factor", 1.0);
  c.pre_fraction = r.number_or(node, path, "pre_fraction", 0.5);
  if (node["smoothing_window"]) {
    c.smoothing_window = r.count(node["smoothing_window"], "calibrate.smoothing_window");
  }
  if (node["section"]) {
    const YAML::Node s = node["section"];
    r.allow(s, "calibrate.section", {"x_a", "x_b"});
    c.section.x_a = r.number(s, "calibrate.section", "x_a") * sc.feet;
    c.section.x_b = r.number(s, "calibrate.section", "x_b") * sc.feet;
    if (!(c.section.x_b > c.section.x_a)) r.fail(s, "calibrate.section", "needs x_b > x_a");
  }
  if (node["datasets"]) {
    const YAML::Node list = node["datasets"];
    if (!list.IsSequence()) r.fail(list, "calibrate.datasets", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = "calibrate.datasets[" + std::to_string(i) + "]";
      r.allow(list[i], p, {"trajectories", "interval", "stride"});
      TrajectoryDataset d;
      d.path = base_dir / r.text(r.child(list[i], p, "trajectories"), p + ".trajectories");
      d.interval = r.number(list[i], p, "interval");
      d.stride = r.number_or(list[i], p, "stride", 0.0);
      if (!(d.interval > 0.0)) r.fail(list[i], p + ".interval", "must be positive");
      c.datasets.push_back(d);
    }
  }
  if (node["synthetic"]) {
    const YAML::Node s = node["synthetic"];
    const std::string p = "calibrate.synthetic";
    r.allow(s, p, {"densities", "interval", "intervals", "lateral_noise", "theta_intercept",
                   "theta_slope", "eps_a", "eps_b"});
    SyntheticSpec syn;
    syn.densities = r.numbers(r.child(s, p, "densities"), p + ".densities");
    for (double& d : syn.densities) d *= sc.raw_density;
    syn.interval = r.number_or(s, p, "interval", syn.interval);
    if (s["intervals"]) syn.intervals = r.count(s["intervals"], p + ".intervals");
    syn.lateral_noise = r.number_or(s, p, "lateral_noise", 0.0) * sc.feet;
    syn.laws.theta_intercept = r.number_or(s, p, "theta_intercept", syn.laws.theta_intercept);
    syn.laws.theta_slope = r.number_or(s, p, "theta_slope", syn.laws.theta_slope * sc.raw_density) /
                           sc.raw_density;
    syn.laws.eps_a = r.number_or(s, p, "eps_a", syn.laws.eps_a);
    syn.laws.eps_b = r.number_or(s, p, "eps_b", syn.laws.eps_b * sc.raw_density) / sc.raw_density;
    c.synthetic = syn;
  }
  if (node["capacity_model"]) {
    c.capacity_model = r.text(node["capacity_model"], "calibrate.capacity_model");
    if (c.capacity_model != "exponential" && c.capacity_model != "reciprocal" &&
        c.capacity_model != "none") {
      r.fail(node["capacity_model"], "calibrate.capacity_model",
             "expected exponential, reciprocal or none");
    }
  }
  return c;
}

}  // namespace

UnitSystem parse_units(const std::string& name) {
  if (name == "us") return UnitSystem::us;
  if (name == "metric") return UnitSystem::metric;
  throw ConfigError("unknown unit system '" + name + "' (expected us or metric)");
}

const FundamentalDiagram& ScenarioConfig::require_fd() const {
  if (!fd) throw ConfigError("configuration declares no fundamental diagram (field 'fd')");
  return *fd;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source,
                            const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << source << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  const Reader r(source);
  ScenarioConfig cfg;
  cfg.base_dir = base_dir;
  if (!root || root.IsNull()) return cfg;
  r.allow(root, "",
          {"units", "lanes", "fd", "intensity", "road", "initial_density", "upstream",
           "downstream", "time", "fd_export", "riemann", "calibrate"});

  if (!root["units"]) r.fail(root, "units", "missing required field (us or metric)");
  try {
    cfg.units = parse_units(r.text(root["units"], "units"));
  } catch (const ConfigError& e) {
    r.fail(root["units"], "units", e.what());
  }
  cfg.lanes = r.number_or(root, "", "lanes", 1.0);
  if (!(cfg.lanes > 0.0)) r.fail(root["lanes"], "lanes", "must be positive");

  Scale sc;
  if (cfg.units == UnitSystem::metric) {
    sc.length = 1.0 / units::km_per_mile;
    sc.raw_density = units::km_per_mile;
    sc.feet = 1.0 / units::meters_per_foot;
  }
  sc.density = sc.raw_density * cfg.lanes;
  sc.flow = cfg.lanes;

  if (root["fd"]) cfg.fd = parse_fd(r, root["fd"], sc);
  if (root["intensity"]) {
    cfg.intensity = parse_intensity(r, root["intensity"], sc, cfg.fd);
    cfg.has_intensity = true;
  }

  if (root["road"]) {
    const YAML::Node road = root["road"];
    r.allow(road, "road", {"length", "cells", "x_origin"});
    if (!cfg.fd) r.fail(root, "fd", "a road scenario needs a fundamental diagram");
    RoadScenario scn;
    scn.fd = *cfg.fd;
    scn.intensity = cfg.intensity;
    scn.length = r.number(road, "road", "length") * sc.length;
    scn.cell_count = r.count(r.child(road, "road", "cells"), "road.cells");
    scn.x_origin = r.number_or(road, "road", "x_origin", 0.0) * sc.length;
    if (!(scn.length > 0.0)) r.fail(road["length"], "road.length", "must be positive");
    if (scn.cell_count < 1) r.fail(road["cells"], "road.cells", "must be at least 1");

    const YAML::Node time = r.child(root, "", "time");
    r.allow(time, "time", {"t_end", "output_interval", "cfl"});
    scn.t_end = r.number(time, "time", "t_end");
    scn.output_interval = r.number_or(time, "time", "output_interval", 0.0);
    scn.cfl = r.number_or(time, "time", "cfl", 0.9);

    scn.initial_density =
        parse_initial_density(r, r.child(root, "", "initial_density"), scn, sc);
    if (root["upstream"]) scn.upstream = parse_upstream(r, root["upstream"], sc);
    if (root["downstream"]) scn.downstream = parse_downstream(r, root["downstream"], sc);
    r.checked(road, "road", [&] {
      validate(scn);
      return 0;
    });
    cfg.scenario = std::move(scn);
  } else {
    for (const char* k : {"time", "initial_density", "upstream", "downstream"}) {
      if (root[k]) r.fail(root[k], k, "only meaningful together with 'road'");
    }
  }

  if (root["fd_export"]) {
    const YAML::Node n = root["fd_export"];
    r.allow(n, "fd_export", {"rho_min", "rho_max", "points", "x"});
    cfg.fd_export.rho_min = r.number_or(n, "fd_export", "rho_min", 0.0) * sc.density;
    if (n["rho_max"]) cfg.fd_export.rho_max = r.number(n, "fd_export", "rho_max") * sc.density;
    if (n["points"]) cfg.fd_export.points = r.count(n["points"], "fd_export.points");
    cfg.fd_export.x = r.number_or(n, "fd_export", "x", 0.0) * sc.length;
  }

  if (root["riemann"]) {
    const YAML::Node n = root["riemann"];
    r.allow(n, "riemann", {"left", "right", "xi_min", "xi_max", "xi_points"});
    RiemannSpec rs;
    rs.left = parse_state(r, r.child(n, "riemann", "left"), "riemann.left", sc);
    rs.right = parse_state(r, r.child(n, "riemann", "right"), "riemann.right", sc);
    if (n["xi_min"]) rs.xi_min = r.number(n, "riemann", "xi_min") * sc.length;
    if (n["xi_max"]) rs.xi_max = r.number(n, "riemann", "xi_max") * sc.length;
    if (n["xi_points"]) rs.xi_points = r.count(n["xi_points"], "riemann.xi_points");
    cfg.riemann = rs;
  }

  if (root["calibrate"]) cfg.calibrate = parse_calibrate(r, root["calibrate"], sc, base_dir);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

FundamentalDiagram parse_fd_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("diagram '" + text + "' must look like triangular:v_f,rho_c,rho_j");
  }
  const std::string kind = text.substr(0, colon);
  std::vector<double> p;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      p.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("diagram '" + text + "': '" + item + "' is not a number");
    }
  }
  if (p.size() != 3) throw ConfigError("diagram '" + text + "' needs three parameters");
  try {
    if (kind == "triangular") return FundamentalDiagram::triangular(p[0], p[1], p[2]);
    if (kind == "max-sensitivity") return FundamentalDiagram::max_sensitivity(p[0], p[1], p[2]);
  } catch (const DomainError& e) {
    throw ConfigError("diagram '" + text + "': " + e.what());
  }
  throw ConfigError("diagram '" + text + "': unknown kind '" + kind +
                    "' (expected triangular or max-sensitivity)");
}

}  // namespace lckw::cli
