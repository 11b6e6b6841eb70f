#include "blimp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace blimp {

namespace {

using nlohmann::json;

// Tracks which keys of an object were read so that unknown keys are
// reported instead of silently ignored.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(where_ + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where_ + "." + key + ": must be finite");
    return x;
  }

  void number(const std::string& key, double& out, double scale = 1.0) {
    if (has(key)) out = number(key) * scale;
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(where_ + "." + key + ": expected an integer");
    out = v.get<int>();
  }

  std::string text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(where_ + "." + key + ": expected a string");
    return v.get<std::string>();
  }

  template <int N>
  void vector(const std::string& key, Eigen::Matrix<double, N, 1>& out, double scale = 1.0) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N)) {
      throw ConfigError(where_ + "." + key + ": expected " + std::to_string(N) + " numbers");
    }
    for (int i = 0; i < N; ++i) {
      if (!v[i].is_number()) throw ConfigError(where_ + "." + key + ": expected numbers");
      out[i] = v[i].get<double>() * scale;
    }
  }

  Section child(const std::string& key) { return Section(at(key), where_ + "." + key); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json readJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void readSolver(Section s, trajopt::SolveOptions& o) {
  s.integer("max_iterations", o.max_iterations);
  s.number("step_tolerance", o.step_tolerance);
  s.number("cost_tolerance", o.cost_tolerance);
  s.number("initial_damping", o.initial_damping);
  s.finish();
}

void readLoop(Section s, PidLoopGains& g) {
  s.number("kp", g.kp);
  s.number("ki", g.ki);
  s.number("kd", g.kd);
  s.finish();
}

PlantParameters plantFromJson(const json& j, const std::string& where) {
  PlantParameters p;
  Section root(j, where);
  {
    Section g = root.child("geometry_mm");
    p.geometry.backbone_length = units::mmToM(g.number("backbone_length"));
    p.geometry.cable_offset = units::mmToM(g.number("cable_offset"));
    p.geometry.base_offset = units::mmToM(g.number("base_offset"));
    g.finish();
  }
  if (root.has("inertial")) {
    Section s = root.child("inertial");
    InertialParams& in = p.inertial;
    s.number("stationary_mass_g", in.stationary_mass, 1e-3);
    s.number("moving_mass_g", in.moving_mass, 1e-3);
    s.number("gravity", in.gravity);
    if (s.has("buoyancy_gf")) in.buoyancy = s.number("buoyancy_gf") * 1e-3 * in.gravity;
    if (s.has("inertia_diag")) {
      Vector3 d = in.inertia.diagonal();
      s.vector("inertia_diag", d);
      in.inertia = d.asDiagonal();
    }
    s.vector("stationary_com_mm", in.stationary_com, 1e-3);
    s.number("air_density", in.air_density);
    s.number("reference_area", in.reference_area);
    s.finish();
  }
  if (root.has("aero")) {
    Section s = root.child("aero");
    AeroModel& a = p.aero;
    s.number("cd0", a.cd0);
    s.number("cd_alpha2", a.cd_alpha2);
    s.number("cd_beta2", a.cd_beta2);
    s.number("cs_beta", a.cs_beta);
    s.number("cl0", a.cl0);
    s.number("cl_alpha", a.cl_alpha);
    s.number("ctx0", a.ctx0);
    s.number("ctx_beta", a.ctx_beta);
    s.number("cty0", a.cty0);
    s.number("cty_alpha", a.cty_alpha);
    s.number("ctz0", a.ctz0);
    s.number("ctz_beta", a.ctz_beta);
    s.vector("damping", a.damping);
    s.finish();
  }
  root.finish();
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return p;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& rel) {
  const std::filesystem::path p(rel);
  return p.is_absolute() ? p : base.parent_path() / p;
}

WindField windFromJson(const json& j, const std::string& where) {
  if (j.is_string()) {
    try {
      return windPreset(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  Section s(j, where);
  WindField w;
  if (s.has("preset")) {
    try {
      w = windPreset(s.text("preset"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  s.vector("uniform", w.uniform);
  if (s.has("fan")) {
    Section f = s.child("fan");
    FanConfig fan = w.fan.value_or(FanConfig{});
    f.vector("position", fan.position);
    f.vector("axis", fan.axis);
    f.number("core_speed", fan.core_speed);
    f.number("decay_length", fan.decay_length);
    if (f.has("speed_at_2m")) {
      fan.decay_length =
          calibrateDecayLength(fan.core_speed, f.number("speed_at_2m"), kFanReferenceDistance);
    }
    f.number("half_width", fan.half_width);
    f.number("turbulence_intensity", fan.turbulence_intensity);
    f.number("turbulence_ramp", fan.turbulence_ramp);
    f.number("correlation_time", fan.correlation_time);
    f.finish();
    w.fan = fan;
  }
  s.finish();
  return w;
}

Scenario scenarioFromJson(const json& j, const std::filesystem::path& file) {
  const std::string where = file.string();
  Section root(j, where);

  json plant_json;
  const json& plant_ref = root.at("plant");
  if (plant_ref.is_string()) {
    const auto plant_path = resolve(file, plant_ref.get<std::string>());
    plant_json = readJson(plant_path);
  } else {
    plant_json = plant_ref;
  }
  Scenario sc = defaultScenario(plantFromJson(plant_json, where + ".plant"));
  sc.name = root.text("name");

  if (root.has("wind")) {
    const json& w = root.at("wind");
    sc.wind = windFromJson(w, where + ".wind");
    sc.wind_preset = w.is_string() ? w.get<std::string>()
                                   : w.value("preset", std::string("custom"));
  }
  if (root.has("asymmetry")) {
    Section s = root.child("asymmetry");
    s.number("roll_moment", sc.asymmetry.roll_moment);
    s.number("yaw_moment", sc.asymmetry.yaw_moment);
    s.vector("com_offset_mm", sc.asymmetry.com_offset, 1e-3);
    s.finish();
  }
  root.number("duration", sc.duration);
  if (root.has("dt")) {
    sc.dt = root.number("dt");
    sc.mhe.dt = sc.dt;
    sc.mpc.dt = sc.dt;
  }
  root.integer("truth_substeps", sc.truth_substeps);
  if (root.has("launch")) {
    Section s = root.child("launch");
    s.number("thrust_gf", sc.launch_thrust, units::kGramForce);
    s.number("duration", sc.launch_duration);
    s.finish();
  }
  if (root.has("initial")) {
    Section s = root.child("initial");
    s.vector("position", sc.initial.position);
    Vector3 deg = units::radToDeg(1.0) * sc.initial.attitude;
    s.vector("attitude_deg", deg);
    sc.initial.attitude = units::degToRad(1.0) * deg;
    s.vector("velocity", sc.initial.velocity);
    s.finish();
  }
  if (root.has("reference")) {
    Section s = root.child("reference");
    s.number("forward", sc.reference.forward);
    s.number("lateral", sc.reference.lateral);
    s.number("altitude", sc.reference.altitude);
    s.number("yaw_deg", sc.reference.yaw, units::degToRad(1.0));
    s.finish();
  }
  root.number("lateral_limit", sc.lateral_limit);
  root.number("corridor_end", sc.corridor_end);
  if (root.has("noise")) {
    Section s = root.child("noise");
    s.number("position_mm", sc.noise.position_std, 1e-3);
    s.number("attitude_deg", sc.noise.attitude_std, units::degToRad(1.0));
    s.finish();
  }
  if (root.has("mhe")) {
    Section s = root.child("mhe");
    s.integer("horizon", sc.mhe.horizon);
    s.number("wind_limit", sc.mhe.wind_limit);
    s.vector("arrival_weights", sc.mhe.weights.arrival);
    s.vector("wind_weights", sc.mhe.weights.wind);
    s.vector("measurement_weights", sc.mhe.weights.measurement);
    s.number("position_unit", sc.mhe.weights.position_unit);
    s.number("angle_unit", sc.mhe.weights.angle_unit);
    if (s.has("solver")) readSolver(s.child("solver"), sc.mhe.solver);
    s.finish();
  }
  if (root.has("mpc")) {
    Section s = root.child("mpc");
    s.integer("horizon", sc.mpc.horizon);
    s.vector("state_weights", sc.mpc.weights.state);
    s.vector("input_rate_weights", sc.mpc.weights.input_rate);
    s.number("constraint_penalty", sc.mpc.weights.constraint_penalty);
    s.number("position_unit", sc.mpc.weights.position_unit);
    s.number("angle_unit", sc.mpc.weights.angle_unit);
    s.number("thrust_unit", sc.mpc.weights.thrust_unit);
    s.number("deflection_unit", sc.mpc.weights.deflection_unit);
    if (s.has("solver")) readSolver(s.child("solver"), sc.mpc.solver);
    s.finish();
  }
  if (root.has("pid")) {
    Section s = root.child("pid");
    if (s.has("yaw")) readLoop(s.child("yaw"), sc.pid.yaw);
    if (s.has("altitude")) readLoop(s.child("altitude"), sc.pid.altitude);
    s.number("thrust_gf", sc.pid.thrust, units::kGramForce);
    s.number("integrator_limit_mm", sc.pid.integrator_limit, 1e-3);
    s.number("derivative_filter", sc.pid.derivative_filter);
    s.finish();
  }
  root.finish();

  try {
    sc.validate();
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  json canonical = j;
  canonical["plant"] = plant_json;
  sc.canonical_config = canonical.dump();
  return sc;
}

}  // namespace

PlantParameters loadPlantFile(const std::filesystem::path& path) {
  return plantFromJson(readJson(path), path.string());
}

PlantParameters parsePlant(const std::string& json_text) {
  try {
    return plantFromJson(json::parse(json_text), "plant");
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("plant: ") + e.what());
  }
}

Scenario loadScenarioFile(const std::filesystem::path& path) {
  return scenarioFromJson(readJson(path), path);
}

CampaignSpec loadMatrixFile(const std::filesystem::path& path) {
  const json j = readJson(path);
  Section root(j, path.string());
  CampaignSpec spec;
  const json& list = root.at("scenarios");
  if (!list.is_array() || list.empty()) {
    throw ConfigError(path.string() + ".scenarios: expected a non-empty array");
  }
  for (const json& item : list) {
    if (!item.is_string()) throw ConfigError(path.string() + ".scenarios: expected paths");
    spec.scenarios.push_back(loadScenarioFile(resolve(path, item.get<std::string>())));
  }
  const json& arms = root.at("arms");
  if (!arms.is_array() || arms.empty()) {
    throw ConfigError(path.string() + ".arms: expected a non-empty array");
  }
  for (const json& item : arms) {
    if (!item.is_string()) throw ConfigError(path.string() + ".arms: expected names");
    try {
      spec.arms.push_back(parseArm(item.get<std::string>()));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  root.integer("trials", spec.trials);
  if (spec.trials < 1) throw ConfigError(path.string() + ".trials: must be >= 1");
  if (root.has("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_unsigned()) throw ConfigError(path.string() + ".seed: expected an integer");
    spec.master_seed = s.get<std::uint64_t>();
  }
  root.finish();
  return spec;
}

std::string validateConfigFile(const std::filesystem::path& path) {
  const json j = readJson(path);
  if (!j.is_object()) throw ConfigError(path.string() + ": expected an object");
  std::ostringstream out;
  if (j.contains("geometry_mm")) {
    const PlantParameters p = loadPlantFile(path);
    out << "plant ok: net weight " << units::newtonToGf(p.netWeight()) << " gf";
  } else if (j.contains("scenarios")) {
    const CampaignSpec spec = loadMatrixFile(path);
    out << "matrix ok: " << spec.scenarios.size() << " scenarios x " << spec.arms.size()
        << " arms x " << spec.trials << " trials";
  } else {
    const Scenario sc = loadScenarioFile(path);
    out << "scenario ok: " << sc.name << " (wind " << sc.wind_preset << ")";
  }
  return out.str();
}

}  // namespace blimp
