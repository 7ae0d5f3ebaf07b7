#include "pdg/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pdg/errors.hpp"

namespace pdg {

using nlohmann::json;

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

// Reads fields of one JSON object, remembering which keys were used so the
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(field(key), "required field missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    return v.get<double>();
  }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  Eigen::VectorXd array(const std::string& key, int size) {
    const json& v = at(key);
    if (!v.is_array() || static_cast<int>(v.size()) != size) {
      throw ConfigError(field(key), "expected an array of " + std::to_string(size) + " numbers");
    }
    Eigen::VectorXd out(size);
    for (int i = 0; i < size; ++i) {
      if (!v[i].is_number()) throw ConfigError(field(key), "expected an array of numbers");
      out(i) = v[i].get<double>();
    }
    return out;
  }

  Vec3 vec3(const std::string& key) { return array(key, 3); }
  Vec3 vec3(const std::string& key, const Vec3& fallback) { return has(key) ? vec3(key) : fallback; }

  std::array<double, 2> range(const std::string& key, const std::array<double, 2>& fallback) {
    if (!has(key)) return fallback;
    const Eigen::VectorXd v = array(key, 2);
    if (v(0) > v(1)) throw ConfigError(field(key), "lower bound exceeds upper bound");
    return {v(0), v(1)};
  }

  Section child(const std::string& key) { return Section(at(key), field(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_vehicle(Section s, VehicleParams& v) {
  v.isp = s.number("isp_s");
  v.m_dry = s.number("m_dry_kg");
  const json& J = s.at("inertia_kgm2");
  if (J.is_array() && J.size() == 3 && J[0].is_number()) {
    v.J = s.vec3("inertia_kgm2").asDiagonal();
  } else if (J.is_array() && J.size() == 3) {
    for (int r = 0; r < 3; ++r) {
      if (!J[r].is_array() || J[r].size() != 3) {
        throw ConfigError(s.field("inertia_kgm2"), "expected a diagonal [3] or a 3x3 matrix");
      }
      for (int c = 0; c < 3; ++c) {
        if (!J[r][c].is_number()) throw ConfigError(s.field("inertia_kgm2"), "expected numbers");
        v.J(r, c) = J[r][c].get<double>();
      }
    }
  } else {
    throw ConfigError(s.field("inertia_kgm2"), "expected a diagonal [3] or a 3x3 matrix");
  }
  v.r_u = s.vec3("engine_offset_m");
  v.g_I = s.vec3("gravity_mps2");
  s.finish();
}

void read_limits(Section s, ConstraintParams& p) {
  p.gamma_max = s.number("gamma_max_deg") * kDeg;
  p.theta_max = s.number("theta_max_deg") * kDeg;
  p.omega_max = s.number("omega_max_degps") * kDeg;
  p.u_min = s.number("u_min_N");
  p.u_max = s.number("u_max_N");
  p.delta_max = s.number("delta_max_deg") * kDeg;
  if (s.has("gimbal_rate_max_degps")) p.gimbal_rate_max = s.number("gimbal_rate_max_degps") * kDeg;
  if (s.has("uz_rate_max_Nps")) p.uz_rate_max = s.number("uz_rate_max_Nps");
  s.finish();
}

void read_line_of_sight(Section s, ConstraintParams& p) {
  p.stc_enabled = s.boolean("enabled", false);
  p.rho_min = s.number("rho_min_m");
  p.rho_max = s.number("rho_max_m");
  p.xi_max = s.number("xi_max_deg") * kDeg;
  const Vec3 axis = s.vec3("p_B");
  if (!(axis.norm() > 0.0)) throw ConfigError(s.field("p_B"), "must be nonzero");
  p.p_B = axis.normalized();
  s.finish();
}

void read_boundary(Section s, BoundaryConditions& bc) {
  bc.m0 = s.number("m0_kg");
  bc.r0_I = s.vec3("r0_m");
  bc.v0_I = s.vec3("v0_mps");
  bc.w0_B = s.vec3("w0_degps", Vec3::Zero()) * kDeg;
  bc.rf_I = s.vec3("rf_m");
  bc.vf_I = s.vec3("vf_mps");
  bc.wf_B = s.vec3("wf_degps", Vec3::Zero()) * kDeg;
  if (s.has("qf_xyzw")) {
    const Vec4 q = s.array("qf_xyzw", 4);
    if (std::abs(q.norm() - 1.0) > 1e-9) throw ConfigError(s.field("qf_xyzw"), "must be a unit quaternion");
    bc.qf = Quaternion(q);
  }
  s.finish();
}

void read_scvx(Section s, ScvxConfig& c) {
  c.N = s.integer("nodes", c.N);
  c.dx_tol = s.number("dx_tol", c.dx_tol);
  c.w_vc = s.number("w_vc", c.w_vc);
  c.defect_floor = s.number("defect_floor", c.defect_floor);
  c.max_iterations = s.integer("max_iterations", c.max_iterations);
  c.substeps = s.integer("substeps", c.substeps);
  c.defect_tol = s.number("defect_tol", c.defect_tol);
  c.accept_tol = s.number("accept_tol", c.accept_tol);
  const std::string tr = s.string("trust_region", "squared");
  if (tr == "squared") {
    c.trust_region = TrustRegionForm::Squared;
  } else if (tr == "sum_of_norms") {
    c.trust_region = TrustRegionForm::SumOfNorms;
  } else {
    throw ConfigError(s.field("trust_region"), "expected \"squared\" or \"sum_of_norms\"");
  }
  s.finish();
}

void read_montecarlo(Section s, MonteCarloConfig& m) {
  m.trials = s.integer("trials", m.trials);
  m.nodes = s.integer("nodes", m.nodes);
  if (s.has("seed")) {
    const json& v = s.at("seed");
    if (!v.is_number_unsigned()) throw ConfigError(s.field("seed"), "expected a non-negative integer");
    m.seed = v.get<std::uint64_t>();
  }
  m.mass_spread = s.number("mass_spread", m.mass_spread);
  m.velocity_sigma = s.vec3("velocity_sigma_mps", m.velocity_sigma);
  m.downrange = s.range("downrange_m", m.downrange);
  m.crossrange = s.range("crossrange_m", m.crossrange);
  m.altitude = s.range("altitude_m", m.altitude);
  m.max_attempts = s.integer("max_attempts", m.max_attempts);
  m.success_position_m = s.number("success_position_m", m.success_position_m);
  m.success_velocity_mps = s.number("success_velocity_mps", m.success_velocity_mps);
  m.threads = s.integer("threads", m.threads);
  s.finish();
}

// Library validators report "field: message"; prefix the section.
template <class F>
void checked(const std::string& section, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    const auto colon = what.find(':');
    if (colon == std::string::npos) throw ConfigError(section, what);
    throw ConfigError(section + "." + what.substr(0, colon), what.substr(colon + 2));
  }
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

void MonteCarloConfig::validate() const {
  if (trials < 1) throw ConfigError("montecarlo.trials", "must be at least 1");
  if (nodes < 2) throw ConfigError("montecarlo.nodes", "need at least 2 nodes");
  if (!(mass_spread >= 0.0 && mass_spread < 1.0)) throw ConfigError("montecarlo.mass_spread", "must lie in [0, 1)");
  if ((velocity_sigma.array() < 0.0).any()) throw ConfigError("montecarlo.velocity_sigma_mps", "must be >= 0");
  if (max_attempts < 1) throw ConfigError("montecarlo.max_attempts", "must be at least 1");
  if (!(success_position_m > 0.0)) throw ConfigError("montecarlo.success_position_m", "must be positive");
  if (!(success_velocity_mps > 0.0)) throw ConfigError("montecarlo.success_velocity_mps", "must be positive");
  if (threads < 0) throw ConfigError("montecarlo.threads", "must be >= 0");
}

GuidanceProblem Scenario::with_stc(bool on) const {
  GuidanceProblem p = problem;
  p.limits.stc_enabled = on;
  return p;
}

void Scenario::validate() const {
  checked("vehicle", [&] { problem.vehicle.validate(); });
  // The line-of-sight parameters are checked even when the constraint is off
  // so that a case study can switch it on.
  checked("limits", [&] { with_stc(true).limits.validate(); });
  checked("boundary", [&] { problem.validate(); });
  checked("scvx", [&] { scvx.validate(); });
  montecarlo.validate();
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte is 1-based and points just past the offending character
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    int line = 1;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        line_start = i + 1;
      }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << (upto - line_start + 1) << ": JSON syntax error";
    throw ConfigError("", msg.str());
  }

  Scenario sc;
  Section top(root, "");
  sc.name = top.string("name", "scenario");
  read_vehicle(top.child("vehicle"), sc.problem.vehicle);
  read_limits(top.child("limits"), sc.problem.limits);
  read_line_of_sight(top.child("line_of_sight"), sc.problem.limits);
  read_boundary(top.child("boundary"), sc.problem.bc);
  if (top.has("scvx")) read_scvx(top.child("scvx"), sc.scvx);
  if (top.has("montecarlo")) read_montecarlo(top.child("montecarlo"), sc.montecarlo);
  top.finish();
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::string scenario_to_json(const Scenario& s) {
  const GuidanceProblem& p = s.problem;
  json j;
  j["name"] = s.name;
  const bool diagonal = (p.vehicle.J - Mat3(p.vehicle.J.diagonal().asDiagonal())).isZero(0.0);
  json J;
  if (diagonal) {
    J = vec_json(p.vehicle.J.diagonal());
  } else {
    for (int r = 0; r < 3; ++r) J.push_back(vec_json(p.vehicle.J.row(r).transpose()));
  }
  j["vehicle"] = {{"isp_s", p.vehicle.isp},
                  {"m_dry_kg", p.vehicle.m_dry},
                  {"inertia_kgm2", J},
                  {"engine_offset_m", vec_json(p.vehicle.r_u)},
                  {"gravity_mps2", vec_json(p.vehicle.g_I)}};
  const ConstraintParams& l = p.limits;
  j["limits"] = {{"gamma_max_deg", l.gamma_max / kDeg}, {"theta_max_deg", l.theta_max / kDeg},
                 {"omega_max_degps", l.omega_max / kDeg}, {"u_min_N", l.u_min},
                 {"u_max_N", l.u_max}, {"delta_max_deg", l.delta_max / kDeg}};
  if (l.gimbal_rate_max) j["limits"]["gimbal_rate_max_degps"] = *l.gimbal_rate_max / kDeg;
  if (l.uz_rate_max) j["limits"]["uz_rate_max_Nps"] = *l.uz_rate_max;
  j["line_of_sight"] = {{"enabled", l.stc_enabled}, {"rho_min_m", l.rho_min}, {"rho_max_m", l.rho_max},
                        {"xi_max_deg", l.xi_max / kDeg}, {"p_B", vec_json(l.p_B)}};
  const BoundaryConditions& b = p.bc;
  j["boundary"] = {{"m0_kg", b.m0},
                   {"r0_m", vec_json(b.r0_I)},
                   {"v0_mps", vec_json(b.v0_I)},
                   {"w0_degps", vec_json(b.w0_B / kDeg)},
                   {"rf_m", vec_json(b.rf_I)},
                   {"vf_mps", vec_json(b.vf_I)},
                   {"wf_degps", vec_json(b.wf_B / kDeg)},
                   {"qf_xyzw", vec_json(b.qf.c)}};
  const ScvxConfig& c = s.scvx;
  j["scvx"] = {{"nodes", c.N},
               {"dx_tol", c.dx_tol},
               {"w_vc", c.w_vc},
               {"defect_floor", c.defect_floor},
               {"max_iterations", c.max_iterations},
               {"substeps", c.substeps},
               {"defect_tol", c.defect_tol},
               {"accept_tol", c.accept_tol},
               {"trust_region", c.trust_region == TrustRegionForm::Squared ? "squared" : "sum_of_norms"}};
  const MonteCarloConfig& m = s.montecarlo;
  j["montecarlo"] = {{"trials", m.trials},
                     {"nodes", m.nodes},
                     {"seed", m.seed},
                     {"mass_spread", m.mass_spread},
                     {"velocity_sigma_mps", vec_json(m.velocity_sigma)},
                     {"downrange_m", m.downrange},
                     {"crossrange_m", m.crossrange},
                     {"altitude_m", m.altitude},
                     {"max_attempts", m.max_attempts},
                     {"success_position_m", m.success_position_m},
                     {"success_velocity_mps", m.success_velocity_mps},
                     {"threads", m.threads}};
  return j.dump(2);
}

}  // namespace pdg
