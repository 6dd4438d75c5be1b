#include "shotcheck/config.hpp"

#include <fstream>
#include <set>

namespace shotcheck {
namespace {

using nlohmann::json;

json vec3(const Eigen::Vector3d& v) { return json::array({v(0), v(1), v(2)}); }

json mat3(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
  return rows;
}

class Reader {
 public:
  Reader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(where() + " must be an object");
  }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + path_ + "." + key + "'");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  void num(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
      out = v->get<int>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  void text(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  void vector3(const std::string& key, Eigen::Vector3d& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 3) throw ConfigError(where(key) + " must be a 3-element array");
      for (int i = 0; i < 3; ++i) {
        if (!(*v)[static_cast<std::size_t>(i)].is_number()) throw ConfigError(where(key) + " must hold numbers");
        out(i) = (*v)[static_cast<std::size_t>(i)].get<double>();
      }
    }
  }
  void matrix3(const std::string& key, Eigen::Matrix3d& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 3) throw ConfigError(where(key) + " must be a 3x3 array");
      for (int i = 0; i < 3; ++i) {
        const json& row = (*v)[static_cast<std::size_t>(i)];
        if (!row.is_array() || row.size() != 3) throw ConfigError(where(key) + " must be a 3x3 array");
        for (int j = 0; j < 3; ++j) out(i, j) = row[static_cast<std::size_t>(j)].get<double>();
      }
    }
  }
  template <class T>
  void list(const std::string& key, std::vector<T>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(where(key) + " must be an array");
      try {
        out = v->get<std::vector<T>>();
      } catch (const json::exception&) {
        throw ConfigError(where(key) + " has elements of the wrong type");
      }
    }
  }
  const json* section(const std::string& key) {
    const json* v = find(key);
    if (v && !v->is_object()) throw ConfigError(where(key) + " must be an object");
    return v;
  }
  std::string child(const std::string& key) const { return path_ + "." + key; }

 private:
  std::string where(const std::string& key = "") const {
    return "config key '" + (key.empty() ? path_ : path_ + "." + key) + "'";
  }
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

Eigen::VectorXd ProblemConfig::initial_state() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(kStateDim);
  x(kMass) = boundary.m_wet;
  x.segment<3>(kPos) = boundary.r_init;
  x.segment<3>(kVel) = boundary.v_init;
  x(kQuat + 3) = 1.0;
  return x;
}

void ProblemConfig::validate() const {
  try {
    rocket.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto& l = limits;
  if (transcription.nodes < 3) throw ConfigError("transcription.nodes must be >= 3");
  if (!(l.m_dry > 0.0) || !(boundary.m_wet > l.m_dry)) throw ConfigError("need 0 < m_dry < m_wet");
  if (!(l.thrust_min > 0.0) || !(l.thrust_max > l.thrust_min)) throw ConfigError("need 0 < thrust_min < thrust_max");
  if (!(l.s_min > 0.0) || !(l.s_max >= l.s_min)) throw ConfigError("need 0 < s_min <= s_max");
  if (!(l.glide_slope_deg > 0.0 && l.glide_slope_deg < 90.0)) throw ConfigError("glide_slope_deg must lie in (0, 90)");
  if (!(l.tilt_max_deg > 0.0 && l.tilt_max_deg <= 180.0)) throw ConfigError("tilt_max_deg must lie in (0, 180]");
  if (!(l.pointing_max_deg > 0.0 && l.pointing_max_deg < 90.0)) throw ConfigError("pointing_max_deg must lie in (0, 90)");
  if (!(l.omega_max_deg > 0.0) || !(l.speed_max > 0.0)) throw ConfigError("omega_max_deg and speed_max must be positive");
}

nlohmann::json to_json(const RunConfig& cfg) {
  const auto& p = cfg.problem;
  json doc;
  doc["rocket"] = {{"alpha_mdt", p.rocket.alpha_mdt}, {"beta_mdt", p.rocket.beta_mdt}, {"g_I", vec3(p.rocket.g_i)},
                   {"J_B", mat3(p.rocket.j_b)},          {"r_TB", vec3(p.rocket.r_tb)},   {"r_cpB", vec3(p.rocket.r_cpb)},
                   {"rho", p.rocket.rho},                {"S_A", p.rocket.s_a},           {"C_A", mat3(p.rocket.c_a)},
                   {"speed_smoothing", p.rocket.speed_smoothing}};
  doc["boundary"] = {{"m_wet", p.boundary.m_wet},
                     {"r_init", vec3(p.boundary.r_init)},
                     {"v_init", vec3(p.boundary.v_init)},
                     {"r_final", vec3(p.boundary.r_final)},
                     {"v_final", vec3(p.boundary.v_final)}};
  const auto& l = p.limits;
  doc["limits"] = {{"m_dry", l.m_dry},
                   {"glide_slope_deg", l.glide_slope_deg},
                   {"tilt_max_deg", l.tilt_max_deg},
                   {"omega_max_deg", l.omega_max_deg},
                   {"thrust_min", l.thrust_min},
                   {"thrust_max", l.thrust_max},
                   {"pointing_max_deg", l.pointing_max_deg},
                   {"speed_max", l.speed_max},
                   {"s_min", l.s_min},
                   {"s_max", l.s_max}};
  doc["transcription"] = {{"nodes", p.transcription.nodes},
                          {"stage_path_constraints", p.transcription.stage_path_constraints},
                          {"project_quaternion", p.transcription.project_quaternion}};
  const auto& s = cfg.solver;
  doc["solver"] = {{"feas_tol", s.feas_tol},   {"opt_tol", s.opt_tol},   {"max_iter", s.max_iter},
                   {"max_outer", s.max_outer}, {"max_inner", s.max_inner},
                   {"runaway_violation", s.runaway_violation}, {"rho_init", s.rho_init}, {"rho_max", s.rho_max},
                   {"verbose", s.verbose}};
  doc["adversarial"] = {{"orders", cfg.adversarial.orders},
                        {"r", cfg.adversarial.r},
                        {"speed_smoothing", cfg.adversarial.speed_smoothing},
                        {"gauss_newton", cfg.adversarial.gauss_newton}};
  doc["divert"] = {{"distances", cfg.divert.distances}, {"axis", cfg.divert.axis}, {"s_max", cfg.divert.s_max}};
  doc["bench"] = {{"methods", cfg.bench.methods},
                  {"reference_method", cfg.bench.reference_method},
                  {"sequential_timing", cfg.bench.sequential_timing}};
  return doc;
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  Reader top(doc, "config");
  auto& p = cfg.problem;
  if (const json* sec = top.section("rocket")) {
    Reader r(*sec, "rocket");
    r.num("alpha_mdt", p.rocket.alpha_mdt);
    r.num("beta_mdt", p.rocket.beta_mdt);
    r.vector3("g_I", p.rocket.g_i);
    r.matrix3("J_B", p.rocket.j_b);
    r.vector3("r_TB", p.rocket.r_tb);
    r.vector3("r_cpB", p.rocket.r_cpb);
    r.num("rho", p.rocket.rho);
    r.num("S_A", p.rocket.s_a);
    r.matrix3("C_A", p.rocket.c_a);
    r.num("speed_smoothing", p.rocket.speed_smoothing);
  }
  if (const json* sec = top.section("boundary")) {
    Reader r(*sec, "boundary");
    r.num("m_wet", p.boundary.m_wet);
    r.vector3("r_init", p.boundary.r_init);
    r.vector3("v_init", p.boundary.v_init);
    r.vector3("r_final", p.boundary.r_final);
    r.vector3("v_final", p.boundary.v_final);
  }
  if (const json* sec = top.section("limits")) {
    Reader r(*sec, "limits");
    auto& l = p.limits;
    r.num("m_dry", l.m_dry);
    r.num("glide_slope_deg", l.glide_slope_deg);
    r.num("tilt_max_deg", l.tilt_max_deg);
    r.num("omega_max_deg", l.omega_max_deg);
    r.num("thrust_min", l.thrust_min);
    r.num("thrust_max", l.thrust_max);
    r.num("pointing_max_deg", l.pointing_max_deg);
    r.num("speed_max", l.speed_max);
    r.num("s_min", l.s_min);
    r.num("s_max", l.s_max);
  }
  if (const json* sec = top.section("transcription")) {
    Reader r(*sec, "transcription");
    r.integer("nodes", p.transcription.nodes);
    r.boolean("stage_path_constraints", p.transcription.stage_path_constraints);
    r.boolean("project_quaternion", p.transcription.project_quaternion);
  }
  if (const json* sec = top.section("solver")) {
    Reader r(*sec, "solver");
    r.num("feas_tol", cfg.solver.feas_tol);
    r.num("opt_tol", cfg.solver.opt_tol);
    r.integer("max_iter", cfg.solver.max_iter);
    r.integer("max_outer", cfg.solver.max_outer);
    r.integer("max_inner", cfg.solver.max_inner);
    r.num("runaway_violation", cfg.solver.runaway_violation);
    r.num("rho_init", cfg.solver.rho_init);
    r.num("rho_max", cfg.solver.rho_max);
    r.boolean("verbose", cfg.solver.verbose);
  }
  if (const json* sec = top.section("adversarial")) {
    Reader r(*sec, "adversarial");
    r.list("orders", cfg.adversarial.orders);
    r.num("r", cfg.adversarial.r);
    r.num("speed_smoothing", cfg.adversarial.speed_smoothing);
    r.boolean("gauss_newton", cfg.adversarial.gauss_newton);
  }
  if (const json* sec = top.section("divert")) {
    Reader r(*sec, "divert");
    r.list("distances", cfg.divert.distances);
    r.integer("axis", cfg.divert.axis);
    r.num("s_max", cfg.divert.s_max);
  }
  if (const json* sec = top.section("bench")) {
    Reader r(*sec, "bench");
    r.list("methods", cfg.bench.methods);
    r.text("reference_method", cfg.bench.reference_method);
    r.boolean("sequential_timing", cfg.bench.sequential_timing);
  }
  p.validate();
  if (cfg.divert.axis != 1 && cfg.divert.axis != 2) throw ConfigError("divert.axis must be 1 (y) or 2 (z)");
  for (int order : cfg.adversarial.orders) {
    if (order < 2 || order > 4) throw ConfigError("adversarial.orders entries must lie in {2, 3, 4}");
  }
  if (!(cfg.adversarial.r >= 1.0)) throw ConfigError("adversarial.r must be >= 1");
  if (!(cfg.adversarial.speed_smoothing >= 0.0)) throw ConfigError("adversarial.speed_smoothing must be >= 0");
  for (std::size_t i = 0; i < cfg.divert.distances.size(); ++i) {
    if (!(cfg.divert.distances[i] > 0.0)) throw ConfigError("divert.distances must be positive");
    if (i > 0 && !(cfg.divert.distances[i] > cfg.divert.distances[i - 1])) {
      throw ConfigError("divert.distances must be strictly ascending");
    }
  }
  if (!(cfg.divert.s_max >= p.limits.s_min)) throw ConfigError("divert.s_max must be >= limits.s_min");
  const SolverOptions& so = cfg.solver;
  if (!(so.feas_tol > 0.0) || !(so.opt_tol > 0.0)) throw ConfigError("solver tolerances must be positive");
  if (so.max_iter < 1 || so.max_outer < 1 || so.max_inner < 1) throw ConfigError("solver iteration limits must be >= 1");
  if (!(so.rho_init > 0.0) || !(so.rho_max >= so.rho_init)) throw ConfigError("solver needs 0 < rho_init <= rho_max");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(doc);
}

std::string config_schema_hint() {
  return "config schema (JSON, all sections optional, angles in degrees):\n"
         "  rocket:        alpha_mdt, beta_mdt, g_I[3], J_B[3][3], r_TB[3], r_cpB[3], rho, S_A, C_A[3][3], speed_smoothing\n"
         "  boundary:      m_wet, r_init[3], v_init[3], r_final[3], v_final[3]\n"
         "  limits:        m_dry, glide_slope_deg, tilt_max_deg, omega_max_deg, thrust_min, thrust_max,\n"
         "                 pointing_max_deg, speed_max, s_min, s_max\n"
         "  transcription: nodes, stage_path_constraints, project_quaternion\n"
         "  solver:        feas_tol, opt_tol, max_iter, max_outer, max_inner, runaway_violation,\n"
         "                 rho_init, rho_max, verbose\n"
         "  adversarial:   orders[], r, speed_smoothing, gauss_newton\n"
         "  divert:        distances[], axis, s_max\n"
         "  bench:         methods[], reference_method, sequential_timing\n"
         "see config/default.json and docs/config.md";
}

}  // namespace shotcheck
