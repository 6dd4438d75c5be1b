#pragma once

// Run configuration: rocket parameters, boundary conditions, path limits,
// transcription settings, solver options and benchmark settings. Stored as
// a nested JSON document; angles are in degrees, everything else in the
// normalized units of the dynamics.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "shotcheck/dynamics.hpp"

namespace shotcheck {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoundaryConditions {
  double m_wet = 2.0;
  Eigen::Vector3d r_init{4.0, 4.0, 0.0};
  Eigen::Vector3d v_init{-1.0, -1.0, 0.0};
  Eigen::Vector3d r_final{0.0, 0.0, 0.0};  // landing target r_K
  Eigen::Vector3d v_final{-0.1, 0.0, 0.0};
};

struct PathLimits {
  double m_dry = 1.0;
  double glide_slope_deg = 70.0;  // cone half-angle about the vertical (+x) axis
  double tilt_max_deg = 90.0;
  double omega_max_deg = 60.0;
  double thrust_min = 1.0;
  double thrust_max = 5.0;
  double pointing_max_deg = 20.0;
  double speed_max = 3.0;
  double s_min = 2.0;
  double s_max = 7.0;
};

struct TranscriptionSettings {
  int nodes = 15;
  bool stage_path_constraints = false;
  bool project_quaternion = false;
};

struct ProblemConfig {
  RocketParams rocket;
  BoundaryConditions boundary;
  PathLimits limits;
  TranscriptionSettings transcription;

  // Full 14-dim initial state (identity attitude, zero rates).
  Eigen::VectorXd initial_state() const;
  void validate() const;
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-6;
  int max_iter = 3000;       // inner Newton iterations, summed over outer updates
  int max_outer = 60;
  int max_inner = 500;       // per outer iteration
  double runaway_violation = 0.1;  // restart with a larger penalty above this
  double rho_init = 10.0;
  double rho_max = 1e10;
  bool verbose = false;
};

struct AdversarialSettings {
  std::vector<int> orders{2, 3, 4};
  double r = 20.0;
  // Replaces rocket.speed_smoothing for every solve of the adversarial
  // comparison; x^(4) and x^(5) are unbounded near zero airspeed otherwise.
  double speed_smoothing = 0.05;
  bool gauss_newton = true;  // Gauss-Newton Hessian for the J_r term
};

struct DivertSettings {
  std::vector<double> distances{0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  int axis = 2;  // lateral inertial axis of the offset (1 = y, 2 = z)
  double s_max = 10.0;  // replaces limits.s_max in divert cells
};

struct BenchSettings {
  std::vector<std::string> methods;  // empty = all registered methods
  std::string reference_method = "gl3";
  bool sequential_timing = false;  // run timed cells one at a time regardless of --jobs
};

struct RunConfig {
  ProblemConfig problem;
  SolverOptions solver;
  AdversarialSettings adversarial;
  DivertSettings divert;
  BenchSettings bench;
};

nlohmann::json to_json(const RunConfig& cfg);
// Missing keys keep their defaults; unknown keys or wrong types throw ConfigError.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

// One line per key, for usage errors.
std::string config_schema_hint();

}  // namespace shotcheck
