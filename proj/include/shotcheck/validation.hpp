#pragma once

// Post-solve checks: open-loop replay through the reference integrator,
// quaternion-norm drift, per-step local truncation error with exact
// resets, replay of reference controls through a map, and the stiffness
// ratio of the dynamics Jacobian along a trajectory.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "shotcheck/dynamics.hpp"
#include "shotcheck/integrators.hpp"
#include "shotcheck/reference.hpp"

namespace shotcheck {

inline constexpr double kOpenLoopTolerance = 1e-2;
inline constexpr double kStiffnessFloor = 1e-9;

// Node states (14 x N) of the reference flow under ZOH controls U
// (3 x (N - 1)) from x0, interval duration s * h.
Eigen::MatrixXd reference_trajectory(const ControlledOde& ode, const Eigen::VectorXd& x0, const Eigen::MatrixXd& u,
                                     double s, const ReferenceOptions& opts = {});

struct Replay {
  Eigen::MatrixXd states;           // reference states at the mesh nodes
  Eigen::VectorXd terminal;
  double eps_ol = 0.0;              // |r_OL(t_f) - r_NLP(t_f)|
  std::vector<double> drift_trace;  // | |q_k| - 1 | of the replay at each node
  bool pass() const { return eps_ol <= kOpenLoopTolerance; }
};

// Replays (U, s) from x[:, 0] and compares the terminal position with
// x[:, N-1]. `rtol` sets both tolerances of the reference integrator.
Replay replay_open_loop(const ControlledOde& ode, const Eigen::MatrixXd& x, const Eigen::MatrixXd& u, double s,
                        double rtol = 1e-12);

// | |q_k| - 1 | for every column of a node-state matrix.
std::vector<double> quaternion_drift(const Eigen::MatrixXd& states);

// Drift of the map's own iterates when it is stepped along (U, s) from x0.
std::vector<double> iterate_drift_trace(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x0,
                                        const Eigen::MatrixXd& u, double s);

struct RefOlResult {
  bool pass = false;
  double error = 0.0;  // |r_map(t_f) - r_ref(t_f)|
  Eigen::MatrixXd map_states;
};

// Steps `map` itself along reference controls and compares its terminal
// position with the reference replay of the same controls.
RefOlResult ref_ol_check(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x0,
                         const Eigen::MatrixXd& u, double s);

struct LteTrace {
  std::vector<double> measured;  // |x(tau_{k+1}) - Psi(x(tau_k))|
  std::vector<double> estimate;  // |principal order-5 term|, NaN where undefined
};

// One step of `map` per interval from the exact node states `x_ref`
// (14 x N). BDF maps use exact history; their first k - 1 intervals use the
// startup method.
LteTrace isolate_lte(const OneStepMap& map, const ControlledOde& ode, const Eigen::MatrixXd& x_ref,
                     const Eigen::MatrixXd& u, double s);

struct StiffnessResult {
  double ratio = 0.0;
  bool degenerate = false;  // some node had no eigenvalue with |Re| above the floor
  std::vector<double> per_node;
};

// max_k |Re lambda|_max / |Re lambda|_min over eigenvalues of df/dx with
// |Re lambda| >= kStiffnessFloor. Node k uses the thrust of interval
// min(k, N - 2).
StiffnessResult stiffness_ratio(const ControlledOde& ode, const Eigen::MatrixXd& x, const Eigen::MatrixXd& u);
double stiffness_ratio(const Eigen::MatrixXd& jacobian, bool* degenerate = nullptr);

struct ValidationReport {
  std::string method;
  double s = 0.0;
  double eps_ol = 0.0;
  bool ol_pass = false;
  std::optional<bool> ref_ol_pass;
  std::optional<double> ref_ol_error;
  std::vector<double> drift_replay;    // continuous replay of the controls
  std::vector<double> drift_iterates;  // the map's own iterates
  LteTrace lte;
  StiffnessResult stiffness;
};

// Full report for a solved trajectory under `map`. When reference controls
// are given, the Ref-OL check runs on them.
ValidationReport validate_solution(const OneStepMap& map, const ControlledOde& ode, const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& u, double s, const Eigen::MatrixXd* ref_u = nullptr,
                                   const double* ref_s = nullptr);

nlohmann::json to_json(const ValidationReport& report);
// One row per node: tau, drift_replay, drift_iterates, lte, lte_h5_estimate
// (interval quantities are written on the interval's starting node).
std::string trace_csv(const ValidationReport& report);

}  // namespace shotcheck
