#pragma once

// Multiple-shooting transcription of the 6-DOF landing problem.
//
// Decision vector: node states X (N x 14), interval thrusts U ((N-1) x 3),
// the time dilation s, then the lifted blocks of every interval (stage
// states for stage-value RK maps, x_gamma for TR-BDF2). Boundary states
// are fixed through variable bounds; path constraints are smooth squared
// forms of the reporting constraints.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shotcheck/config.hpp"
#include "shotcheck/dynamics.hpp"
#include "shotcheck/integrators.hpp"
#include "shotcheck/nlp.hpp"

namespace shotcheck {

enum class ObjectiveKind { min_fuel, max_fuel, adversarial_lr, feasibility };

std::string objective_name(ObjectiveKind kind);
// Accepts "min-fuel", "max-fuel", "adversarial" (or "adversarial-lr"),
// "feasibility"; underscores work in place of dashes.
ObjectiveKind parse_objective(const std::string& name);

// Hessian of the adversarial term: exact, Gauss-Newton (drops the
// second derivatives of x^(p+1)), or none.
enum class AdversarialHessian { exact, gauss_newton, none };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::min_fuel;
  int p = 2;            // adversarial: method order being attacked, samples x^(p+1)
  double r = 20.0;      // adversarial: l_r exponent
  double scale = 1.0;   // adversarial: the NLP minimizes -scale * J_r
  AdversarialHessian hessian = AdversarialHessian::exact;
};

struct VariableLayout {
  int nodes = 15;
  int lifted = 0;  // n_x blocks per interval
  static constexpr int nx = static_cast<int>(kStateDim);
  static constexpr int nu = static_cast<int>(kControlDim);

  int x(int k, int i = 0) const { return k * nx + i; }
  int u(int k, int i = 0) const { return nodes * nx + k * nu + i; }
  int s() const { return nodes * nx + (nodes - 1) * nu; }
  int y(int k, int b, int i = 0) const { return s() + 1 + (k * lifted + b) * nx + i; }
  int total() const { return s() + 1 + (nodes - 1) * lifted * nx; }
};

struct Trajectory {
  Eigen::MatrixXd x;  // 14 x N
  Eigen::MatrixXd u;  // 3 x (N - 1)
  double s = 0.0;
  Eigen::MatrixXd y;  // 14 x ((N - 1) * lifted), interval-major
};

// Stable l_r norm M (sum (a_i / M)^r)^(1/r), M = max a_i.
double lr_norm(std::span<const double> a, double r);
double max_norm(std::span<const double> a);

class Transcription {
 public:
  Transcription(const OneStepMap& map, const ObjectiveSpec& objective, const ProblemConfig& config);

  const OneStepMap& map() const { return *map_; }
  const ObjectiveSpec& objective() const { return objective_; }
  const ProblemConfig& config() const { return config_; }
  const VariableLayout& layout() const { return layout_; }
  const OdePtr& ode() const { return ode_; }
  double h() const { return h_; }

  Nlp& nlp() { return nlp_; }
  const Nlp& nlp() const { return nlp_; }

  Eigen::VectorXd pack(const Trajectory& t) const;
  Trajectory unpack(const Eigen::VectorXd& w) const;

  // Linear interpolation between the boundary states, thrust balancing
  // gravity, s at mid-range, lifted blocks interpolated at their abscissae.
  Eigen::VectorXd initial_guess() const;

  // Dynamics rows (defects and lifted-block equations) at w.
  Eigen::VectorXd dynamics_residual(const Eigen::VectorXd& w) const;
  // Largest bound violation over all rows and variables.
  double max_violation(const Eigen::VectorXd& w) const;

 private:
  void add_dynamics();
  void add_path();
  void add_objective();
  void set_bounds();

  const OneStepMap* map_;
  ObjectiveSpec objective_;
  ProblemConfig config_;
  VariableLayout layout_;
  OdePtr ode_;
  double h_;
  Nlp nlp_;
};

std::unique_ptr<Transcription> build_transcription(const OneStepMap& map, const ObjectiveSpec& objective,
                                                   const ProblemConfig& config);

// The ten reporting path constraints at one node (c <= 0 is feasible), in
// order: dry mass, glide slope, tilt, angular rate, max thrust, pointing,
// speed, min thrust, max dilation, min dilation. `u` may be the thrust of
// the interval starting or ending at the node.
inline constexpr int kPathRows = 10;
Eigen::VectorXd eval_path_constraints(const Eigen::VectorXd& x, const Eigen::Vector3d& u, double s,
                                      const ProblemConfig& config);
const std::vector<std::string>& path_constraint_names();

// Adversarial objective on a node trajectory: each interval's GL3 stage
// states are recovered by Newton from (x_k, u_k, s), the samples are
// a_ki = |x^(p+1)(Y_ki)|, J_r sums the per-interval l_r norms and J_inf the
// per-interval maxima.
struct AdversarialValue {
  double j_r = 0.0;
  double j_inf = 0.0;
  Eigen::MatrixXd samples;  // stages x intervals
};
AdversarialValue eval_adversarial_objective(const Eigen::MatrixXd& x, const Eigen::MatrixXd& u, double s,
                                            const ObjectiveSpec& spec, const ProblemConfig& config);

}  // namespace shotcheck
