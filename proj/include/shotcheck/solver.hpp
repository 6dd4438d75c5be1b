#pragma once

// Augmented-Lagrangian NLP solver (PHR form with slack-bounded inequality
// rows) whose bound-constrained subproblems are solved by projected Newton
// with a sparse LDL^T factorization.

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "shotcheck/config.hpp"
#include "shotcheck/nlp.hpp"

namespace shotcheck {

class Transcription;

class EvaluationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolveStatus { optimal, feasible, iteration_cap, diverged };
std::string status_name(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::iteration_cap;
  Eigen::VectorXd w;
  Eigen::VectorXd multipliers;  // one per constraint row
  double objective = 0.0;
  double violation = 0.0;       // inf-norm of row and bound violation
  double kkt = 0.0;             // inf-norm of the projected Lagrangian gradient
  int iterations = 0;           // inner Newton iterations
  int outer_iterations = 0;
  double penalty = 0.0;
  double eval_seconds = 0.0;    // function and derivative evaluation
  double solver_seconds = 0.0;  // everything else
  double total_seconds = 0.0;
};

// Called with (inner iteration, iterate) after every accepted step.
using IterateCallback = std::function<void(int, const Eigen::VectorXd&)>;

class NlpSolver {
 public:
  virtual ~NlpSolver() = default;
  virtual SolveResult solve(const Nlp& nlp, const Eigen::VectorXd& x0, const IterateCallback& callback = {}) const = 0;
};

class AugmentedLagrangianSolver final : public NlpSolver {
 public:
  explicit AugmentedLagrangianSolver(SolverOptions options = {}) : options_(options) {}
  const SolverOptions& options() const { return options_; }
  SolveResult solve(const Nlp& nlp, const Eigen::VectorXd& x0, const IterateCallback& callback = {}) const override;

 private:
  SolverOptions options_;
};

// Solves a transcription from its initial guess.
SolveResult solve(const Transcription& problem, const SolverOptions& options = {},
                  const IterateCallback& callback = {});

}  // namespace shotcheck
