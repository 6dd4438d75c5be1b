#pragma once

// Adaptive Dormand-Prince 8(5,3) integrator used as the high-accuracy
// replay oracle.

#include <stdexcept>

#include <Eigen/Dense>

#include "shotcheck/dynamics.hpp"

namespace shotcheck {

class ReferenceIntegrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReferenceOptions {
  double rtol = 1e-12;
  double atol = 1e-12;
  long max_steps = 1'000'000;
};

struct ReferenceStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

// Integrates dx/dt = f(x, u) with u held fixed over [0, duration]
// (duration >= 0). Throws ReferenceIntegrationFailure when the step size
// underflows, the step budget runs out or the state turns non-finite.
Eigen::VectorXd integrate_reference(const ControlledOde& ode, const Eigen::VectorXd& x0, const Eigen::VectorXd& u,
                                    double duration, const ReferenceOptions& opts = {},
                                    ReferenceStats* stats = nullptr);

}  // namespace shotcheck
