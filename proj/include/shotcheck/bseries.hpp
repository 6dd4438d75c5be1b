#pragma once

// Order-5 B-series principal error of Runge-Kutta one-step maps.
//
// For an autonomous field (ZOH control and fixed s make every interval
// autonomous) the one-step gap of an order-4 method is
//   delta = Phi_h - Psi_h = (hs)^5 sum_{r(t)=5} (1/sigma(t)) (1/gamma(t) - Phi(t)) F(t)(x) + O(h^6).

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shotcheck/dynamics.hpp"
#include "shotcheck/tableau.hpp"
#include "shotcheck/trees.hpp"

namespace shotcheck {

class NonFiniteDerivativeChain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// F(t)(x): F(leaf) = f, F([t1..tk]) = f^(k)(x)[F(t1), ..., F(tk)]. Supports
// trees whose nodes have at most four children (every tree up to order 5).
Eigen::VectorXd elementary_differential(const ControlledOde& ode, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u, const RootedTree& t);

struct PrincipalErrorTerm {
  std::string tree_id;
  double sigma = 1.0;
  double gamma = 1.0;
  double phi = 0.0;
  double residual = 0.0;      // 1/gamma - Phi
  double f_norm = 0.0;        // |F(t)(x)|_2 for the scaled field
  Eigen::VectorXd contribution;
};

struct PrincipalError {
  Eigen::VectorXd estimate;
  std::vector<PrincipalErrorTerm> terms;  // one per order-5 tree, canonical order
};

// Principal h^5 term of the one-step error for dx/dtau = s f(x, u).
// Throws std::invalid_argument if tab.order < 4.
PrincipalError principal_error(const ButcherTableau& tab, const ControlledOde& ode, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u, double h, double s);

Eigen::VectorXd principal_error_estimate(const ButcherTableau& tab, const ControlledOde& ode,
                                         const Eigen::VectorXd& x, const Eigen::VectorXd& u, double h, double s);

}  // namespace shotcheck
