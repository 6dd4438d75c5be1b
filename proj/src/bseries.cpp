#include "shotcheck/bseries.hpp"

#include <cmath>

namespace shotcheck {
namespace {

// Elementary differentials for every table entry up to `max_order`, so
// shared subtrees are evaluated once.
std::vector<Eigen::VectorXd> differentials_up_to(const ControlledOde& ode, const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& u, int max_order) {
  const auto& table = tree_table();
  std::vector<Eigen::VectorXd> f;
  for (const auto& t : table) {
    if (t.order > max_order) break;
    std::vector<Eigen::VectorXd> dirs;
    dirs.reserve(t.children.size());
    for (std::size_t c : t.children) dirs.push_back(f[c]);
    if (dirs.size() > 4) throw std::invalid_argument("elementary differential needs more than four derivative levels");
    Eigen::VectorXd v = directional_derivative(ode, x, u, dirs);
    if (!v.allFinite()) throw NonFiniteDerivativeChain("non-finite elementary differential for tree " + t.id);
    f.push_back(std::move(v));
  }
  return f;
}

}  // namespace

Eigen::VectorXd elementary_differential(const ControlledOde& ode, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u, const RootedTree& t) {
  if (t.order > 5) throw std::invalid_argument("elementary differentials are supported up to order 5");
  return differentials_up_to(ode, x, u, t.order)[t.index];
}

PrincipalError principal_error(const ButcherTableau& tab, const ControlledOde& ode, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u, double h, double s) {
  if (tab.order < 4) {
    throw std::invalid_argument("principal order-5 term needs a method of order >= 4, '" + tab.name + "' has order " +
                                std::to_string(tab.order));
  }
  const auto diffs = differentials_up_to(ode, x, u, 5);
  const double hs5 = std::pow(h * s, 5);
  PrincipalError out;
  out.estimate = Eigen::VectorXd::Zero(x.size());
  for (const auto& t : enumerate_trees(5)) {
    PrincipalErrorTerm term;
    term.tree_id = t.id;
    term.sigma = t.symmetry;
    term.gamma = t.density;
    term.phi = elementary_weight(tab.a, tab.b, t);
    term.residual = 1.0 / t.density - term.phi;
    term.f_norm = std::pow(s, 5) * diffs[t.index].norm();
    term.contribution = (hs5 * term.residual / t.symmetry) * diffs[t.index];
    out.estimate += term.contribution;
    out.terms.push_back(std::move(term));
  }
  return out;
}

Eigen::VectorXd principal_error_estimate(const ButcherTableau& tab, const ControlledOde& ode,
                                         const Eigen::VectorXd& x, const Eigen::VectorXd& u, double h, double s) {
  return principal_error(tab, ode, x, u, h, s).estimate;
}

}  // namespace shotcheck
