#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace shotcheck {

// Runge-Kutta coefficient scheme (A, b, c). Immutable once validated.
struct ButcherTableau {
  std::string name;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  int order = 1;

  std::size_t stages() const { return static_cast<std::size_t>(b.size()); }
  // True iff A is strictly lower triangular.
  bool is_explicit() const;
  // Throws std::invalid_argument when shapes, row sums (c_i = sum_j a_ij)
  // or the quadrature sum (sum b_i = 1) are off by more than 1e-12.
  void validate() const;
};

struct SymplecticityResidual {
  Eigen::MatrixXd s;  // s(i,j) = b_i a_ij + b_j a_ji - b_i b_j
  double max_abs = 0.0;
};

SymplecticityResidual symplecticity_residual(const ButcherTableau& tab);

inline constexpr double kSymplecticTolerance = 1e-12;
bool is_symplectic(const ButcherTableau& tab, double tol = kSymplecticTolerance);

struct OrderConditionResidual {
  std::string tree_id;
  int order = 0;
  double residual = 0.0;  // Phi(t) - 1/gamma(t)
};

// Residuals for every rooted tree with order <= up_to_order (1..7).
std::vector<OrderConditionResidual> verify_order_conditions(const ButcherTableau& tab, int up_to_order);

// True iff every residual with tree order <= p is below tol.
bool satisfies_order(const ButcherTableau& tab, int p, double tol = 1e-12);

// Registry keyed by method name ("rk4", "gl2", "lobatto3a", ...).
const ButcherTableau& tableau(std::string_view name);
bool has_tableau(std::string_view name);
std::vector<std::string> tableau_names();

nlohmann::json tableau_to_json(const ButcherTableau& tab);
ButcherTableau tableau_from_json(const nlohmann::json& doc);

}  // namespace shotcheck
