#pragma once

// One-step maps x_{k+1} = Psi_h(x_k, u_k, s, Y_k) for the fourteen
// transcription methods, BDF mesh defects and the quaternion projection.
//
// Each interval relation is written once as a residual template over the
// scalar type. The same code drives the Newton stage solver here and the
// NLP constraint blocks in the transcription.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "shotcheck/dynamics.hpp"
#include "shotcheck/tableau.hpp"

namespace shotcheck {

class NewtonDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DegenerateQuaternion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class InsufficientHistory : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class UnsupportedCombination : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class MapKind {
  explicit_rk,  // closed-form stage recursion
  lifted_rk,    // implicit RK in stage-value form, stages are NLP variables
  trapezoid,    // z = x + hs/2 (f(x) + f(z))
  midpoint,     // z = x + hs f((x + z)/2)
  avf,          // z = x + hs sum_q w_q f((1 - xi_q) x + xi_q z)
  tr_bdf2,      // trapezoidal substage to x_gamma (lifted), then BDF2
  bdf,          // k-step BDF over mesh nodes
};

struct OneStepMap {
  std::string name;
  std::string label;   // human-readable method name
  MapKind kind = MapKind::explicit_rk;
  int order = 1;
  int stages = 1;      // nominal stage count
  bool implicit = false;
  bool symplectic = false;
  std::optional<ButcherTableau> tableau;  // explicit_rk, lifted_rk
  Eigen::VectorXd nodes;    // quadrature abscissae (avf) or stage abscissae
  Eigen::VectorXd weights;  // quadrature weights (avf)
  int bdf_steps = 0;        // bdf
  std::string startup;      // bdf: method used for the first bdf_steps - 1 intervals

  // Number of n_x-sized blocks per interval that become NLP variables.
  int lifted_blocks() const;
  bool stage_lifting() const { return lifted_blocks() > 0; }
  // Whether the map supports the q/|q| projection wrapper.
  bool supports_projection() const { return kind != MapKind::bdf; }
};

// Registry in the fixed reporting order: bdf4, bdf6, trapezoidal, rk38, rk4,
// rk5, rk6, avf2, avf3, gl1, trbdf2, gl2, lobatto3a, gl3.
const OneStepMap& method(std::string_view name);
bool has_method(std::string_view name);
const std::vector<std::string>& method_names();

inline constexpr double kNewtonTol = 1e-12;
inline constexpr int kNewtonMaxIter = 50;
inline constexpr double kDegenerateQuatNorm = 1e-8;

namespace detail {

template <class T>
void eval_f(const ControlledOde& ode, const T* x, std::span<const T> u, T* out) {
  const std::size_t n = ode.state_dim();
  ode.eval(std::span<const T>(x, n), u, std::span<T>(out, n));
}

template <class T>
void project_quaternion(const ControlledOde& ode, T* x) {
  using std::sqrt;
  const auto off = ode.quaternion_offset();
  if (!off) throw UnsupportedCombination("projection requires a model with a quaternion block");
  T* q = x + *off;
  const T norm = sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (!(primal(norm) > kDegenerateQuatNorm)) throw DegenerateQuaternion("quaternion norm collapsed before projection");
  for (int i = 0; i < 4; ++i) q[i] = q[i] / norm;
}

}  // namespace detail

// Closed-form explicit RK update. `stages_out`, if non-null, receives the
// stage states row by row (stages * n_x).
template <class T>
void explicit_rk_map(const ButcherTableau& tab, const ControlledOde& ode, double h, std::span<const T> x,
                     std::span<const T> u, const T& s, std::span<T> x_next, T* stages_out = nullptr) {
  const std::size_t n = ode.state_dim();
  const std::size_t m = tab.stages();
  std::vector<T> k(m * n);
  std::vector<T> y(n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t a = 0; a < n; ++a) {
      T acc = x[a];
      for (std::size_t j = 0; j < i; ++j) {
        const double aij = tab.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (aij != 0.0) acc += (h * aij) * (s * k[j * n + a]);
      }
      y[a] = acc;
    }
    if (stages_out) std::copy(y.begin(), y.end(), stages_out + i * n);
    detail::eval_f(ode, y.data(), u, k.data() + i * n);
  }
  for (std::size_t a = 0; a < n; ++a) {
    T acc = x[a];
    for (std::size_t i = 0; i < m; ++i) {
      const double bi = tab.b(static_cast<Eigen::Index>(i));
      if (bi != 0.0) acc += (h * bi) * (s * k[i * n + a]);
    }
    x_next[a] = acc;
  }
}

// Interval residual for every one-step kind. Unknown layout per interval:
// w = [W (lifted_blocks * n_x), z (n_x)] where z = x_{k+1}. The output holds
// the lifted-block equations first, then the defect; (lifted_blocks + 1) * n_x
// rows in total. With `project`, the defect compares z against P(Psi).
template <class T>
void interval_residual(const OneStepMap& map, const ControlledOde& ode, double h, std::span<const T> x,
                       std::span<const T> u, const T& s, std::span<const T> w, std::span<T> out,
                       bool project = false) {
  const std::size_t n = ode.state_dim();
  const std::size_t nl = static_cast<std::size_t>(map.lifted_blocks());
  const T* z = w.data() + nl * n;
  T* defect = out.data() + nl * n;
  if (project && !map.supports_projection()) {
    throw UnsupportedCombination("projection is not defined for method '" + map.name + "'");
  }
  std::vector<T> psi(n);
  switch (map.kind) {
    case MapKind::explicit_rk: {
      explicit_rk_map<T>(*map.tableau, ode, h, x, u, s, std::span<T>(psi));
      break;
    }
    case MapKind::lifted_rk: {
      const ButcherTableau& tab = *map.tableau;
      const std::size_t m = tab.stages();
      std::vector<T> f(m * n);
      for (std::size_t j = 0; j < m; ++j) detail::eval_f(ode, w.data() + j * n, u, f.data() + j * n);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t a = 0; a < n; ++a) {
          T acc = w[i * n + a] - x[a];
          for (std::size_t j = 0; j < m; ++j) {
            const double aij = tab.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (aij != 0.0) acc -= (h * aij) * (s * f[j * n + a]);
          }
          out[i * n + a] = acc;
        }
      }
      for (std::size_t a = 0; a < n; ++a) {
        T acc = x[a];
        for (std::size_t j = 0; j < m; ++j) {
          const double bj = tab.b(static_cast<Eigen::Index>(j));
          if (bj != 0.0) acc += (h * bj) * (s * f[j * n + a]);
        }
        psi[a] = acc;
      }
      break;
    }
    case MapKind::trapezoid: {
      std::vector<T> fx(n);
      std::vector<T> fz(n);
      detail::eval_f(ode, x.data(), u, fx.data());
      detail::eval_f(ode, z, u, fz.data());
      for (std::size_t a = 0; a < n; ++a) psi[a] = x[a] + (0.5 * h) * (s * (fx[a] + fz[a]));
      break;
    }
    case MapKind::midpoint: {
      std::vector<T> mid(n);
      std::vector<T> fm(n);
      for (std::size_t a = 0; a < n; ++a) mid[a] = 0.5 * (x[a] + z[a]);
      detail::eval_f(ode, mid.data(), u, fm.data());
      for (std::size_t a = 0; a < n; ++a) psi[a] = x[a] + h * (s * fm[a]);
      break;
    }
    case MapKind::avf: {
      std::vector<T> y(n);
      std::vector<T> fy(n);
      std::vector<T> avg(n, T(0.0));
      for (Eigen::Index q = 0; q < map.nodes.size(); ++q) {
        const double xi = map.nodes(q);
        for (std::size_t a = 0; a < n; ++a) y[a] = (1.0 - xi) * x[a] + xi * z[a];
        detail::eval_f(ode, y.data(), u, fy.data());
        for (std::size_t a = 0; a < n; ++a) avg[a] += map.weights(q) * fy[a];
      }
      for (std::size_t a = 0; a < n; ++a) psi[a] = x[a] + h * (s * avg[a]);
      break;
    }
    case MapKind::tr_bdf2: {
      const double gamma = 2.0 - std::sqrt(2.0);
      const T* xg = w.data();
      std::vector<T> fx(n);
      std::vector<T> fg(n);
      std::vector<T> fz(n);
      detail::eval_f(ode, x.data(), u, fx.data());
      detail::eval_f(ode, xg, u, fg.data());
      detail::eval_f(ode, z, u, fz.data());
      for (std::size_t a = 0; a < n; ++a) out[a] = xg[a] - x[a] - (0.5 * gamma * h) * (s * (fx[a] + fg[a]));
      const double den = gamma * (2.0 - gamma);
      const double c_g = 1.0 / den;
      const double c_x = (1.0 - gamma) * (1.0 - gamma) / den;
      const double c_f = (1.0 - gamma) / (2.0 - gamma);
      for (std::size_t a = 0; a < n; ++a) psi[a] = c_g * xg[a] - c_x * x[a] + (c_f * h) * (s * fz[a]);
      break;
    }
    case MapKind::bdf:
      throw UnsupportedCombination("BDF defects need mesh history; use bdf_residual");
  }
  if (project) detail::project_quaternion(ode, psi.data());
  for (std::size_t a = 0; a < n; ++a) defect[a] = z[a] - psi[a];
}

// BDF-k coefficients alpha_0..alpha_k for sum_j alpha_j x_{n+1-j} = h s f(x_{n+1}).
std::span<const double> bdf_coefficients(int k);

// BDF defect alpha_0 z + sum_j alpha_j x_{n+1-j} - h s f(z, u). `history`
// holds k states in chronological order (oldest first), flattened.
template <class T>
void bdf_residual(int k, const ControlledOde& ode, double h, std::span<const T> history, std::span<const T> u,
                  const T& s, std::span<const T> z, std::span<T> out) {
  const std::size_t n = ode.state_dim();
  if (history.size() != static_cast<std::size_t>(k) * n) {
    throw InsufficientHistory("BDF" + std::to_string(k) + " needs exactly " + std::to_string(k) + " prior states");
  }
  const auto alpha = bdf_coefficients(k);
  std::vector<T> fz(n);
  detail::eval_f(ode, z.data(), u, fz.data());
  for (std::size_t a = 0; a < n; ++a) {
    T acc = alpha[0] * z[a];
    for (int j = 1; j <= k; ++j) {
      acc += alpha[static_cast<std::size_t>(j)] * history[static_cast<std::size_t>(k - j) * n + a];
    }
    out[a] = acc - h * (s * fz[a]);
  }
}

struct StepResult {
  Eigen::VectorXd x_next;
  Eigen::MatrixXd stages;  // one stage state per row
  Eigen::VectorXd lifted;  // lifted NLP block values (empty for non-lifted maps)
  int newton_iterations = 0;
  double residual = 0.0;   // final stage-equation residual, inf-norm
};

// Solves F(w) = 0 by full Newton with forward-mode Jacobians.
struct NewtonReport {
  int iterations = 0;
  double residual = 0.0;
};
using ResidualFn = std::function<void(std::span<const J1>, std::span<J1>)>;
NewtonReport newton_solve(const ResidualFn& residual, Eigen::VectorXd& w, double tol = kNewtonTol,
                          int max_iter = kNewtonMaxIter);

StepResult step(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x,
                const Eigen::VectorXd& u, double h, double s);

// step followed by q <- q/|q|. Throws DegenerateQuaternion when |q| <= 1e-8
// and UnsupportedCombination for multistep maps.
StepResult step_projected(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, double h, double s);

Eigen::VectorXd bdf_defect(int k, const ControlledOde& ode, const std::vector<Eigen::VectorXd>& history,
                           const Eigen::VectorXd& u, double h, double s, const Eigen::VectorXd& x_next);

// One BDF step: solves the defect for x_{n+1} given exact history.
StepResult bdf_step(int k, const ControlledOde& ode, const std::vector<Eigen::VectorXd>& history,
                    const Eigen::VectorXd& u, double h, double s);

StepResult avf_step(int stages, const ControlledOde& ode, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                    double h, double s);

struct Propagation {
  std::vector<Eigen::VectorXd> nodes;   // N states
  std::vector<Eigen::VectorXd> lifted;  // per interval, empty for non-lifted maps
  std::vector<int> newton_iterations;
};

// Steps the map through a ZOH control sequence (U has one column per
// interval); BDF maps use their startup method for the first k - 1 intervals.
Propagation propagate(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x0,
                      const Eigen::MatrixXd& u, double h, double s, bool project = false);

}  // namespace shotcheck
