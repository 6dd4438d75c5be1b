#pragma once

// 6-DOF rocket vector field, quaternion helpers and a type-erased
// controlled-ODE interface that every integrator and constraint consumes.
//
// State layout (14): [m, r_I(3), v_I(3), q(4, scalar-last), w_B(3)].
// Control (3): body-frame thrust T_B.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "shotcheck/ad.hpp"

namespace shotcheck {

inline constexpr std::size_t kStateDim = 14;
inline constexpr std::size_t kControlDim = 3;
inline constexpr std::size_t kMass = 0;
inline constexpr std::size_t kPos = 1;
inline constexpr std::size_t kVel = 4;
inline constexpr std::size_t kQuat = 7;
inline constexpr std::size_t kOmega = 11;

class NonFiniteState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RocketParams {
  double alpha_mdt = 0.01;
  double beta_mdt = 0.001;
  Eigen::Vector3d g_i{-1.0, 0.0, 0.0};
  Eigen::Matrix3d j_b = 0.01 * Eigen::Matrix3d::Identity();
  Eigen::Vector3d r_tb{-0.01, 0.0, 0.0};
  Eigen::Vector3d r_cpb{0.05, 0.0, 0.0};
  double rho = 1.0;
  double s_a = 0.5;
  Eigen::Matrix3d c_a = 0.5 * Eigen::Matrix3d::Identity();
  // Drag uses sqrt(|v|^2 + eps^2); eps > 0 removes the zero-airspeed kink
  // that makes high time derivatives unbounded.
  double speed_smoothing = 0.0;

  // Throws std::invalid_argument unless J_B is symmetric positive definite
  // and rho, S_A, speed_smoothing are nonnegative.
  void validate() const;
};

// Hamilton product under the scalar-last convention.
template <class T>
void quat_multiply(const T* p, const T* q, T* out) {
  out[0] = p[3] * q[0] + q[3] * p[0] + (p[1] * q[2] - p[2] * q[1]);
  out[1] = p[3] * q[1] + q[3] * p[1] + (p[2] * q[0] - p[0] * q[2]);
  out[2] = p[3] * q[2] + q[3] * p[2] + (p[0] * q[1] - p[1] * q[0]);
  out[3] = p[3] * q[3] - (p[0] * q[0] + p[1] * q[1] + p[2] * q[2]);
}

// Rotation body -> inertial, C_IB = C_BI^T, for q = [qx, qy, qz, qw].
template <class T>
void body_to_inertial(const T* q, T (&c)[3][3]) {
  const T& x = q[0];
  const T& y = q[1];
  const T& z = q[2];
  const T& w = q[3];
  c[0][0] = 1.0 - 2.0 * (y * y + z * z);
  c[0][1] = 2.0 * (x * y - w * z);
  c[0][2] = 2.0 * (x * z + w * y);
  c[1][0] = 2.0 * (x * y + w * z);
  c[1][1] = 1.0 - 2.0 * (x * x + z * z);
  c[1][2] = 2.0 * (y * z - w * x);
  c[2][0] = 2.0 * (x * z - w * y);
  c[2][1] = 2.0 * (y * z + w * x);
  c[2][2] = 1.0 - 2.0 * (x * x + y * y);
}

template <class T>
void rocket_rhs(const RocketParams& p, std::span<const T> x, std::span<const T> u, std::span<T> dx) {
  using std::sqrt;
  const T& m = x[kMass];
  const T* v = &x[kVel];
  const T* q = &x[kQuat];
  const T* w = &x[kOmega];

  const T thrust_norm = sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  dx[kMass] = -p.alpha_mdt * thrust_norm - p.beta_mdt;
  for (int i = 0; i < 3; ++i) dx[kPos + i] = v[i];

  T c_ib[3][3];
  body_to_inertial(q, c_ib);

  // Aerodynamic force in the body frame.
  T v_body[3];
  for (int i = 0; i < 3; ++i) v_body[i] = c_ib[0][i] * v[0] + c_ib[1][i] * v[1] + c_ib[2][i] * v[2];
  const T speed = sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + p.speed_smoothing * p.speed_smoothing);
  const T drag_gain = -0.5 * p.rho * p.s_a * speed;
  T aero[3];
  for (int i = 0; i < 3; ++i) {
    aero[i] = drag_gain * (p.c_a(i, 0) * v_body[0] + p.c_a(i, 1) * v_body[1] + p.c_a(i, 2) * v_body[2]);
  }

  T force[3];
  for (int i = 0; i < 3; ++i) force[i] = u[i] + aero[i];
  for (int i = 0; i < 3; ++i) {
    dx[kVel + i] = (c_ib[i][0] * force[0] + c_ib[i][1] * force[1] + c_ib[i][2] * force[2]) / m + p.g_i(i);
  }

  const T w_quat[4] = {w[0], w[1], w[2], T(0.0)};
  T qdot[4];
  quat_multiply(q, w_quat, qdot);
  for (int i = 0; i < 4; ++i) dx[kQuat + i] = 0.5 * qdot[i];

  T jw[3];
  for (int i = 0; i < 3; ++i) jw[i] = p.j_b(i, 0) * w[0] + p.j_b(i, 1) * w[1] + p.j_b(i, 2) * w[2];
  const Eigen::Vector3d& rt = p.r_tb;
  const Eigen::Vector3d& rc = p.r_cpb;
  T torque[3] = {
      (rt(1) * u[2] - rt(2) * u[1]) + (rc(1) * aero[2] - rc(2) * aero[1]) - (w[1] * jw[2] - w[2] * jw[1]),
      (rt(2) * u[0] - rt(0) * u[2]) + (rc(2) * aero[0] - rc(0) * aero[2]) - (w[2] * jw[0] - w[0] * jw[2]),
      (rt(0) * u[1] - rt(1) * u[0]) + (rc(0) * aero[1] - rc(1) * aero[0]) - (w[0] * jw[1] - w[1] * jw[0])};
  const Eigen::Matrix3d j_inv = p.j_b.inverse();
  for (int i = 0; i < 3; ++i) {
    dx[kOmega + i] = j_inv(i, 0) * torque[0] + j_inv(i, 1) * torque[1] + j_inv(i, 2) * torque[2];
  }
}

// Omega(w) with q (x) [w; 0] = Omega(w) q; skew-symmetric.
Eigen::Matrix4d quat_kinematics_matrix(const Eigen::Vector3d& w);

// Type-erased dx = f(x, u). Implementations must be deterministic and
// evaluate identically (up to the scalar type) for every overload.
#define SHOTCHECK_ODE_SCALARS(X) X(double) X(J1) X(J2) X(J3) X(J4) X(T0) X(TJ1) X(TJ2)

class ControlledOde {
 public:
  virtual ~ControlledOde() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t control_dim() const = 0;
  // Offset of a unit-quaternion block in the state, if the model has one.
  virtual std::optional<std::size_t> quaternion_offset() const { return std::nullopt; }

#define SHOTCHECK_DECLARE_EVAL(T) \
  virtual void eval(std::span<const T> x, std::span<const T> u, std::span<T> dx) const = 0;
  SHOTCHECK_ODE_SCALARS(SHOTCHECK_DECLARE_EVAL)
#undef SHOTCHECK_DECLARE_EVAL

  Eigen::VectorXd operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
};

using OdePtr = std::shared_ptr<const ControlledOde>;

template <class F>
class OdeModel final : public ControlledOde {
 public:
  OdeModel(std::size_t nx, std::size_t nu, F f, std::optional<std::size_t> quat)
      : nx_(nx), nu_(nu), f_(std::move(f)), quat_(quat) {}
  std::size_t state_dim() const override { return nx_; }
  std::size_t control_dim() const override { return nu_; }
  std::optional<std::size_t> quaternion_offset() const override { return quat_; }

#define SHOTCHECK_DEFINE_EVAL(T)                                                               \
  void eval(std::span<const T> x, std::span<const T> u, std::span<T> dx) const override { \
    f_(x, u, dx);                                                                              \
  }
  SHOTCHECK_ODE_SCALARS(SHOTCHECK_DEFINE_EVAL)
#undef SHOTCHECK_DEFINE_EVAL

 private:
  std::size_t nx_;
  std::size_t nu_;
  F f_;
  std::optional<std::size_t> quat_;
};

// `f` must be a generic callable (auto x, auto u, auto dx) valid for every
// scalar in SHOTCHECK_ODE_SCALARS.
template <class F>
OdePtr make_ode(std::size_t nx, std::size_t nu, F f, std::optional<std::size_t> quat = std::nullopt) {
  return std::make_shared<OdeModel<F>>(nx, nu, std::move(f), quat);
}

OdePtr make_rocket_ode(const RocketParams& params);

// Right-hand side s * f. Throws std::invalid_argument unless s > 0.
OdePtr scaled_ode(OdePtr ode, double s);

Eigen::MatrixXd jacobian_state(const ControlledOde& ode, const Eigen::VectorXd& x, const Eigen::VectorXd& u);
Eigen::MatrixXd jacobian_control(const ControlledOde& ode, const Eigen::VectorXd& x, const Eigen::VectorXd& u);

// Time derivatives x', x'', ..., x^(k) of the solution of dx/dt = scale * f(x, u)
// through x at fixed u, generated by Taylor-series arithmetic (1 <= k <= 5).
// Works for S = double, J1, J2 so the chain itself can be differentiated.
template <class S>
std::vector<std::vector<S>> time_derivative_chain(const ControlledOde& ode, std::span<const S> x,
                                                  std::span<const S> u, const S& scale, int k) {
  using TS = Taylor<S>;
  const std::size_t n = ode.state_dim();
  std::vector<TS> xs(n);
  std::vector<TS> us(u.size());
  std::vector<TS> fx(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = TS(x[i]);
  for (std::size_t i = 0; i < u.size(); ++i) us[i] = TS(u[i]);
  for (int j = 0; j < k; ++j) {
    ode.eval(std::span<const TS>(xs), std::span<const TS>(us), std::span<TS>(fx));
    for (std::size_t i = 0; i < n; ++i) xs[i].c[j + 1] = scale * fx[i].c[j] * (1.0 / (j + 1));
  }
  std::vector<std::vector<S>> out(static_cast<std::size_t>(k), std::vector<S>(n));
  double fact = 1.0;
  for (int j = 1; j <= k; ++j) {
    fact *= j;
    for (std::size_t i = 0; i < n; ++i) out[j - 1][i] = xs[i].c[j] * fact;
  }
  return out;
}

// [x^(1), ..., x^(k)] at (x, u) for the unscaled field. Throws
// std::invalid_argument unless 1 <= k <= 5, NonFiniteState on overflow.
std::vector<Eigen::VectorXd> state_time_derivatives(const ControlledOde& ode, const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& u, int k);

// k-th derivative of f in x applied to k directions: f^(k)(x)[d_1, ..., d_k]
// (0 <= k <= 4; k = 0 returns f(x, u)).
Eigen::VectorXd directional_derivative(const ControlledOde& ode, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& u, const std::vector<Eigen::VectorXd>& dirs);

}  // namespace shotcheck
