#include "shotcheck/dynamics.hpp"

#include <cmath>
#include <string>

namespace shotcheck {

void RocketParams::validate() const {
  if (!(rho >= 0.0) || !(s_a >= 0.0) || !(speed_smoothing >= 0.0)) {
    throw std::invalid_argument("rocket params: rho, S_A and speed_smoothing must be >= 0");
  }
  if ((j_b - j_b.transpose()).cwiseAbs().maxCoeff() > 1e-12 * j_b.cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("rocket params: J_B must be symmetric");
  }
  Eigen::LLT<Eigen::Matrix3d> llt(j_b);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("rocket params: J_B must be positive definite");
}

Eigen::Matrix4d quat_kinematics_matrix(const Eigen::Vector3d& w) {
  Eigen::Matrix4d om;
  // clang-format off
  om <<  0.0,   w(2), -w(1), w(0),
        -w(2),  0.0,   w(0), w(1),
         w(1), -w(0),  0.0,  w(2),
        -w(0), -w(1), -w(2), 0.0;
  // clang-format on
  return om;
}

Eigen::VectorXd ControlledOde::operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  Eigen::VectorXd dx(static_cast<Eigen::Index>(state_dim()));
  eval(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
       std::span<const double>(u.data(), static_cast<std::size_t>(u.size())),
       std::span<double>(dx.data(), static_cast<std::size_t>(dx.size())));
  return dx;
}

OdePtr make_rocket_ode(const RocketParams& params) {
  params.validate();
  return make_ode(
      kStateDim, kControlDim,
      [params](auto x, auto u, auto dx) {
        using T = std::remove_cv_t<typename decltype(x)::element_type>;
        rocket_rhs<T>(params, x, u, dx);
      },
      kQuat);
}

namespace {

class ScaledOde final : public ControlledOde {
 public:
  ScaledOde(OdePtr inner, double s) : inner_(std::move(inner)), s_(s) {}
  std::size_t state_dim() const override { return inner_->state_dim(); }
  std::size_t control_dim() const override { return inner_->control_dim(); }
  std::optional<std::size_t> quaternion_offset() const override { return inner_->quaternion_offset(); }

#define SHOTCHECK_SCALED_EVAL(T)                                                               \
  void eval(std::span<const T> x, std::span<const T> u, std::span<T> dx) const override { \
    inner_->eval(x, u, dx);                                                                    \
    if (s_ != 1.0) {                                                                           \
      for (auto& v : dx) v = v * s_;                                                           \
    }                                                                                          \
  }
  SHOTCHECK_ODE_SCALARS(SHOTCHECK_SCALED_EVAL)
#undef SHOTCHECK_SCALED_EVAL

 private:
  OdePtr inner_;
  double s_;
};

template <class S>
Eigen::MatrixXd jacobian_impl(const ControlledOde& ode, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                              bool wrt_state) {
  const std::size_t nx = ode.state_dim();
  const std::size_t nu = ode.control_dim();
  const std::size_t ncols = wrt_state ? nx : nu;
  std::vector<J1> xs(nx);
  std::vector<J1> us(nu);
  std::vector<J1> out(nx);
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ncols));
  for (std::size_t col = 0; col < ncols; ++col) {
    for (std::size_t i = 0; i < nx; ++i) xs[i] = J1(x(i), (wrt_state && i == col) ? 1.0 : 0.0);
    for (std::size_t i = 0; i < nu; ++i) us[i] = J1(u(i), (!wrt_state && i == col) ? 1.0 : 0.0);
    ode.eval(std::span<const J1>(xs), std::span<const J1>(us), std::span<J1>(out));
    for (std::size_t i = 0; i < nx; ++i) jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = out[i].d;
  }
  return jac;
}

template <class T>
Eigen::VectorXd mixed(const ControlledOde& ode, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                      const std::vector<Eigen::VectorXd>& dirs) {
  const std::size_t nx = ode.state_dim();
  const std::size_t nu = ode.control_dim();
  constexpr int depth = dual_depth<T>::value;
  std::vector<T> xs(nx);
  std::vector<T> us(nu);
  std::vector<T> out(nx);
  double seeds[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < nx; ++i) {
    for (int l = 0; l < depth; ++l) seeds[l] = dirs[static_cast<std::size_t>(l)](static_cast<Eigen::Index>(i));
    xs[i] = lift<T>(x(static_cast<Eigen::Index>(i)), seeds);
  }
  for (std::size_t i = 0; i < nu; ++i) us[i] = T(u(static_cast<Eigen::Index>(i)));
  ode.eval(std::span<const T>(xs), std::span<const T>(us), std::span<T>(out));
  Eigen::VectorXd r(static_cast<Eigen::Index>(nx));
  for (std::size_t i = 0; i < nx; ++i) r(static_cast<Eigen::Index>(i)) = mixed_part(out[i]);
  return r;
}

}  // namespace

OdePtr scaled_ode(OdePtr ode, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("time dilation must be positive");
  return std::make_shared<ScaledOde>(std::move(ode), s);
}

Eigen::MatrixXd jacobian_state(const ControlledOde& ode, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  return jacobian_impl<J1>(ode, x, u, true);
}

Eigen::MatrixXd jacobian_control(const ControlledOde& ode, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  return jacobian_impl<J1>(ode, x, u, false);
}

std::vector<Eigen::VectorXd> state_time_derivatives(const ControlledOde& ode, const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& u, int k) {
  if (k < 1 || k > static_cast<int>(T0::kDegree)) {
    throw std::invalid_argument("derivative order must lie in [1, 5], got " + std::to_string(k));
  }
  auto chain = time_derivative_chain<double>(
      ode, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
      std::span<const double>(u.data(), static_cast<std::size_t>(u.size())), 1.0, k);
  std::vector<Eigen::VectorXd> out;
  out.reserve(chain.size());
  for (auto& d : chain) {
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
    if (!v.allFinite()) throw NonFiniteState("non-finite value in time-derivative chain");
    out.push_back(std::move(v));
  }
  return out;
}

Eigen::VectorXd directional_derivative(const ControlledOde& ode, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& u, const std::vector<Eigen::VectorXd>& dirs) {
  switch (dirs.size()) {
    case 0: return ode(x, u);
    case 1: return mixed<J1>(ode, x, u, dirs);
    case 2: return mixed<J2>(ode, x, u, dirs);
    case 3: return mixed<J3>(ode, x, u, dirs);
    case 4: return mixed<J4>(ode, x, u, dirs);
    default: throw std::invalid_argument("directional derivatives supported up to order 4");
  }
}

}  // namespace shotcheck
