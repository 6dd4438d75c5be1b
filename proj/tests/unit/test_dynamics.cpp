#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "shotcheck/dynamics.hpp"
#include "support.hpp"

using namespace shotcheck;
using Catch::Approx;
using testing_support::fd_jacobian;
using testing_support::Gen;
using testing_support::max_rel_error;

namespace {

Eigen::Matrix3d rotation_from(const Eigen::Vector4d& q) {
  double c[3][3];
  body_to_inertial(q.data(), c);
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = c[i][j];
  }
  return m;
}

}  // namespace

TEST_CASE("body-to-inertial matrix is a proper rotation and agrees with Eigen") {
  Gen gen(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector4d q = gen.unit_quaternion();
    const Eigen::Matrix3d c = rotation_from(q);
    CHECK((c * c.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
    CHECK(c.determinant() == Approx(1.0));
    const Eigen::Quaterniond eq(q(3), q(0), q(1), q(2));
    CHECK((c - eq.toRotationMatrix()).norm() < 1e-14);
  }
}

TEST_CASE("Hamilton product agrees with Eigen and composes rotations") {
  Gen gen(32);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector4d p = gen.unit_quaternion();
    const Eigen::Vector4d q = gen.unit_quaternion();
    Eigen::Vector4d pq;
    quat_multiply(p.data(), q.data(), pq.data());
    const Eigen::Quaterniond ep(p(3), p(0), p(1), p(2));
    const Eigen::Quaterniond eq(q(3), q(0), q(1), q(2));
    const Eigen::Quaterniond e = ep * eq;
    CHECK(std::abs(pq(0) - e.x()) < 1e-15);
    CHECK(std::abs(pq(3) - e.w()) < 1e-15);
    CHECK((rotation_from(pq) - rotation_from(p) * rotation_from(q)).norm() < 1e-14);
  }
}

TEST_CASE("quaternion kinematics matrix is skew and matches the product form") {
  Gen gen(33);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector3d w = gen.vector(3, -2.0, 2.0);
    const Eigen::Matrix4d om = quat_kinematics_matrix(w);
    CHECK((om + om.transpose()).norm() < 1e-15);
    const Eigen::Vector4d q = gen.unit_quaternion();
    const Eigen::Vector4d wq(w(0), w(1), w(2), 0.0);
    Eigen::Vector4d prod;
    quat_multiply(q.data(), wq.data(), prod.data());
    CHECK((om * q - prod).norm() < 1e-14);
  }
}

TEST_CASE("rocket field in free flight") {
  const RocketParams p;
  const auto ode = make_rocket_ode(p);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(14);
  x(kMass) = 2.0;
  x(kQuat + 3) = 1.0;
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd dx = (*ode)(x, u);
  CHECK(dx(kMass) == Approx(-p.beta_mdt));
  CHECK(dx(kVel) == Approx(p.g_i(0)));
  CHECK(dx.segment<3>(kPos).norm() == 0.0);
  CHECK(dx.segment<4>(kQuat).norm() == 0.0);
  CHECK(dx.segment<3>(kOmega).norm() == 0.0);
}

TEST_CASE("thrust along the body axis at identity attitude") {
  const RocketParams p;
  const auto ode = make_rocket_ode(p);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(14);
  x(kMass) = 1.5;
  x(kQuat + 3) = 1.0;
  Eigen::VectorXd u(3);
  u << 3.0, 0.4, 0.0;
  const Eigen::VectorXd dx = (*ode)(x, u);
  CHECK(dx(kMass) == Approx(-p.alpha_mdt * std::hypot(3.0, 0.4) - p.beta_mdt));
  CHECK(dx(kVel) == Approx(3.0 / 1.5 - 1.0));
  CHECK(dx(kVel + 1) == Approx(0.4 / 1.5));
  // r_TB x T with r_TB = (-0.01, 0, 0): torque z = -0.01 * 0.4.
  CHECK(dx(kOmega + 2) == Approx(-0.01 * 0.4 / 0.01));
}

TEST_CASE("drag opposes the velocity at identity attitude") {
  const RocketParams p;
  const auto ode = make_rocket_ode(p);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(14);
  x(kMass) = 1.0;
  x(kQuat + 3) = 1.0;
  x(kVel + 1) = 2.0;
  const Eigen::VectorXd dx = (*ode)(x, Eigen::VectorXd::Zero(3));
  // A = -1/2 rho S_A |v| C_A v = -0.5 * 1 * 0.5 * 2 * 0.5 * 2 = -0.5 along y.
  CHECK(dx(kVel + 1) == Approx(-0.5));
}

TEST_CASE("quaternion norm is a first integral of the kinematics") {
  Gen gen(34);
  const auto ode = make_rocket_ode(RocketParams{});
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd x = gen.rocket_state();
    const Eigen::VectorXd dx = (*ode)(x, gen.thrust());
    CHECK(std::abs(x.segment<4>(kQuat).dot(dx.segment<4>(kQuat))) < 1e-15);
  }
}

TEST_CASE("forward-mode Jacobians match central differences") {
  Gen gen(35);
  const auto ode = make_rocket_ode(RocketParams{});
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::VectorXd x = gen.rocket_state();
    const Eigen::VectorXd u = gen.thrust();
    const Eigen::MatrixXd jx = jacobian_state(*ode, x, u);
    const Eigen::MatrixXd ju = jacobian_control(*ode, x, u);
    const Eigen::MatrixXd fx = fd_jacobian([&](const Eigen::VectorXd& y) { return Eigen::VectorXd((*ode)(y, u)); }, x);
    const Eigen::MatrixXd fu = fd_jacobian([&](const Eigen::VectorXd& v) { return Eigen::VectorXd((*ode)(x, v)); }, u);
    CHECK(max_rel_error(jx, fx) < 1e-7);
    CHECK(max_rel_error(ju, fu) < 1e-7);
  }
}

TEST_CASE("time-derivative chain: x'' = J f and x''' = f''[f, f] + J x''") {
  Gen gen(36);
  const auto ode = make_rocket_ode(RocketParams{});
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = gen.rocket_state();
    const Eigen::VectorXd u = gen.thrust();
    const auto d = state_time_derivatives(*ode, x, u, 3);
    const Eigen::VectorXd f = (*ode)(x, u);
    const Eigen::MatrixXd jx = jacobian_state(*ode, x, u);
    CHECK((d[0] - f).norm() < 1e-13);
    CHECK((d[1] - jx * f).norm() < 1e-12 * std::max(1.0, d[1].norm()));
    const Eigen::VectorXd x3 = directional_derivative(*ode, x, u, {f, f}) + jx * d[1];
    CHECK((d[2] - x3).norm() < 1e-11 * std::max(1.0, d[2].norm()));
  }
}

TEST_CASE("directional derivatives are symmetric and match differences of the Jacobian") {
  Gen gen(37);
  const auto ode = make_rocket_ode(RocketParams{});
  const Eigen::VectorXd x = gen.rocket_state();
  const Eigen::VectorXd u = gen.thrust();
  const Eigen::VectorXd a = gen.vector(14, -1.0, 1.0);
  const Eigen::VectorXd b = gen.vector(14, -1.0, 1.0);
  const Eigen::VectorXd ab = directional_derivative(*ode, x, u, {a, b});
  const Eigen::VectorXd ba = directional_derivative(*ode, x, u, {b, a});
  CHECK((ab - ba).norm() < 1e-12);
  const double h = 1e-5;
  const Eigen::VectorXd fd =
      (jacobian_state(*ode, x + h * b, u) * a - jacobian_state(*ode, x - h * b, u) * a) / (2.0 * h);
  CHECK((ab - fd).norm() < 1e-6 * std::max(1.0, ab.norm()));
  CHECK((directional_derivative(*ode, x, u, {}) - (*ode)(x, u)).norm() == 0.0);
}

TEST_CASE("scaled field multiplies by s and rejects non-positive s") {
  const auto ode = make_rocket_ode(RocketParams{});
  Gen gen(38);
  const Eigen::VectorXd x = gen.rocket_state();
  const Eigen::VectorXd u = gen.thrust();
  const auto scaled = scaled_ode(ode, 3.5);
  CHECK(((*scaled)(x, u) - 3.5 * (*ode)(x, u)).norm() < 1e-14);
  CHECK_THROWS_AS(scaled_ode(ode, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(state_time_derivatives(*ode, x, u, 6), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  RocketParams p;
  CHECK_NOTHROW(p.validate());
  p.j_b(0, 1) = 0.001;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = RocketParams{};
  p.j_b(2, 2) = -0.01;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = RocketParams{};
  p.rho = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
