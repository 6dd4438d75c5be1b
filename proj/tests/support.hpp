#pragma once

// Shared generators and finite-difference helpers for the test suites.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "shotcheck/dynamics.hpp"

namespace testing_support {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Eigen::VectorXd vector(Eigen::Index n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  Eigen::Vector4d unit_quaternion() {
    Eigen::Vector4d q;
    for (int i = 0; i < 4; ++i) q(i) = normal();
    return q / q.norm();
  }

  // A state inside the flight envelope: positive mass, moderate speed and
  // rates, unit attitude.
  Eigen::VectorXd rocket_state() {
    Eigen::VectorXd x(shotcheck::kStateDim);
    x(shotcheck::kMass) = uniform(1.1, 2.0);
    for (int i = 0; i < 3; ++i) {
      x(shotcheck::kPos + i) = uniform(-4.0, 4.0);
      x(shotcheck::kVel + i) = uniform(-2.0, 2.0);
      x(shotcheck::kOmega + i) = uniform(-0.5, 0.5);
    }
    x.segment<4>(shotcheck::kQuat) = unit_quaternion();
    return x;
  }

  Eigen::VectorXd thrust() {
    Eigen::VectorXd u(3);
    u << uniform(1.0, 4.0), uniform(-0.5, 0.5), uniform(-0.5, 0.5);
    return u;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Central-difference gradient of a scalar function with a relative step.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double rel = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel * std::max(1.0, std::abs(x(i)));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Central-difference Jacobian of a vector function.
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double rel = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel * std::max(1.0, std::abs(x(i)));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(i) += h;
    xm(i) -= h;
    jac.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

// |a - b| / max(1, |b|) entrywise maximum.
inline double max_rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(1.0, std::abs(b(i, j))));
    }
  }
  return worst;
}

}  // namespace testing_support
