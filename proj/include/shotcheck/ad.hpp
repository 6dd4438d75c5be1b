#pragma once

// Forward-mode automatic differentiation scalars.
//
// Dual<T> carries one directional derivative; nesting Dual<Dual<double>>
// gives mixed second derivatives, and so on up to the depth needed for
// elementary differentials. Taylor<T> is a truncated univariate power
// series used to generate time-derivative chains of an ODE solution.
//
// Every dynamics right-hand side in this project is a template over the
// scalar type and only uses +, -, *, / and sqrt, so any of these scalars
// (and any nesting of them) can be pushed through it.

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>
#include <utility>

namespace shotcheck {

template <class T>
struct Dual {
  T v{};
  T d{};

  Dual() = default;
  Dual(double value) : v(value), d(0.0) {}  // NOLINT(google-explicit-constructor)
  Dual(T value, T deriv) : v(std::move(value)), d(std::move(deriv)) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
  Dual& operator*=(double s) { v *= s; d *= s; return *this; }

  friend Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
  friend Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
  friend Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
  friend Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
  }
  friend Dual operator+(const Dual& a, double b) { return {a.v + b, a.d}; }
  friend Dual operator+(double a, const Dual& b) { return {a + b.v, b.d}; }
  friend Dual operator-(const Dual& a, double b) { return {a.v - b, a.d}; }
  friend Dual operator-(double a, const Dual& b) { return {a - b.v, -b.d}; }
  friend Dual operator*(const Dual& a, double b) { return {a.v * b, a.d * b}; }
  friend Dual operator*(double a, const Dual& b) { return {a * b.v, a * b.d}; }
  friend Dual operator/(const Dual& a, double b) { return {a.v / b, a.d / b}; }
  friend Dual operator/(double a, const Dual& b) {
    T q = a / b.v;
    return {q, -(q * b.d) / b.v};
  }
  friend Dual sqrt(const Dual& a) {
    using std::sqrt;
    T r = sqrt(a.v);
    return {r, a.d / (2.0 * r)};
  }
  friend Dual pow(const Dual& a, double p) {
    using std::pow;
    return {pow(a.v, p), (p * pow(a.v, p - 1.0)) * a.d};
  }
};

// Truncated power series sum_{j<=kDegree} c_j t^j. Arithmetic is exact
// through degree kDegree.
template <class T>
struct Taylor {
  static constexpr std::size_t kDegree = 5;
  std::array<T, kDegree + 1> c{};

  Taylor() = default;
  Taylor(double value) { c[0] = T(value); }  // NOLINT(google-explicit-constructor)
  explicit Taylor(const T& value)
    requires(!std::is_same_v<T, double>)
  {
    c[0] = value;
  }

  Taylor& operator+=(const Taylor& o) { for (std::size_t j = 0; j <= kDegree; ++j) c[j] += o.c[j]; return *this; }
  Taylor& operator-=(const Taylor& o) { for (std::size_t j = 0; j <= kDegree; ++j) c[j] -= o.c[j]; return *this; }
  Taylor& operator*=(const Taylor& o) { *this = *this * o; return *this; }
  Taylor& operator/=(const Taylor& o) { *this = *this / o; return *this; }

  friend Taylor operator-(const Taylor& a) {
    Taylor r;
    for (std::size_t j = 0; j <= kDegree; ++j) r.c[j] = -a.c[j];
    return r;
  }
  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (std::size_t k = 0; k <= kDegree; ++k) {
      T acc = a.c[0] * b.c[k];
      for (std::size_t j = 1; j <= k; ++j) acc += a.c[j] * b.c[k - j];
      r.c[k] = acc;
    }
    return r;
  }
  friend Taylor operator/(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (std::size_t k = 0; k <= kDegree; ++k) {
      T acc = a.c[k];
      for (std::size_t j = 1; j <= k; ++j) acc -= b.c[j] * r.c[k - j];
      r.c[k] = acc / b.c[0];
    }
    return r;
  }
  friend Taylor operator+(Taylor a, double b) { a.c[0] += b; return a; }
  friend Taylor operator+(double a, Taylor b) { b.c[0] += a; return b; }
  friend Taylor operator-(Taylor a, double b) { a.c[0] -= b; return a; }
  friend Taylor operator-(double a, const Taylor& b) { Taylor r = -b; r.c[0] += a; return r; }
  friend Taylor operator*(Taylor a, double b) { for (auto& x : a.c) x *= b; return a; }
  friend Taylor operator*(double a, Taylor b) { for (auto& x : b.c) x *= a; return b; }
  friend Taylor operator/(Taylor a, double b) { for (auto& x : a.c) x = x / b; return a; }
  friend Taylor operator/(double a, const Taylor& b) { return Taylor(a) / b; }
  friend Taylor sqrt(const Taylor& a) {
    using std::sqrt;
    Taylor r;
    r.c[0] = sqrt(a.c[0]);
    for (std::size_t k = 1; k <= kDegree; ++k) {
      T acc = a.c[k];
      for (std::size_t j = 1; j < k; ++j) acc -= r.c[j] * r.c[k - j];
      r.c[k] = acc / (2.0 * r.c[0]);
    }
    return r;
  }
};

using J1 = Dual<double>;
using J2 = Dual<J1>;
using J3 = Dual<J2>;
using J4 = Dual<J3>;
using T0 = Taylor<double>;
using TJ1 = Taylor<J1>;
using TJ2 = Taylor<J2>;

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) { return primal(x.v); }
template <class T>
double primal(const Taylor<T>& x) { return primal(x.c[0]); }

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

// Number of nested Dual layers (J3 -> 3).
template <class T>
struct dual_depth : std::integral_constant<int, 0> {};
template <class T>
struct dual_depth<Dual<T>> : std::integral_constant<int, 1 + dual_depth<T>::value> {};

// Builds x + sum_l eps_l * seeds[l] as a nested dual; layer 0 is the
// outermost. `seeds` must hold at least dual_depth<T> entries.
template <class T>
T lift(double value, const double* seeds) {
  if constexpr (std::is_same_v<T, double>) {
    (void)seeds;
    return value;
  } else {
    using Inner = std::remove_cvref_t<decltype(T{}.v)>;
    return T(lift<Inner>(value, seeds + 1), Inner(seeds[0]));
  }
}

// Extracts the coefficient of eps_0 * eps_1 * ... * eps_{depth-1}.
template <class T>
double mixed_part(const T& x) {
  if constexpr (std::is_same_v<T, double>) {
    return x;
  } else {
    return mixed_part(x.d);
  }
}

}  // namespace shotcheck
