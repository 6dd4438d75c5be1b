#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "shotcheck/tableau.hpp"
#include "support.hpp"

using namespace shotcheck;
using Catch::Approx;

namespace {

const char* const kAll[] = {"euler", "gl1", "gl2", "gl3", "lobatto3a", "rk38", "rk4", "rk5", "rk6", "trapezoidal",
                            "trbdf2"};

// The eight classical conditions through order 4, written out by hand.
double classical_residual(const ButcherTableau& t, int p) {
  const Eigen::VectorXd& b = t.b;
  const Eigen::MatrixXd& a = t.a;
  const Eigen::VectorXd c = a.rowwise().sum();
  const Eigen::VectorXd ac = a * c;
  double r = std::abs(b.sum() - 1.0);
  if (p >= 2) r = std::max(r, std::abs(b.dot(c) - 0.5));
  if (p >= 3) {
    r = std::max(r, std::abs(b.dot(c.cwiseProduct(c)) - 1.0 / 3.0));
    r = std::max(r, std::abs(b.dot(ac) - 1.0 / 6.0));
  }
  if (p >= 4) {
    r = std::max(r, std::abs(b.dot(c.cwiseProduct(c).cwiseProduct(c)) - 0.25));
    r = std::max(r, std::abs(b.dot(c.cwiseProduct(ac)) - 0.125));
    r = std::max(r, std::abs(b.dot(a * c.cwiseProduct(c)) - 1.0 / 12.0));
    r = std::max(r, std::abs(b.dot(a * ac) - 1.0 / 24.0));
  }
  return r;
}

}  // namespace

TEST_CASE("every registered tableau validates and is found by name") {
  for (const char* name : kAll) {
    INFO(name);
    REQUIRE(has_tableau(name));
    CHECK_NOTHROW(tableau(name).validate());
    CHECK(tableau(name).name == name);
  }
  CHECK_FALSE(has_tableau("rk7"));
  CHECK_THROWS(tableau("rk7"));
}

TEST_CASE("symplecticity residual matches a direct computation") {
  for (const char* name : kAll) {
    const ButcherTableau& t = tableau(name);
    const Eigen::MatrixXd bmat = t.b.asDiagonal();
    const Eigen::MatrixXd m = bmat * t.a + t.a.transpose() * bmat - t.b * t.b.transpose();
    const SymplecticityResidual r = symplecticity_residual(t);
    CHECK((r.s - m).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(r.max_abs == Approx(m.cwiseAbs().maxCoeff()).margin(1e-15));
  }
}

TEST_CASE("Gauss methods are symplectic, Lobatto IIIA and explicit methods are not") {
  for (const char* name : {"gl1", "gl2", "gl3"}) {
    INFO(name);
    CHECK(symplecticity_residual(tableau(name)).max_abs <= 1e-14);
    CHECK(is_symplectic(tableau(name)));
  }
  for (const char* name : {"lobatto3a", "euler", "rk38", "rk4", "rk5", "rk6"}) {
    INFO(name);
    CHECK(symplecticity_residual(tableau(name)).max_abs > 1e-3);
    CHECK_FALSE(is_symplectic(tableau(name)));
  }
}

TEST_CASE("declared order holds and the next order fails") {
  for (const char* name : kAll) {
    const ButcherTableau& t = tableau(name);
    INFO(name << " declared " << t.order);
    CHECK(satisfies_order(t, t.order));
    CHECK_FALSE(satisfies_order(t, t.order + 1));
  }
}

TEST_CASE("tree-based order check agrees with the classical conditions") {
  for (const char* name : kAll) {
    const ButcherTableau& t = tableau(name);
    for (int p = 1; p <= 4; ++p) {
      INFO(name << " p=" << p);
      CHECK(satisfies_order(t, p, 1e-12) == (classical_residual(t, p) < 1e-12));
    }
  }
}

TEST_CASE("order residual list covers every tree") {
  const auto res = verify_order_conditions(tableau("rk4"), 5);
  CHECK(res.size() == 1 + 1 + 2 + 4 + 9);
  for (const auto& r : res) {
    if (r.order <= 4) CHECK(std::abs(r.residual) < 1e-14);
  }
}

TEST_CASE("json round trip is exact") {
  for (const char* name : kAll) {
    const ButcherTableau& t = tableau(name);
    const ButcherTableau back = tableau_from_json(tableau_to_json(t));
    CHECK(back.name == t.name);
    CHECK(back.order == t.order);
    CHECK(back.a == t.a);
    CHECK(back.b == t.b);
    CHECK(back.c == t.c);
  }
}

TEST_CASE("malformed tableaux are rejected") {
  nlohmann::json doc = tableau_to_json(tableau("rk4"));
  doc["c"][1] = 0.4;  // row sum mismatch
  CHECK_THROWS_AS(tableau_from_json(doc), std::invalid_argument);

  doc = tableau_to_json(tableau("rk4"));
  doc["b"][0] = 0.2;  // weights no longer sum to one
  CHECK_THROWS_AS(tableau_from_json(doc), std::invalid_argument);

  doc = tableau_to_json(tableau("rk4"));
  doc["a"][2] = {0.0, 0.5};
  CHECK_THROWS_AS(tableau_from_json(doc), std::invalid_argument);
}

TEST_CASE("explicitness flag") {
  CHECK(tableau("rk4").is_explicit());
  CHECK(tableau("rk6").is_explicit());
  CHECK_FALSE(tableau("gl2").is_explicit());
  CHECK_FALSE(tableau("trapezoidal").is_explicit());
}

TEST_CASE("symplecticity is invariant under stage permutation") {
  testing_support::Gen gen(21);
  for (const char* name : {"gl2", "gl3", "lobatto3a", "rk4"}) {
    const ButcherTableau& t = tableau(name);
    const auto s = static_cast<int>(t.stages());
    Eigen::VectorXi perm = Eigen::VectorXi::LinSpaced(s, 0, s - 1);
    std::shuffle(perm.data(), perm.data() + s, gen.engine());
    ButcherTableau p = t;
    for (int i = 0; i < s; ++i) {
      p.b(i) = t.b(perm(i));
      p.c(i) = t.c(perm(i));
      for (int j = 0; j < s; ++j) p.a(i, j) = t.a(perm(i), perm(j));
    }
    CHECK(symplecticity_residual(p).max_abs == Approx(symplecticity_residual(t).max_abs).margin(1e-15));
    CHECK(satisfies_order(p, t.order));
  }
}
