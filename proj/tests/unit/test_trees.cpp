#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "shotcheck/tableau.hpp"
#include "shotcheck/trees.hpp"

using namespace shotcheck;
using Catch::Approx;

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Nodes of a level sequence with their parents (preceding node one level up).
std::vector<int> parents(const std::vector<int>& levels) {
  std::vector<int> par(levels.size(), -1);
  for (std::size_t i = 1; i < levels.size(); ++i) {
    for (std::size_t j = i; j-- > 0;) {
      if (levels[j] == levels[i] - 1) {
        par[i] = static_cast<int>(j);
        break;
      }
    }
  }
  return par;
}

// Density straight from the definition: product of subtree sizes.
double density_from_levels(const std::vector<int>& levels) {
  const auto par = parents(levels);
  std::vector<int> size(levels.size(), 1);
  for (std::size_t i = levels.size(); i-- > 1;) size[static_cast<std::size_t>(par[i])] += size[i];
  double g = 1.0;
  for (int s : size) g *= s;
  return g;
}

}  // namespace

TEST_CASE("tree counts per order") {
  const int expected[] = {1, 1, 2, 4, 9, 20, 48};
  for (int n = 1; n <= 7; ++n) CHECK(enumerate_trees(n).size() == static_cast<std::size_t>(expected[n - 1]));
  CHECK_THROWS_AS(enumerate_trees(0), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_trees(8), std::invalid_argument);
}

TEST_CASE("monotone labelling identity sum n!/(sigma gamma) = (n-1)!") {
  for (int n = 1; n <= 7; ++n) {
    double total = 0.0;
    for (const auto& t : enumerate_trees(n)) total += factorial(n) / (t.symmetry * t.density);
    CHECK(total == Approx(factorial(n - 1)));
  }
}

TEST_CASE("density matches the subtree-size product of the level sequence") {
  for (const auto& t : tree_table()) {
    REQUIRE(t.level_sequence.size() == static_cast<std::size_t>(t.order));
    CHECK(t.density == Approx(density_from_levels(t.level_sequence)));
  }
}

TEST_CASE("order-3 trees: tall and bushy") {
  const auto trees = enumerate_trees(3);
  std::multiset<std::pair<double, double>> got;
  for (const auto& t : trees) got.insert({t.symmetry, t.density});
  CHECK(got == std::multiset<std::pair<double, double>>{{1.0, 6.0}, {2.0, 3.0}});
}

TEST_CASE("trees are pairwise non-isomorphic and ids are unique") {
  std::set<std::string> ids;
  for (int n = 1; n <= 7; ++n) {
    std::set<std::vector<int>> seqs;
    for (const auto& t : enumerate_trees(n)) {
      seqs.insert(t.level_sequence);
      ids.insert(t.id);
      CHECK(tree_at(t.index).id == t.id);
    }
    CHECK(seqs.size() == enumerate_trees(n).size());
  }
  CHECK(ids.size() == tree_table().size());
}

TEST_CASE("elementary weights of explicit Euler and the midpoint rule") {
  const ButcherTableau& euler = tableau("euler");
  for (const auto& t : tree_table()) {
    CHECK(elementary_weight(euler.a, euler.b, t) == Approx(t.order == 1 ? 1.0 : 0.0).margin(1e-15));
  }
  // One-stage Gauss: Phi(t) = (1/2)^(order-1).
  const ButcherTableau& gl1 = tableau("gl1");
  for (const auto& t : tree_table()) {
    CHECK(elementary_weight(gl1.a, gl1.b, t) == Approx(std::pow(0.5, t.order - 1)));
  }
}

TEST_CASE("stage weights contract to the elementary weight") {
  const ButcherTableau& rk4 = tableau("rk4");
  for (const auto& t : tree_table()) {
    CHECK(rk4.b.dot(stage_weights(rk4.a, t)) == Approx(elementary_weight(rk4.a, rk4.b, t)).margin(1e-15));
  }
}
