#include "shotcheck/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace shotcheck {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Canonical level sequence: root at 0, subtrees (shifted by one) in
// decreasing lexicographic order.
std::vector<int> level_sequence_of(const std::vector<RootedTree>& table,
                                   const std::vector<std::size_t>& children) {
  std::vector<std::vector<int>> subs;
  subs.reserve(children.size());
  for (std::size_t c : children) {
    std::vector<int> s = table[c].level_sequence;
    for (int& l : s) ++l;
    subs.push_back(std::move(s));
  }
  std::sort(subs.begin(), subs.end(), std::greater<>());
  std::vector<int> seq{0};
  for (const auto& s : subs) seq.insert(seq.end(), s.begin(), s.end());
  return seq;
}

std::vector<RootedTree> build_table() {
  std::vector<RootedTree> table;
  std::vector<std::size_t> first_of_order(kMaxTreeOrder + 2, 0);

  RootedTree leaf;
  leaf.id = "t1.1";
  leaf.level_sequence = {0};
  table.push_back(leaf);
  first_of_order[1] = 0;
  first_of_order[2] = 1;

  for (int n = 2; n <= kMaxTreeOrder; ++n) {
    const std::size_t available = table.size();
    std::vector<std::vector<std::size_t>> child_sets;
    std::vector<std::size_t> current;
    // Multisets of existing trees (indices non-decreasing) with total order n-1.
    std::function<void(std::size_t, int)> extend = [&](std::size_t min_index, int budget) {
      if (budget == 0) {
        child_sets.push_back(current);
        return;
      }
      for (std::size_t i = min_index; i < available; ++i) {
        if (table[i].order > budget) continue;
        current.push_back(i);
        extend(i, budget - table[i].order);
        current.pop_back();
      }
    };
    extend(0, n - 1);

    std::vector<RootedTree> fresh;
    for (auto& children : child_sets) {
      RootedTree t;
      t.order = n;
      t.children = children;
      t.level_sequence = level_sequence_of(table, children);
      double density = n;
      double symmetry = 1.0;
      std::map<std::size_t, int> multiplicity;
      for (std::size_t c : children) {
        density *= table[c].density;
        ++multiplicity[c];
      }
      for (const auto& [c, k] : multiplicity) {
        symmetry *= factorial(k) * std::pow(table[c].symmetry, k);
      }
      t.density = density;
      t.symmetry = symmetry;
      fresh.push_back(std::move(t));
    }
    std::sort(fresh.begin(), fresh.end(), [](const RootedTree& a, const RootedTree& b) {
      return a.level_sequence < b.level_sequence;
    });
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      fresh[k].index = table.size();
      fresh[k].id = "t" + std::to_string(n) + "." + std::to_string(k + 1);
      table.push_back(std::move(fresh[k]));
    }
  }
  return table;
}

}  // namespace

const std::vector<RootedTree>& tree_table() {
  static const std::vector<RootedTree> table = build_table();
  return table;
}

const RootedTree& tree_at(std::size_t index) { return tree_table().at(index); }

std::vector<RootedTree> enumerate_trees(int order) {
  if (order < 1 || order > kMaxTreeOrder) {
    throw std::invalid_argument("tree order must lie in [1, " + std::to_string(kMaxTreeOrder) +
                                "], got " + std::to_string(order));
  }
  std::vector<RootedTree> out;
  for (const auto& t : tree_table()) {
    if (t.order == order) out.push_back(t);
  }
  return out;
}

Eigen::VectorXd stage_weights(const Eigen::MatrixXd& a, const RootedTree& t) {
  Eigen::VectorXd g = Eigen::VectorXd::Ones(a.rows());
  for (std::size_t c : t.children) {
    g = g.cwiseProduct(a * stage_weights(a, tree_at(c)));
  }
  return g;
}

double elementary_weight(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const RootedTree& t) {
  return b.dot(stage_weights(a, t));
}

}  // namespace shotcheck
