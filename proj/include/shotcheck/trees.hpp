#pragma once

// Rooted trees for Runge-Kutta order theory.
//
// Trees up to order 7 are generated once (non-isomorphic, from multisets of
// smaller trees) and kept in a shared read-only table. Symmetry and density
// are derived recursively from the child structure:
//   gamma(t) = r(t) * prod gamma(child)
//   sigma(t) = prod_k (mult_k! * sigma(child_k)^mult_k)
// Within an order, trees are sorted by their canonical level sequence.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shotcheck {

inline constexpr int kMaxTreeOrder = 7;

struct RootedTree {
  std::size_t index = 0;              // position in the global table
  std::string id;                     // "t<order>.<k>", k 1-based within the order
  int order = 1;
  std::vector<std::size_t> children;  // global indices, non-decreasing
  double symmetry = 1.0;
  double density = 1.0;
  std::vector<int> level_sequence;    // canonical, root at level 0
};

// All trees with 1 <= order <= kMaxTreeOrder, grouped by order.
const std::vector<RootedTree>& tree_table();
const RootedTree& tree_at(std::size_t index);

// Non-isomorphic trees of exactly `order`, in canonical order.
// Throws std::invalid_argument outside [1, kMaxTreeOrder].
std::vector<RootedTree> enumerate_trees(int order);

// Elementary weight Phi(t) = b^T g(t), g(leaf) = 1, g([t1..tk]) = prod_j A g(tj).
double elementary_weight(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const RootedTree& t);

// Per-stage weights g(t) (before contracting with b).
Eigen::VectorXd stage_weights(const Eigen::MatrixXd& a, const RootedTree& t);

}  // namespace shotcheck
