#pragma once

// Generic sparse NLP assembled from small constraint blocks.
//
//   min f(w)  s.t.  g_lo <= g(w) <= g_hi,  w_lo <= w <= w_hi
//
// Each block maps a handful of global variables to a few rows. Blocks are
// evaluated with double, J1 and J2 scalars; Jacobian columns come from one
// J1 pass per local variable and Hessian entries from one J2 pass per
// local pair. Local sparsity is probed once per block signature.

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "shotcheck/ad.hpp"

namespace shotcheck {

class Block {
 public:
  Block(std::string signature, std::vector<int> vars, int rows)
      : signature_(std::move(signature)), vars_(std::move(vars)), rows_(rows) {}
  virtual ~Block() = default;

  const std::string& signature() const { return signature_; }
  const std::vector<int>& vars() const { return vars_; }
  int rows() const { return rows_; }

  virtual void eval(std::span<const double> v, std::span<double> out) const = 0;
  virtual void eval(std::span<const J1> v, std::span<J1> out) const = 0;
  virtual void eval(std::span<const J2> v, std::span<J2> out) const = 0;

  // Values for jac_pattern entries, in pattern order.
  virtual void jacobian(std::span<const double> v, double* vals) const;
  // sum_r w_r d2 out_r / dv_i dv_j for hess_pattern entries.
  virtual void hessian(std::span<const double> v, std::span<const double> w, double* vals) const;
  // True when the block supplies its own patterns (skips probing).
  virtual bool fixed_pattern() const { return false; }

  std::vector<std::pair<int, int>> jac_pattern;   // (row, local var), grouped by var
  std::vector<std::pair<int, int>> hess_pattern;  // (local i, local j), i >= j

 private:
  std::string signature_;
  std::vector<int> vars_;
  int rows_;
};

template <class F>
class FnBlock final : public Block {
 public:
  FnBlock(std::string signature, std::vector<int> vars, int rows, F f)
      : Block(std::move(signature), std::move(vars), rows), f_(std::move(f)) {}
  void eval(std::span<const double> v, std::span<double> out) const override { f_(v, out); }
  void eval(std::span<const J1> v, std::span<J1> out) const override { f_(v, out); }
  void eval(std::span<const J2> v, std::span<J2> out) const override { f_(v, out); }

 private:
  F f_;
};

// `f` is a generic callable (auto v, auto out) valid for double, J1 and J2.
template <class F>
std::unique_ptr<Block> make_block(std::string signature, std::vector<int> vars, int rows, F f) {
  return std::make_unique<FnBlock<F>>(std::move(signature), std::move(vars), rows, std::move(f));
}

// Fills jac_pattern / hess_pattern with every entry that is nonzero at any
// of the probe points (local coordinates).
void probe_sparsity(Block& block, const std::vector<std::vector<double>>& points);

struct EvalClock {
  double seconds = 0.0;
  long calls = 0;
};

class Nlp {
 public:
  Nlp() = default;
  Nlp(const Nlp&) = delete;
  Nlp& operator=(const Nlp&) = delete;
  Nlp(Nlp&&) = default;
  Nlp& operator=(Nlp&&) = default;

  int num_vars() const { return static_cast<int>(x_lo.size()); }
  int num_constraints() const { return num_rows_; }

  Eigen::VectorXd x_lo, x_hi, g_lo, g_hi, x_init;
  std::vector<std::string> var_names;
  std::vector<std::string> row_kinds;  // one label per constraint row

  // Adds a constraint block; its rows are appended. Returns the first row.
  int add_constraint(std::unique_ptr<Block> block, double lo, double hi, const std::string& kind);
  // Adds a one-row block whose output is summed into the objective.
  void add_objective(std::unique_ptr<Block> block);
  // Probes block sparsity (once per signature, around `center`) and builds
  // the global Jacobian/Hessian structures. Must be called before any
  // derivative evaluation.
  void finalize(const Eigen::VectorXd& center, std::uint64_t seed = 1);

  double objective(const Eigen::VectorXd& w) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;
  Eigen::VectorXd constraints(const Eigen::VectorXd& w) const;

  const std::vector<std::pair<int, int>>& jacobian_structure() const { return jac_struct_; }
  void jacobian_values(const Eigen::VectorXd& w, std::vector<double>& vals) const;
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& w) const;

  // Lower triangle (row >= col) of obj_factor * grad^2 f + sum_i lambda_i grad^2 g_i.
  const std::vector<std::pair<int, int>>& hessian_structure() const { return hess_struct_; }
  void hessian_values(const Eigen::VectorXd& w, double obj_factor, const Eigen::VectorXd& lambda,
                      std::vector<double>& vals) const;

  std::size_t jacobian_nnz() const { return jac_struct_.size(); }
  std::size_t hessian_nnz() const { return hess_struct_.size(); }

  const EvalClock& clock() const { return clock_; }
  void reset_clock() const { clock_ = {}; }

  const std::vector<std::unique_ptr<Block>>& constraint_blocks() const { return cons_; }
  const std::vector<int>& block_rows() const { return cons_row_; }

 private:
  struct Scope {
    explicit Scope(EvalClock& c) : clock(c), start(std::chrono::steady_clock::now()) {}
    ~Scope() {
      clock.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      ++clock.calls;
    }
    EvalClock& clock;
    std::chrono::steady_clock::time_point start;
  };

  std::vector<double> local(const Block& b, const Eigen::VectorXd& w) const;

  std::vector<std::unique_ptr<Block>> cons_;
  std::vector<int> cons_row_;
  std::vector<std::unique_ptr<Block>> obj_;
  int num_rows_ = 0;
  std::vector<double> lo_pending_, hi_pending_;

  std::vector<std::pair<int, int>> jac_struct_;
  std::vector<int> cons_jac_offset_;                   // first jac entry of each block
  std::vector<std::pair<int, int>> hess_struct_;
  std::vector<std::vector<int>> cons_hess_dest_;       // per block, per pattern entry
  std::vector<std::vector<int>> obj_hess_dest_;
  bool finalized_ = false;
  mutable EvalClock clock_;
};

}  // namespace shotcheck
