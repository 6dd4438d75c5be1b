#include "shotcheck/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace shotcheck {

void Block::jacobian(std::span<const double> v, double* vals) const {
  const std::size_t n = v.size();
  std::vector<J1> vj(n);
  std::vector<J1> out(static_cast<std::size_t>(rows()));
  for (std::size_t i = 0; i < n; ++i) vj[i] = J1(v[i]);
  int current = -1;
  for (std::size_t e = 0; e < jac_pattern.size(); ++e) {
    const auto [row, var] = jac_pattern[e];
    if (var != current) {
      if (current >= 0) vj[static_cast<std::size_t>(current)].d = 0.0;
      current = var;
      vj[static_cast<std::size_t>(var)].d = 1.0;
      eval(std::span<const J1>(vj), std::span<J1>(out));
    }
    vals[e] = out[static_cast<std::size_t>(row)].d;
  }
}

void Block::hessian(std::span<const double> v, std::span<const double> w, double* vals) const {
  const std::size_t n = v.size();
  std::vector<J2> vj(n);
  std::vector<J2> out(static_cast<std::size_t>(rows()));
  for (std::size_t i = 0; i < n; ++i) vj[i] = J2(v[i]);
  for (std::size_t e = 0; e < hess_pattern.size(); ++e) {
    const auto [i, j] = hess_pattern[e];
    auto& vi = vj[static_cast<std::size_t>(i)];
    auto& vjj = vj[static_cast<std::size_t>(j)];
    vi.d.v = 1.0;   // outer seed
    vjj.v.d = 1.0;  // inner seed
    eval(std::span<const J2>(vj), std::span<J2>(out));
    double acc = 0.0;
    for (std::size_t r = 0; r < out.size(); ++r) {
      if (w[r] != 0.0) acc += w[r] * out[r].d.d;
    }
    vals[e] = acc;
    vi.d.v = 0.0;
    vjj.v.d = 0.0;
  }
}

void probe_sparsity(Block& block, const std::vector<std::vector<double>>& points) {
  const std::size_t n = block.vars().size();
  const auto rows = static_cast<std::size_t>(block.rows());
  std::vector<std::vector<char>> dep(n, std::vector<char>(rows, 0));
  std::set<std::pair<int, int>> hess;
  for (const auto& p : points) {
    std::vector<J1> vj(n);
    std::vector<J1> out(rows);
    for (std::size_t i = 0; i < n; ++i) vj[i] = J1(p[i]);
    for (std::size_t i = 0; i < n; ++i) {
      vj[i].d = 1.0;
      block.eval(std::span<const J1>(vj), std::span<J1>(out));
      for (std::size_t r = 0; r < rows; ++r) {
        if (out[r].d != 0.0) dep[i][r] = 1;
      }
      vj[i].d = 0.0;
    }
  }
  for (const auto& p : points) {
    std::vector<J2> vj(n);
    std::vector<J2> out(rows);
    for (std::size_t i = 0; i < n; ++i) vj[i] = J2(p[i]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        bool shared = false;
        for (std::size_t r = 0; r < rows && !shared; ++r) shared = dep[i][r] && dep[j][r];
        if (!shared || hess.count({static_cast<int>(i), static_cast<int>(j)})) continue;
        vj[i].d.v = 1.0;
        vj[j].v.d = 1.0;
        block.eval(std::span<const J2>(vj), std::span<J2>(out));
        for (std::size_t r = 0; r < rows; ++r) {
          if (out[r].d.d != 0.0) {
            hess.insert({static_cast<int>(i), static_cast<int>(j)});
            break;
          }
        }
        vj[i].d.v = 0.0;
        vj[j].v.d = 0.0;
      }
    }
  }
  block.jac_pattern.clear();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < rows; ++r) {
      if (dep[i][r]) block.jac_pattern.emplace_back(static_cast<int>(r), static_cast<int>(i));
    }
  }
  block.hess_pattern.assign(hess.begin(), hess.end());
}

int Nlp::add_constraint(std::unique_ptr<Block> block, double lo, double hi, const std::string& kind) {
  if (finalized_) throw std::logic_error("NLP already finalized");
  const int first = num_rows_;
  for (int r = 0; r < block->rows(); ++r) {
    lo_pending_.push_back(lo);
    hi_pending_.push_back(hi);
    row_kinds.push_back(kind);
  }
  num_rows_ += block->rows();
  cons_row_.push_back(first);
  cons_.push_back(std::move(block));
  return first;
}

void Nlp::add_objective(std::unique_ptr<Block> block) {
  if (finalized_) throw std::logic_error("NLP already finalized");
  if (block->rows() != 1) throw std::invalid_argument("objective blocks must have one row");
  obj_.push_back(std::move(block));
}

std::vector<double> Nlp::local(const Block& b, const Eigen::VectorXd& w) const {
  std::vector<double> v(b.vars().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = w(b.vars()[i]);
  return v;
}

void Nlp::finalize(const Eigen::VectorXd& center, std::uint64_t seed) {
  g_lo = Eigen::Map<const Eigen::VectorXd>(lo_pending_.data(), static_cast<Eigen::Index>(lo_pending_.size()));
  g_hi = Eigen::Map<const Eigen::VectorXd>(hi_pending_.data(), static_cast<Eigen::Index>(hi_pending_.size()));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::map<std::string, std::pair<std::vector<std::pair<int, int>>, std::vector<std::pair<int, int>>>> cache;
  auto probe = [&](Block& b) {
    if (b.fixed_pattern()) return;
    auto it = cache.find(b.signature());
    if (it != cache.end()) {
      b.jac_pattern = it->second.first;
      b.hess_pattern = it->second.second;
      return;
    }
    std::vector<std::vector<double>> pts(2, local(b, center));
    for (auto& p : pts) {
      for (double& x : p) x += 0.2 * (1.0 + std::abs(x)) * unit(rng);
    }
    probe_sparsity(b, pts);
    cache.emplace(b.signature(), std::make_pair(b.jac_pattern, b.hess_pattern));
  };

  jac_struct_.clear();
  cons_jac_offset_.clear();
  std::map<std::pair<int, int>, int> hess_index;
  auto global_pair = [](const Block& b, const std::pair<int, int>& p) {
    const int gi = b.vars()[static_cast<std::size_t>(p.first)];
    const int gj = b.vars()[static_cast<std::size_t>(p.second)];
    return std::make_pair(std::max(gi, gj), std::min(gi, gj));
  };
  for (std::size_t k = 0; k < cons_.size(); ++k) {
    Block& b = *cons_[k];
    probe(b);
    cons_jac_offset_.push_back(static_cast<int>(jac_struct_.size()));
    for (const auto& [r, lv] : b.jac_pattern) {
      jac_struct_.emplace_back(cons_row_[k] + r, b.vars()[static_cast<std::size_t>(lv)]);
    }
    for (const auto& p : b.hess_pattern) hess_index.emplace(global_pair(b, p), 0);
  }
  for (auto& b : obj_) {
    probe(*b);
    for (const auto& p : b->hess_pattern) hess_index.emplace(global_pair(*b, p), 0);
  }
  hess_struct_.clear();
  for (auto& [key, idx] : hess_index) {
    idx = static_cast<int>(hess_struct_.size());
    hess_struct_.push_back(key);
  }
  cons_hess_dest_.assign(cons_.size(), {});
  for (std::size_t k = 0; k < cons_.size(); ++k) {
    for (const auto& p : cons_[k]->hess_pattern) cons_hess_dest_[k].push_back(hess_index.at(global_pair(*cons_[k], p)));
  }
  obj_hess_dest_.assign(obj_.size(), {});
  for (std::size_t k = 0; k < obj_.size(); ++k) {
    for (const auto& p : obj_[k]->hess_pattern) obj_hess_dest_[k].push_back(hess_index.at(global_pair(*obj_[k], p)));
  }
  finalized_ = true;
}

double Nlp::objective(const Eigen::VectorXd& w) const {
  Scope scope(clock_);
  double f = 0.0;
  double out = 0.0;
  for (const auto& b : obj_) {
    const auto v = local(*b, w);
    b->eval(std::span<const double>(v), std::span<double>(&out, 1));
    f += out;
  }
  return f;
}

Eigen::VectorXd Nlp::gradient(const Eigen::VectorXd& w) const {
  if (!finalized_) throw std::logic_error("NLP not finalized");
  Scope scope(clock_);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  std::vector<double> vals;
  for (const auto& b : obj_) {
    const auto v = local(*b, w);
    vals.resize(b->jac_pattern.size());
    b->jacobian(std::span<const double>(v), vals.data());
    for (std::size_t e = 0; e < vals.size(); ++e) g(b->vars()[static_cast<std::size_t>(b->jac_pattern[e].second)]) += vals[e];
  }
  return g;
}

Eigen::VectorXd Nlp::constraints(const Eigen::VectorXd& w) const {
  Scope scope(clock_);
  Eigen::VectorXd c(num_rows_);
  for (std::size_t k = 0; k < cons_.size(); ++k) {
    const auto v = local(*cons_[k], w);
    cons_[k]->eval(std::span<const double>(v),
                   std::span<double>(c.data() + cons_row_[k], static_cast<std::size_t>(cons_[k]->rows())));
  }
  return c;
}

void Nlp::jacobian_values(const Eigen::VectorXd& w, std::vector<double>& vals) const {
  if (!finalized_) throw std::logic_error("NLP not finalized");
  Scope scope(clock_);
  vals.resize(jac_struct_.size());
  for (std::size_t k = 0; k < cons_.size(); ++k) {
    const auto v = local(*cons_[k], w);
    cons_[k]->jacobian(std::span<const double>(v), vals.data() + cons_jac_offset_[k]);
  }
}

Eigen::SparseMatrix<double> Nlp::jacobian(const Eigen::VectorXd& w) const {
  std::vector<double> vals;
  jacobian_values(w, vals);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(vals.size());
  for (std::size_t e = 0; e < vals.size(); ++e) trip.emplace_back(jac_struct_[e].first, jac_struct_[e].second, vals[e]);
  Eigen::SparseMatrix<double> j(num_rows_, num_vars());
  j.setFromTriplets(trip.begin(), trip.end());
  return j;
}

void Nlp::hessian_values(const Eigen::VectorXd& w, double obj_factor, const Eigen::VectorXd& lambda,
                         std::vector<double>& vals) const {
  if (!finalized_) throw std::logic_error("NLP not finalized");
  Scope scope(clock_);
  vals.assign(hess_struct_.size(), 0.0);
  std::vector<double> local_vals;
  for (std::size_t k = 0; k < cons_.size(); ++k) {
    const Block& b = *cons_[k];
    std::span<const double> wts(lambda.data() + cons_row_[k], static_cast<std::size_t>(b.rows()));
    bool any = false;
    for (double x : wts) any = any || x != 0.0;
    if (!any || b.hess_pattern.empty()) continue;
    const auto v = local(b, w);
    local_vals.resize(b.hess_pattern.size());
    b.hessian(std::span<const double>(v), wts, local_vals.data());
    for (std::size_t e = 0; e < local_vals.size(); ++e) vals[static_cast<std::size_t>(cons_hess_dest_[k][e])] += local_vals[e];
  }
  if (obj_factor != 0.0) {
    const double wt[1] = {obj_factor};
    for (std::size_t k = 0; k < obj_.size(); ++k) {
      const Block& b = *obj_[k];
      if (b.hess_pattern.empty()) continue;
      const auto v = local(b, w);
      local_vals.resize(b.hess_pattern.size());
      b.hessian(std::span<const double>(v), std::span<const double>(wt, 1), local_vals.data());
      for (std::size_t e = 0; e < local_vals.size(); ++e) vals[static_cast<std::size_t>(obj_hess_dest_[k][e])] += local_vals[e];
    }
  }
}

}  // namespace shotcheck
