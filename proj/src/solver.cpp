#include "shotcheck/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include <Eigen/SparseCholesky>

#include "shotcheck/transcription.hpp"

namespace shotcheck {
namespace {

using Clock = std::chrono::steady_clock;

struct Bounds {
  const Eigen::VectorXd& lo;
  const Eigen::VectorXd& hi;
  Eigen::VectorXd project(const Eigen::VectorXd& w) const { return w.cwiseMax(lo).cwiseMin(hi); }
};

// Augmented Lagrangian state at one point for fixed (lambda, rho).
struct Merit {
  double f = 0.0;
  Eigen::VectorXd c;
  Eigen::VectorXd mu;      // lambda + rho (c - z*)
  double value = 0.0;      // f + sum lambda (c - z*) + rho/2 |c - z*|^2
  double violation = 0.0;  // row violation, inf-norm
  bool finite = true;
};

Merit merit(const Nlp& nlp, const Eigen::VectorXd& w, const Eigen::VectorXd& lambda, double rho) {
  Merit m;
  m.f = nlp.objective(w);
  m.c = nlp.constraints(w);
  m.finite = std::isfinite(m.f) && m.c.allFinite();
  if (!m.finite) return m;
  const Eigen::VectorXd shifted = m.c + lambda / rho;
  const Eigen::VectorXd z = shifted.cwiseMax(nlp.g_lo).cwiseMin(nlp.g_hi);
  const Eigen::VectorXd gap = m.c - z;
  m.mu = rho * (shifted - z);
  m.value = m.f + lambda.dot(gap) + 0.5 * rho * gap.squaredNorm();
  const Eigen::VectorXd viol = (nlp.g_lo - m.c).cwiseMax(m.c - nlp.g_hi).cwiseMax(0.0);
  m.violation = viol.size() ? viol.maxCoeff() : 0.0;
  return m;
}

double projected_gradient_norm(const Bounds& b, const Eigen::VectorXd& w, const Eigen::VectorXd& g) {
  if (w.size() == 0) return 0.0;
  return (b.project(w - g) - w).cwiseAbs().maxCoeff();
}

}  // namespace

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::feasible:
      return "feasible";
    case SolveStatus::iteration_cap:
      return "iteration_cap";
    case SolveStatus::diverged:
      return "diverged";
  }
  return "unknown";
}

SolveResult AugmentedLagrangianSolver::solve(const Nlp& nlp, const Eigen::VectorXd& x0,
                                             const IterateCallback& callback) const {
  const auto start = Clock::now();
  nlp.reset_clock();
  const SolverOptions& opt = options_;
  const int n = nlp.num_vars();
  const int m = nlp.num_constraints();
  if (x0.size() != n) throw std::invalid_argument("initial point has the wrong length");
  const Bounds bounds{nlp.x_lo, nlp.x_hi};

  Eigen::VectorXd w = bounds.project(x0);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  double rho = opt.rho_init;
  std::vector<char> fixed(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) fixed[static_cast<std::size_t>(i)] = nlp.x_lo(i) == nlp.x_hi(i);
  std::vector<char> equality(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) equality[static_cast<std::size_t>(i)] = nlp.g_lo(i) == nlp.g_hi(i);

  SolveResult res;
  Merit cur = merit(nlp, w, lambda, rho);
  if (!cur.finite) throw EvaluationFailure("objective or constraints are not finite at the initial point");

  const auto& jac_struct = nlp.jacobian_structure();
  const auto& hess_struct = nlp.hessian_structure();
  std::vector<double> jac_vals;
  std::vector<double> hess_vals;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
  double delta_last = 0.0;

  double inner_tol = 1e-2;
  double prev_violation = cur.violation;
  double kkt = 0.0;
  bool diverged = false;

  auto lagrangian_gradient = [&](const Merit& mt) {
    Eigen::VectorXd g = nlp.gradient(w);
    nlp.jacobian_values(w, jac_vals);
    for (std::size_t e = 0; e < jac_vals.size(); ++e) {
      g(jac_struct[e].second) += mt.mu(jac_struct[e].first) * jac_vals[e];
    }
    return g;
  };

  for (int outer = 0; outer < opt.max_outer && !diverged; ++outer) {
    res.outer_iterations = outer + 1;
    cur = merit(nlp, w, lambda, rho);
    const Eigen::VectorXd w_start = w;
    const double runaway = std::max(10.0 * cur.violation, opt.runaway_violation);
    bool ran_away = false;
    // Inner loop: projected Newton on the augmented Lagrangian.
    for (int inner = 0;; ++inner) {
      const Eigen::VectorXd g = lagrangian_gradient(cur);
      const double pg = projected_gradient_norm(bounds, w, g);
      kkt = pg;
      if (pg <= std::max(inner_tol, opt.opt_tol) || res.iterations >= opt.max_iter || inner >= opt.max_inner) break;

      const double eps = std::min(1e-6, pg);
      std::vector<char> active(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        active[static_cast<std::size_t>(i)] = fixed[static_cast<std::size_t>(i)] ||
                                              (w(i) <= nlp.x_lo(i) + eps && g(i) > 0.0) ||
                                              (w(i) >= nlp.x_hi(i) - eps && g(i) < 0.0);
      }

      // H = grad^2 f + sum mu grad^2 c + rho J_A^T J_A, active variables decoupled.
      nlp.hessian_values(w, 1.0, cur.mu, hess_vals);
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(hess_vals.size() + static_cast<std::size_t>(n));
      for (std::size_t e = 0; e < hess_vals.size(); ++e) {
        const auto [r, c] = hess_struct[e];
        if (active[static_cast<std::size_t>(r)] || active[static_cast<std::size_t>(c)]) continue;
        trip.emplace_back(r, c, hess_vals[e]);
      }
      {
        std::vector<Eigen::Triplet<double>> jt;
        for (std::size_t e = 0; e < jac_vals.size(); ++e) {
          const auto [row, col] = jac_struct[e];
          const bool on = equality[static_cast<std::size_t>(row)] || cur.mu(row) != 0.0;
          if (on && !active[static_cast<std::size_t>(col)]) jt.emplace_back(row, col, jac_vals[e]);
        }
        Eigen::SparseMatrix<double> ja(m, n);
        ja.setFromTriplets(jt.begin(), jt.end());
        const Eigen::SparseMatrix<double> jtj = (rho * Eigen::SparseMatrix<double>(ja.transpose()) * ja).pruned();
        for (int k = 0; k < jtj.outerSize(); ++k) {
          for (Eigen::SparseMatrix<double>::InnerIterator it(jtj, k); it; ++it) {
            if (it.row() >= it.col()) trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
          }
        }
      }
      for (int i = 0; i < n; ++i) trip.emplace_back(i, i, active[static_cast<std::size_t>(i)] ? 1.0 : 0.0);
      Eigen::SparseMatrix<double> hmat(n, n);
      hmat.setFromTriplets(trip.begin(), trip.end());

      Eigen::VectorXd rhs = -g;
      for (int i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)]) rhs(i) = 0.0;
      }
      Eigen::SparseMatrix<double> ident(n, n);
      ident.setIdentity();
      for (int i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)]) ident.coeffRef(i, i) = 0.0;
      }
      Eigen::VectorXd d;
      double delta = delta_last > 0.0 ? std::max(1e-12, delta_last / 3.0) : 0.0;
      for (int attempt = 0; attempt < 40; ++attempt) {
        const Eigen::SparseMatrix<double> reg = hmat + delta * ident;
        ldlt.compute(reg);
        bool ok = ldlt.info() == Eigen::Success;
        if (ok) ok = (ldlt.vectorD().array() > 0.0).all();
        if (ok) {
          d = ldlt.solve(rhs);
          ok = d.allFinite() && g.dot(d) < 0.0;
        }
        if (ok) break;
        d.resize(0);
        delta = delta == 0.0 ? 1e-8 : delta * 10.0;
      }
      delta_last = delta;
      if (d.size() == 0) d = rhs;  // steepest descent fallback

      // Armijo backtracking along the projection arc.
      bool accepted = false;
      for (int pass = 0; pass < 2 && !accepted; ++pass) {
        if (pass == 1) d = rhs;
        double alpha = 1.0;
        for (int ls = 0; ls < 50; ++ls, alpha *= 0.5) {
          const Eigen::VectorXd trial = bounds.project(w + alpha * d);
          const double decrease = g.dot(trial - w);
          if (decrease >= 0.0) continue;
          Merit mt = merit(nlp, trial, lambda, rho);
          if (mt.finite && mt.value <= cur.value + 1e-4 * decrease) {
            w = trial;
            cur = std::move(mt);
            accepted = true;
            break;
          }
        }
      }
      ++res.iterations;
      if (!accepted) break;  // stalled at roundoff level
      if (callback) callback(res.iterations, w);
      if (cur.violation > runaway) {
        ran_away = true;
        break;
      }
      if (opt.verbose) {
        std::fprintf(stderr, "  it %4d  L %.10e  viol %.3e  pg %.3e  rho %.1e  delta %.1e\n", res.iterations,
                     cur.value, cur.violation, pg, rho, delta);
      }
    }

    if (ran_away) {
      // The penalty is too weak to hold the objective near feasibility.
      w = w_start;
      cur = merit(nlp, w, lambda, rho);
      rho *= 10.0;
      if (rho > opt.rho_max) diverged = true;
      if (opt.verbose) std::fprintf(stderr, "outer %2d  runaway, restart with rho %.1e\n", outer, rho);
      continue;
    }
    const double violation = cur.violation;
    if (opt.verbose) {
      std::fprintf(stderr, "outer %2d  f %.10e  viol %.3e  kkt %.3e  rho %.1e  iters %d\n", outer, cur.f, violation, kkt,
                   rho, res.iterations);
    }
    if (violation <= opt.feas_tol && kkt <= opt.opt_tol) {
      res.status = SolveStatus::optimal;
      break;
    }
    if (res.iterations >= opt.max_iter) break;
    lambda = cur.mu;
    if (violation > 0.25 * prev_violation) {
      rho *= 10.0;
      if (rho > opt.rho_max) diverged = true;
    }
    prev_violation = std::min(prev_violation, violation);
    inner_tol = std::max(opt.opt_tol, 0.1 * inner_tol);
    delta_last = 0.0;
  }

  cur = merit(nlp, w, lambda, rho);
  res.w = w;
  res.objective = cur.f;
  res.violation = cur.violation;
  res.multipliers = cur.mu;
  res.kkt = kkt;
  res.penalty = rho;
  if (res.status != SolveStatus::optimal) {
    if (!cur.finite) {
      res.status = SolveStatus::diverged;
    } else if (cur.violation <= opt.feas_tol) {
      res.status = SolveStatus::feasible;
    } else {
      res.status = diverged ? SolveStatus::diverged : SolveStatus::iteration_cap;
    }
  }
  res.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  res.eval_seconds = std::min(nlp.clock().seconds, res.total_seconds);
  res.solver_seconds = res.total_seconds - res.eval_seconds;
  return res;
}

SolveResult solve(const Transcription& problem, const SolverOptions& options, const IterateCallback& callback) {
  return AugmentedLagrangianSolver(options).solve(problem.nlp(), problem.nlp().x_init, callback);
}

}  // namespace shotcheck
