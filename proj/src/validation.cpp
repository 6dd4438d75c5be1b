#include "shotcheck/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "shotcheck/bseries.hpp"

namespace shotcheck {
namespace {

double step_size(const Eigen::MatrixXd& u) {
  if (u.cols() < 1) throw std::invalid_argument("control sequence needs at least one interval");
  return 1.0 / static_cast<double>(u.cols());
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

Eigen::MatrixXd reference_trajectory(const ControlledOde& ode, const Eigen::VectorXd& x0, const Eigen::MatrixXd& u,
                                     double s, const ReferenceOptions& opts) {
  if (!(s >= 0.0)) throw std::invalid_argument("time dilation must be nonnegative");
  const double h = step_size(u);
  Eigen::MatrixXd states(x0.size(), u.cols() + 1);
  states.col(0) = x0;
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    states.col(k + 1) = integrate_reference(ode, states.col(k), u.col(k), s * h, opts);
  }
  return states;
}

std::vector<double> quaternion_drift(const Eigen::MatrixXd& states) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(states.cols()));
  for (Eigen::Index k = 0; k < states.cols(); ++k) {
    out.push_back(std::abs(states.col(k).segment<4>(kQuat).norm() - 1.0));
  }
  return out;
}

Replay replay_open_loop(const ControlledOde& ode, const Eigen::MatrixXd& x, const Eigen::MatrixXd& u, double s,
                        double rtol) {
  if (x.cols() != u.cols() + 1) throw std::invalid_argument("X must have one more column than U");
  ReferenceOptions opts;
  opts.rtol = opts.atol = rtol;
  Replay out;
  out.states = reference_trajectory(ode, x.col(0), u, s, opts);
  out.terminal = out.states.col(out.states.cols() - 1);
  out.eps_ol = (out.terminal.segment<3>(kPos) - x.col(x.cols() - 1).segment<3>(kPos)).norm();
  out.drift_trace = quaternion_drift(out.states);
  return out;
}

std::vector<double> iterate_drift_trace(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x0,
                                        const Eigen::MatrixXd& u, double s) {
  const Propagation prop = propagate(map, ode, x0, u, step_size(u), s);
  Eigen::MatrixXd states(x0.size(), static_cast<Eigen::Index>(prop.nodes.size()));
  for (std::size_t k = 0; k < prop.nodes.size(); ++k) states.col(static_cast<Eigen::Index>(k)) = prop.nodes[k];
  return quaternion_drift(states);
}

RefOlResult ref_ol_check(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x0,
                         const Eigen::MatrixXd& u, double s) {
  const Propagation prop = propagate(map, ode, x0, u, step_size(u), s);
  RefOlResult out;
  out.map_states.resize(x0.size(), static_cast<Eigen::Index>(prop.nodes.size()));
  for (std::size_t k = 0; k < prop.nodes.size(); ++k) out.map_states.col(static_cast<Eigen::Index>(k)) = prop.nodes[k];
  const Eigen::MatrixXd ref = reference_trajectory(ode, x0, u, s);
  out.error = (prop.nodes.back().segment<3>(kPos) - ref.col(ref.cols() - 1).segment<3>(kPos)).norm();
  out.pass = out.error <= kOpenLoopTolerance;
  return out;
}

LteTrace isolate_lte(const OneStepMap& map, const ControlledOde& ode, const Eigen::MatrixXd& x_ref,
                     const Eigen::MatrixXd& u, double s) {
  if (x_ref.cols() != u.cols() + 1) throw std::invalid_argument("X_ref must have one more column than U");
  const double h = step_size(u);
  const bool has_estimate = map.tableau && map.tableau->order >= 4;
  LteTrace out;
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    const Eigen::VectorXd xk = x_ref.col(k);
    const Eigen::VectorXd uk = u.col(k);
    Eigen::VectorXd next;
    const OneStepMap* used = &map;
    if (map.kind == MapKind::bdf && k < map.bdf_steps - 1) used = &method(map.startup);
    if (used->kind == MapKind::bdf) {
      std::vector<Eigen::VectorXd> history;
      for (Eigen::Index j = k - used->bdf_steps + 1; j <= k; ++j) history.push_back(x_ref.col(j));
      next = bdf_step(used->bdf_steps, ode, history, uk, h, s).x_next;
    } else {
      next = step(*used, ode, xk, uk, h, s).x_next;
    }
    out.measured.push_back((x_ref.col(k + 1) - next).norm());
    out.estimate.push_back(has_estimate ? principal_error_estimate(*map.tableau, ode, xk, uk, h, s).norm()
                                        : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

namespace {

Eigen::MatrixXd deflate_zero_lines(const Eigen::MatrixXd& a) {
  // An index whose row or column is identically zero carries an exact zero
  // eigenvalue; removing it leaves the rest of the spectrum unchanged and
  // keeps the defective zero blocks out of the dense eigensolver.
  std::vector<Eigen::Index> keep(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) keep[static_cast<std::size_t>(i)] = i;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t t = 0; t < keep.size(); ++t) {
      bool row_zero = true;
      bool col_zero = true;
      for (Eigen::Index j : keep) {
        row_zero = row_zero && a(keep[t], j) == 0.0;
        col_zero = col_zero && a(j, keep[t]) == 0.0;
      }
      if (row_zero || col_zero) {
        keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(t));
        changed = true;
        break;
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = a(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace

double stiffness_ratio(const Eigen::MatrixXd& jacobian, bool* degenerate) {
  if (jacobian.rows() != jacobian.cols()) throw std::invalid_argument("stiffness ratio needs a square Jacobian");
  const Eigen::MatrixXd core = deflate_zero_lines(jacobian);
  Eigen::VectorXcd eig;
  if (core.size() > 0) eig = Eigen::EigenSolver<Eigen::MatrixXd>(core, false).eigenvalues();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    const double re = std::abs(eig(i).real());
    if (re < kStiffnessFloor) continue;
    lo = std::min(lo, re);
    hi = std::max(hi, re);
  }
  if (degenerate) *degenerate = hi == 0.0;
  return hi == 0.0 ? 0.0 : hi / lo;
}

StiffnessResult stiffness_ratio(const ControlledOde& ode, const Eigen::MatrixXd& x, const Eigen::MatrixXd& u) {
  if (u.cols() < 1 || x.cols() < 1) throw std::invalid_argument("stiffness ratio needs states and controls");
  StiffnessResult out;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const Eigen::Index j = std::min<Eigen::Index>(k, u.cols() - 1);
    bool degenerate = false;
    const double r = stiffness_ratio(jacobian_state(ode, x.col(k), u.col(j)), &degenerate);
    out.degenerate = out.degenerate || degenerate;
    out.per_node.push_back(r);
    out.ratio = std::max(out.ratio, r);
  }
  return out;
}

ValidationReport validate_solution(const OneStepMap& map, const ControlledOde& ode, const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& u, double s, const Eigen::MatrixXd* ref_u,
                                   const double* ref_s) {
  ValidationReport rep;
  rep.method = map.name;
  rep.s = s;
  const Replay replay = replay_open_loop(ode, x, u, s);
  rep.eps_ol = replay.eps_ol;
  rep.ol_pass = replay.pass();
  rep.drift_replay = replay.drift_trace;
  rep.drift_iterates = quaternion_drift(x);
  rep.lte = isolate_lte(map, ode, replay.states, u, s);
  rep.stiffness = stiffness_ratio(ode, x, u);
  if (ref_u && ref_s) {
    const RefOlResult ref = ref_ol_check(map, ode, x.col(0), *ref_u, *ref_s);
    rep.ref_ol_pass = ref.pass;
    rep.ref_ol_error = ref.error;
  }
  return rep;
}

nlohmann::json to_json(const ValidationReport& r) {
  nlohmann::json doc;
  doc["method"] = r.method;
  doc["s"] = r.s;
  doc["eps_ol"] = r.eps_ol;
  doc["ol_pass"] = r.ol_pass;
  doc["ref_ol_pass"] = r.ref_ol_pass ? nlohmann::json(*r.ref_ol_pass) : nlohmann::json(nullptr);
  doc["ref_ol_error"] = r.ref_ol_error ? nlohmann::json(*r.ref_ol_error) : nlohmann::json(nullptr);
  doc["drift_replay"] = r.drift_replay;
  doc["drift_iterates"] = r.drift_iterates;
  doc["lte"] = r.lte.measured;
  nlohmann::json est = nlohmann::json::array();
  for (double v : r.lte.estimate) est.push_back(finite_or_null(v));
  doc["lte_h5_estimate"] = est;
  doc["stiffness_ratio"] = r.stiffness.ratio;
  doc["stiffness_degenerate"] = r.stiffness.degenerate;
  doc["drift_note"] = "drift_iterates are the transcription's node states; drift_replay is the reference replay";
  return doc;
}

std::string trace_csv(const ValidationReport& r) {
  std::ostringstream os;
  os << "node,tau,drift_replay,drift_iterates,lte,lte_h5_estimate\n";
  const std::size_t nodes = r.drift_iterates.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < nodes; ++k) {
    const double tau = nodes > 1 ? static_cast<double>(k) / static_cast<double>(nodes - 1) : 0.0;
    os << k << ',' << num(tau) << ',' << num(k < r.drift_replay.size() ? r.drift_replay[k] : nan) << ','
       << num(r.drift_iterates[k]) << ',' << num(k < r.lte.measured.size() ? r.lte.measured[k] : nan) << ','
       << num(k < r.lte.estimate.size() ? r.lte.estimate[k] : nan) << '\n';
  }
  return os.str();
}

}  // namespace shotcheck
