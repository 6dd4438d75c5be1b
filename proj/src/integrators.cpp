#include "shotcheck/integrators.hpp"

#include <array>
#include <map>

namespace shotcheck {
namespace {

OneStepMap rk_map(std::string name, std::string label, MapKind kind) {
  OneStepMap m;
  const ButcherTableau& tab = tableau(name);
  m.name = std::move(name);
  m.label = std::move(label);
  m.kind = kind;
  m.order = tab.order;
  m.stages = static_cast<int>(tab.stages());
  m.implicit = !tab.is_explicit();
  m.symplectic = is_symplectic(tab);
  m.tableau = tab;
  m.nodes = tab.c;
  return m;
}

OneStepMap avf_map(int points) {
  OneStepMap m;
  m.name = "avf" + std::to_string(points);
  m.label = "AVF " + std::to_string(points) + "s";
  m.kind = MapKind::avf;
  m.order = 2;
  m.stages = points;
  m.implicit = true;
  m.symplectic = false;
  if (points == 2) {
    const double d = std::sqrt(3.0) / 6.0;
    m.nodes = Eigen::Vector2d(0.5 - d, 0.5 + d);
    m.weights = Eigen::Vector2d(0.5, 0.5);
  } else {
    const double d = std::sqrt(15.0) / 10.0;
    m.nodes = Eigen::Vector3d(0.5 - d, 0.5, 0.5 + d);
    m.weights = Eigen::Vector3d(5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0);
  }
  return m;
}

OneStepMap bdf_map(int k) {
  OneStepMap m;
  m.name = "bdf" + std::to_string(k);
  m.label = "BDF" + std::to_string(k);
  m.kind = MapKind::bdf;
  m.order = k;
  m.stages = 1;
  m.implicit = true;
  m.bdf_steps = k;
  m.startup = k == 4 ? "rk4" : "rk6";
  m.nodes = Eigen::VectorXd::Ones(1);
  return m;
}

struct Registry {
  std::map<std::string, OneStepMap, std::less<>> maps;
  std::vector<std::string> order;
};

Registry build_registry() {
  Registry reg;
  auto add = [&](OneStepMap m) {
    reg.order.push_back(m.name);
    reg.maps.emplace(m.name, std::move(m));
  };
  add(bdf_map(4));
  add(bdf_map(6));
  {
    OneStepMap m = rk_map("trapezoidal", "Implicit Trapezoidal", MapKind::trapezoid);
    m.stages = 1;
    add(std::move(m));
  }
  add(rk_map("rk38", "RK38", MapKind::explicit_rk));
  add(rk_map("rk4", "RK4", MapKind::explicit_rk));
  add(rk_map("rk5", "RK5 (DoPri5)", MapKind::explicit_rk));
  add(rk_map("rk6", "RK6 (Luther)", MapKind::explicit_rk));
  add(avf_map(2));
  add(avf_map(3));
  add(rk_map("gl1", "Implicit Midpoint (GL1)", MapKind::midpoint));
  {
    OneStepMap m = rk_map("trbdf2", "TR-BDF2", MapKind::tr_bdf2);
    m.stages = 2;
    add(std::move(m));
  }
  add(rk_map("gl2", "Gauss-Legendre 2s (GL2)", MapKind::lifted_rk));
  add(rk_map("lobatto3a", "Lobatto IIIA 3-stage", MapKind::lifted_rk));
  add(rk_map("gl3", "Gauss-Legendre 3s (GL3)", MapKind::lifted_rk));
  return reg;
}

const Registry& registry() {
  static const Registry reg = build_registry();
  return reg;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::vector<J1> constants(const Eigen::VectorXd& v) {
  std::vector<J1> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = J1(v(i));
  return out;
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteState(std::string("non-finite state after ") + what);
}

}  // namespace

int OneStepMap::lifted_blocks() const {
  switch (kind) {
    case MapKind::lifted_rk: return stages;
    case MapKind::tr_bdf2: return 1;
    default: return 0;
  }
}

const OneStepMap& method(std::string_view name) {
  const auto& maps = registry().maps;
  auto it = maps.find(name);
  if (it == maps.end()) throw std::invalid_argument("unknown method '" + std::string(name) + "'");
  return it->second;
}

bool has_method(std::string_view name) { return registry().maps.find(name) != registry().maps.end(); }

const std::vector<std::string>& method_names() { return registry().order; }

std::span<const double> bdf_coefficients(int k) {
  static constexpr std::array<double, 5> kBdf4{25.0 / 12.0, -4.0, 3.0, -4.0 / 3.0, 1.0 / 4.0};
  static constexpr std::array<double, 7> kBdf6{147.0 / 60.0, -6.0, 15.0 / 2.0, -20.0 / 3.0,
                                               15.0 / 4.0,   -6.0 / 5.0, 1.0 / 6.0};
  if (k == 4) return kBdf4;
  if (k == 6) return kBdf6;
  throw std::invalid_argument("BDF order must be 4 or 6");
}

NewtonReport newton_solve(const ResidualFn& residual, Eigen::VectorXd& w, double tol, int max_iter) {
  const auto n = w.size();
  std::vector<J1> wj(static_cast<std::size_t>(n));
  std::vector<J1> rj(static_cast<std::size_t>(n));
  Eigen::VectorXd r(n);
  Eigen::MatrixXd jac(n, n);
  NewtonReport rep;
  for (int it = 0;; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) wj[static_cast<std::size_t>(i)] = J1(w(i));
    residual(wj, rj);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = rj[static_cast<std::size_t>(i)].v;
    if (!r.allFinite()) throw NewtonDivergence("non-finite stage residual");
    rep.iterations = it;
    rep.residual = r.lpNorm<Eigen::Infinity>();
    if (rep.residual <= tol) return rep;
    if (it >= max_iter) {
      throw NewtonDivergence("stage Newton did not converge in " + std::to_string(max_iter) +
                             " iterations (residual " + std::to_string(rep.residual) + ")");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      wj[static_cast<std::size_t>(j)].d = 1.0;
      residual(wj, rj);
      for (Eigen::Index i = 0; i < n; ++i) jac(i, j) = rj[static_cast<std::size_t>(i)].d;
      wj[static_cast<std::size_t>(j)].d = 0.0;
    }
    const Eigen::VectorXd dw = jac.partialPivLu().solve(r);
    if (!dw.allFinite()) throw NewtonDivergence("singular stage Jacobian");
    w -= dw;
    // Roundoff floor: the update no longer moves w, accept a residual near tol.
    if (dw.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + w.lpNorm<Eigen::Infinity>()) && rep.residual <= 100 * tol) {
      rep.iterations = it + 1;
      return rep;
    }
  }
}

StepResult step(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x,
                const Eigen::VectorXd& u, double h, double s) {
  if (!(h > 0.0) || !(s > 0.0)) throw std::invalid_argument("step requires h > 0 and s > 0");
  const auto n = static_cast<Eigen::Index>(ode.state_dim());
  StepResult out;
  if (map.kind == MapKind::bdf) {
    throw UnsupportedCombination("'" + map.name + "' is multistep; use bdf_step or propagate");
  }
  if (map.kind == MapKind::explicit_rk) {
    const auto m = static_cast<Eigen::Index>(map.tableau->stages());
    std::vector<double> stages(static_cast<std::size_t>(m * n));
    out.x_next.resize(n);
    explicit_rk_map<double>(*map.tableau, ode, h, as_span(x), as_span(u), s,
                            std::span<double>(out.x_next.data(), static_cast<std::size_t>(n)), stages.data());
    out.stages = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(stages.data(), m, n);
    check_finite(out.x_next, map.name.c_str());
    return out;
  }

  const Eigen::Index nl = map.lifted_blocks();
  Eigen::VectorXd w(n * (nl + 1));
  for (Eigen::Index b = 0; b <= nl; ++b) w.segment(b * n, n) = x;
  const std::vector<J1> xj = constants(x);
  const std::vector<J1> uj = constants(u);
  const J1 sj(s);
  ResidualFn fn = [&](std::span<const J1> wv, std::span<J1> rv) {
    interval_residual<J1>(map, ode, h, xj, uj, sj, wv, rv);
  };
  const NewtonReport rep = newton_solve(fn, w);
  out.newton_iterations = rep.iterations;
  out.residual = rep.residual;
  out.x_next = w.segment(nl * n, n);
  out.lifted = w.head(nl * n);
  check_finite(out.x_next, map.name.c_str());

  switch (map.kind) {
    case MapKind::lifted_rk:
      out.stages.resize(nl, n);
      for (Eigen::Index i = 0; i < nl; ++i) out.stages.row(i) = w.segment(i * n, n).transpose();
      break;
    case MapKind::tr_bdf2:
      out.stages.resize(2, n);
      out.stages.row(0) = w.head(n).transpose();
      out.stages.row(1) = out.x_next.transpose();
      break;
    case MapKind::trapezoid:
      out.stages = out.x_next.transpose();
      break;
    case MapKind::midpoint:
      out.stages = (0.5 * (x + out.x_next)).transpose();
      break;
    case MapKind::avf:
      out.stages.resize(map.nodes.size(), n);
      for (Eigen::Index q = 0; q < map.nodes.size(); ++q) {
        out.stages.row(q) = ((1.0 - map.nodes(q)) * x + map.nodes(q) * out.x_next).transpose();
      }
      break;
    default:
      break;
  }
  return out;
}

StepResult step_projected(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, double h, double s) {
  StepResult out = step(map, ode, x, u, h, s);
  detail::project_quaternion(ode, out.x_next.data());
  return out;
}

Eigen::VectorXd bdf_defect(int k, const ControlledOde& ode, const std::vector<Eigen::VectorXd>& history,
                           const Eigen::VectorXd& u, double h, double s, const Eigen::VectorXd& x_next) {
  if (history.size() != static_cast<std::size_t>(k)) {
    throw InsufficientHistory("BDF" + std::to_string(k) + " needs exactly " + std::to_string(k) +
                              " prior states, got " + std::to_string(history.size()));
  }
  const auto n = static_cast<Eigen::Index>(ode.state_dim());
  Eigen::VectorXd flat(n * k);
  for (int j = 0; j < k; ++j) flat.segment(j * n, n) = history[static_cast<std::size_t>(j)];
  Eigen::VectorXd out(n);
  bdf_residual<double>(k, ode, h, as_span(flat), as_span(u), s, as_span(x_next),
                       std::span<double>(out.data(), static_cast<std::size_t>(n)));
  return out;
}

StepResult bdf_step(int k, const ControlledOde& ode, const std::vector<Eigen::VectorXd>& history,
                    const Eigen::VectorXd& u, double h, double s) {
  if (history.size() != static_cast<std::size_t>(k)) {
    throw InsufficientHistory("BDF" + std::to_string(k) + " needs exactly " + std::to_string(k) + " prior states");
  }
  const auto n = static_cast<Eigen::Index>(ode.state_dim());
  Eigen::VectorXd flat(n * k);
  for (int j = 0; j < k; ++j) flat.segment(j * n, n) = history[static_cast<std::size_t>(j)];
  const std::vector<J1> hj = constants(flat);
  const std::vector<J1> uj = constants(u);
  const J1 sj(s);
  ResidualFn fn = [&](std::span<const J1> z, std::span<J1> r) { bdf_residual<J1>(k, ode, h, hj, uj, sj, z, r); };
  Eigen::VectorXd z = history.back();
  const NewtonReport rep = newton_solve(fn, z);
  StepResult out;
  out.x_next = z;
  out.stages = z.transpose();
  out.newton_iterations = rep.iterations;
  out.residual = rep.residual;
  check_finite(out.x_next, "BDF step");
  return out;
}

StepResult avf_step(int stages, const ControlledOde& ode, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                    double h, double s) {
  if (stages != 2 && stages != 3) throw std::invalid_argument("AVF supports 2 or 3 quadrature points");
  return step(method(stages == 2 ? "avf2" : "avf3"), ode, x, u, h, s);
}

Propagation propagate(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x0,
                      const Eigen::MatrixXd& u, double h, double s, bool project) {
  Propagation out;
  out.nodes.push_back(x0);
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    const Eigen::VectorXd uk = u.col(k);
    StepResult r;
    if (map.kind == MapKind::bdf) {
      if (project) throw UnsupportedCombination("projection is not defined for method '" + map.name + "'");
      if (k < map.bdf_steps - 1) {
        r = step(method(map.startup), ode, out.nodes.back(), uk, h, s);
      } else {
        std::vector<Eigen::VectorXd> hist(out.nodes.end() - map.bdf_steps, out.nodes.end());
        r = bdf_step(map.bdf_steps, ode, hist, uk, h, s);
      }
    } else {
      r = project ? step_projected(map, ode, out.nodes.back(), uk, h, s) : step(map, ode, out.nodes.back(), uk, h, s);
    }
    out.nodes.push_back(r.x_next);
    out.lifted.push_back(r.lifted);
    out.newton_iterations.push_back(r.newton_iterations);
  }
  return out;
}

}  // namespace shotcheck
