#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "shotcheck/transcription.hpp"
#include "support.hpp"

using namespace shotcheck;
using Catch::Approx;
using testing_support::fd_gradient;
using testing_support::fd_jacobian;
using testing_support::Gen;

namespace {

// A point near the initial guess, inside the variable bounds.
Eigen::VectorXd perturbed_guess(const Transcription& tr, Gen& gen, double amp) {
  Eigen::VectorXd w = tr.initial_guess();
  const Nlp& nlp = tr.nlp();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (nlp.x_lo(i) == nlp.x_hi(i)) continue;
    w(i) += amp * gen.uniform(-1.0, 1.0);
    w(i) = std::clamp(w(i), nlp.x_lo(i), nlp.x_hi(i));
  }
  return w;
}

Eigen::MatrixXd dense_jacobian(const Nlp& nlp, const Eigen::VectorXd& w) { return Eigen::MatrixXd(nlp.jacobian(w)); }

double naive_lr(const std::vector<double>& a, double r) {
  double sum = 0.0;
  for (double v : a) sum += std::pow(v, r);
  return std::pow(sum, 1.0 / r);
}

}  // namespace

TEST_CASE("decision-vector sizes for every method") {
  const std::map<std::string, int> expected{{"bdf4", 253},   {"bdf6", 253}, {"trapezoidal", 253}, {"rk38", 253},
                                            {"rk4", 253},    {"rk5", 253},  {"rk6", 253},         {"avf2", 253},
                                            {"avf3", 253},   {"gl1", 253},  {"trbdf2", 449},      {"gl2", 645},
                                            {"lobatto3a", 841}, {"gl3", 841}};
  const ProblemConfig cfg;
  for (const auto& [name, vars] : expected) {
    const auto tr = build_transcription(method(name), {}, cfg);
    INFO(name);
    CHECK(tr->nlp().num_vars() == vars);
    CHECK(tr->nlp().var_names.size() == static_cast<std::size_t>(vars));
    CHECK(tr->nlp().jacobian_nnz() > 0);
  }
}

TEST_CASE("layout indices are a bijection onto the decision vector") {
  VariableLayout l;
  l.nodes = 15;
  l.lifted = 3;
  std::vector<int> seen(static_cast<std::size_t>(l.total()), 0);
  for (int k = 0; k < l.nodes; ++k) {
    for (int i = 0; i < 14; ++i) ++seen[static_cast<std::size_t>(l.x(k, i))];
  }
  for (int k = 0; k + 1 < l.nodes; ++k) {
    for (int i = 0; i < 3; ++i) ++seen[static_cast<std::size_t>(l.u(k, i))];
    for (int b = 0; b < l.lifted; ++b) {
      for (int i = 0; i < 14; ++i) ++seen[static_cast<std::size_t>(l.y(k, b, i))];
    }
  }
  ++seen[static_cast<std::size_t>(l.s())];
  for (int c : seen) CHECK(c == 1);
}

TEST_CASE("pack and unpack are inverse") {
  const auto tr = build_transcription(method("gl2"), {}, ProblemConfig{});
  Gen gen(71);
  const Eigen::VectorXd w = perturbed_guess(*tr, gen, 0.1);
  CHECK((tr->pack(tr->unpack(w)) - w).norm() == 0.0);
}

TEST_CASE("initial guess respects the variable bounds and boundary conditions") {
  const ProblemConfig cfg;
  for (const auto& name : method_names()) {
    const auto tr = build_transcription(method(name), {}, cfg);
    const Eigen::VectorXd w = tr->initial_guess();
    const Nlp& nlp = tr->nlp();
    INFO(name);
    CHECK(((w - nlp.x_lo).array() >= 0.0).all());
    CHECK(((nlp.x_hi - w).array() >= 0.0).all());
    const Trajectory t = tr->unpack(w);
    CHECK((t.x.col(0) - cfg.initial_state()).norm() == 0.0);
    CHECK(t.x.col(14).segment<3>(kPos) == cfg.boundary.r_final);
  }
}

TEST_CASE("constraint Jacobians match central differences for every method") {
  const ProblemConfig cfg;
  Gen gen(72);
  for (const auto& name : method_names()) {
    const auto tr = build_transcription(method(name), {}, cfg);
    const Nlp& nlp = tr->nlp();
    const Eigen::VectorXd w = perturbed_guess(*tr, gen, 0.05);
    const Eigen::MatrixXd jac = dense_jacobian(nlp, w);
    const Eigen::MatrixXd fd = fd_jacobian([&](const Eigen::VectorXd& v) { return nlp.constraints(v); }, w);
    INFO(name);
    CHECK(testing_support::max_rel_error(jac, fd) < 1e-6);
  }
}

TEST_CASE("Lagrangian Hessian matches differences of the Lagrangian gradient") {
  Gen gen(73);
  for (const char* name : {"rk4", "gl2", "bdf4", "trbdf2"}) {
    ObjectiveSpec spec;
    spec.kind = ObjectiveKind::min_fuel;
    const auto tr = build_transcription(method(name), spec, ProblemConfig{});
    const Nlp& nlp = tr->nlp();
    const Eigen::VectorXd w = perturbed_guess(*tr, gen, 0.05);
    const Eigen::VectorXd lambda = gen.vector(nlp.num_constraints(), -1.0, 1.0);
    const double sigma = 0.7;
    std::vector<double> vals;
    nlp.hessian_values(w, sigma, lambda, vals);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nlp.num_vars(), nlp.num_vars());
    const auto& st = nlp.hessian_structure();
    for (std::size_t e = 0; e < st.size(); ++e) {
      REQUIRE(st[e].first >= st[e].second);
      h(st[e].first, st[e].second) += vals[e];
    }
    auto grad_l = [&](const Eigen::VectorXd& v) {
      return Eigen::VectorXd(sigma * nlp.gradient(v) + nlp.jacobian(v).transpose() * lambda);
    };
    // A random subset of columns keeps the cost down.
    for (int trial = 0; trial < 40; ++trial) {
      const int j = gen.integer(0, nlp.num_vars() - 1);
      const double step = 1e-6 * std::max(1.0, std::abs(w(j)));
      Eigen::VectorXd wp = w;
      Eigen::VectorXd wm = w;
      wp(j) += step;
      wm(j) -= step;
      const Eigen::VectorXd col = (grad_l(wp) - grad_l(wm)) / (2.0 * step);
      for (int i = 0; i < nlp.num_vars(); ++i) {
        const double exact = i >= j ? h(i, j) : h(j, i);
        INFO(name << " (" << i << ", " << j << ")");
        CHECK(std::abs(exact - col(i)) < 1e-5 * std::max(1.0, std::abs(col(i))));
      }
    }
  }
}

TEST_CASE("objective gradients match central differences") {
  Gen gen(74);
  for (ObjectiveKind kind : {ObjectiveKind::min_fuel, ObjectiveKind::max_fuel, ObjectiveKind::feasibility}) {
    ObjectiveSpec spec;
    spec.kind = kind;
    const auto tr = build_transcription(method("rk4"), spec, ProblemConfig{});
    const Nlp& nlp = tr->nlp();
    const Eigen::VectorXd w = perturbed_guess(*tr, gen, 0.05);
    const Eigen::VectorXd fd = fd_gradient([&](const Eigen::VectorXd& v) { return nlp.objective(v); }, w);
    CHECK((nlp.gradient(w) - fd).lpNorm<Eigen::Infinity>() < 1e-8);
  }
  ObjectiveSpec minf;
  const auto tr = build_transcription(method("rk4"), minf, ProblemConfig{});
  const Eigen::VectorXd w = tr->initial_guess();
  CHECK(tr->nlp().objective(w) == Approx(-tr->unpack(w).x(kMass, 14)));
}

TEST_CASE("adversarial objective equals an independent J_r at exact stages") {
  ProblemConfig cfg;
  cfg.rocket.speed_smoothing = 0.05;
  Gen gen(75);
  for (int p : {2, 3, 4}) {
    ObjectiveSpec spec;
    spec.kind = ObjectiveKind::adversarial_lr;
    spec.p = p;
    spec.r = 20.0;
    spec.scale = 0.3;
    const auto tr = build_transcription(method("gl3"), spec, cfg);
    Trajectory t = tr->unpack(perturbed_guess(*tr, gen, 0.02));
    const auto ode = make_rocket_ode(cfg.rocket);
    const double h = 1.0 / 14.0;
    double jr = 0.0;
    for (int k = 0; k < 14; ++k) {
      const StepResult st = step(method("gl3"), *ode, t.x.col(k), t.u.col(k), h, t.s);
      std::vector<double> a;
      for (int i = 0; i < 3; ++i) {
        t.y.col(3 * k + i) = st.stages.row(i).transpose();
        const auto d = state_time_derivatives(*ode, st.stages.row(i).transpose(), t.u.col(k), p + 1);
        a.push_back(std::pow(t.s, p + 1) * d[static_cast<std::size_t>(p)].norm());
      }
      jr += naive_lr(a, spec.r);
    }
    const Eigen::VectorXd w = tr->pack(t);
    INFO("p = " << p);
    CHECK(tr->nlp().objective(w) == Approx(-spec.scale * jr).epsilon(1e-10));
    const AdversarialValue av = eval_adversarial_objective(t.x, t.u, t.s, spec, cfg);
    CHECK(av.j_r == Approx(jr).epsilon(1e-8));
    CHECK(av.j_inf <= av.j_r);
  }
}

TEST_CASE("adversarial gradient matches central differences") {
  ProblemConfig cfg;
  cfg.rocket.speed_smoothing = 0.05;
  Gen gen(76);
  ObjectiveSpec spec;
  spec.kind = ObjectiveKind::adversarial_lr;
  spec.p = 3;
  const auto tr = build_transcription(method("gl3"), spec, cfg);
  const Nlp& nlp = tr->nlp();
  const Eigen::VectorXd w = perturbed_guess(*tr, gen, 0.02);
  const Eigen::VectorXd g = nlp.gradient(w);
  const Eigen::VectorXd fd = fd_gradient([&](const Eigen::VectorXd& v) { return nlp.objective(v); }, w);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    CHECK(std::abs(g(i) - fd(i)) < 1e-5 * std::max(1.0, std::abs(fd(i))));
  }
}

TEST_CASE("adversarial objective needs GL3 stages") {
  ObjectiveSpec spec;
  spec.kind = ObjectiveKind::adversarial_lr;
  CHECK_THROWS_AS(build_transcription(method("rk4"), spec, ProblemConfig{}), UnsupportedCombination);
  spec.p = 5;
  CHECK_THROWS_AS(build_transcription(method("gl3"), spec, ProblemConfig{}), UnsupportedCombination);
}

TEST_CASE("stable l_r norm agrees with the naive formula and tends to the max") {
  Gen gen(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(gen.integer(1, 8)));
    for (double& v : a) v = gen.uniform(0.0, 3.0);
    const double r = gen.uniform(1.0, 30.0);
    CHECK(lr_norm(a, r) == Approx(naive_lr(a, r)).epsilon(1e-12));
    CHECK(lr_norm(a, r) >= max_norm(a) - 1e-15);
    CHECK(lr_norm(a, r) <= std::pow(static_cast<double>(a.size()), 1.0 / r) * max_norm(a) * (1.0 + 1e-14));
  }
  // Scaling far beyond the naive formula's range.
  const std::vector<double> big{1e200, 2e200};
  CHECK(lr_norm(big, 20.0) == Approx(2e200 * std::pow(1.0 + std::pow(0.5, 20.0), 0.05)));
  CHECK_THROWS(lr_norm(std::vector<double>{-1.0}, 2.0));
}

TEST_CASE("reporting path constraints at hand-picked states") {
  const ProblemConfig cfg;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(14);
  x(kMass) = 1.5;
  x(kPos) = 1.0;
  x(kPos + 1) = 1.0;
  x(kQuat + 3) = 1.0;
  x(kVel) = -2.0;
  const Eigen::Vector3d u(2.0, 0.0, 0.0);
  const Eigen::VectorXd g = eval_path_constraints(x, u, 5.0, cfg);
  REQUIRE(g.size() == kPathRows);
  CHECK(path_constraint_names().size() == static_cast<std::size_t>(kPathRows));
  CHECK(g(0) == Approx(-0.5));
  CHECK(g(1) == Approx(1.0 - std::tan(70.0 * M_PI / 180.0)));
  CHECK(g(4) == Approx(-3.0));
  CHECK(g(5) == Approx(2.0 * std::cos(20.0 * M_PI / 180.0) - 2.0));
  CHECK(g(6) == Approx(-1.0));
  CHECK(g(7) == Approx(-1.0));
  CHECK(g(8) == Approx(-2.0));
  CHECK(g(9) == Approx(-3.0));
}

TEST_CASE("dynamics residual vanishes on a propagated trajectory") {
  const ProblemConfig cfg;
  for (const char* name : {"rk4", "gl2", "trbdf2", "bdf6", "avf2"}) {
    const auto tr = build_transcription(method(name), {}, cfg);
    Trajectory t = tr->unpack(tr->initial_guess());
    const Propagation p = propagate(method(name), *tr->ode(), t.x.col(0), t.u, tr->h(), t.s);
    for (int k = 0; k < 15; ++k) t.x.col(k) = p.nodes[static_cast<std::size_t>(k)];
    for (std::size_t k = 0; k < p.lifted.size(); ++k) {
      const int nl = tr->layout().lifted;
      for (int b = 0; b < nl; ++b) {
        t.y.col(static_cast<Eigen::Index>(k) * nl + b) = p.lifted[k].segment(b * 14, 14);
      }
    }
    INFO(name);
    CHECK(tr->dynamics_residual(tr->pack(t)).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}
