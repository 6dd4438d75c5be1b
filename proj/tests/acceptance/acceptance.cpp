// Acceptance run: one verdict line per criterion, with the tolerances pinned
// below. Exit status is 0 when every criterion ran to a verdict (pass or
// fail); --strict makes any FAIL verdict exit 1. Crashes and unexpected
// exceptions always exit 2.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "shotcheck/bench.hpp"
#include "shotcheck/bseries.hpp"
#include "shotcheck/reference.hpp"
#include "shotcheck/solver.hpp"
#include "shotcheck/tableau.hpp"
#include "shotcheck/transcription.hpp"
#include "shotcheck/trees.hpp"
#include "shotcheck/validation.hpp"
#include "support.hpp"

using namespace shotcheck;

namespace {

// Criterion 1
constexpr double kGaussSymplecticMax = 1e-14;
constexpr double kNonSymplecticMin = 1e-3;
// Criterion 3
constexpr double kSlopeMargin = 0.3;
constexpr int kSlopePoints = 5;
constexpr double kSlopeTop = 0.2;
constexpr double kLteFloor = 1e-12;
// Criterion 4
constexpr double kGaussDriftMax = 1e-11;
constexpr double kDriftRatioMin = 1e3;
// Criterion 5
constexpr int kSandwichTriples = 10'000;
constexpr double kSumSlack = 1e-14;  // relative, for the summed J bound only
// Criterion 6
constexpr double kZeroEstimateRel = 1e-12;
constexpr double kRatioMargin = 0.2;
// Criterion 7
constexpr int kDerivativePoints = 100;
constexpr double kDerivativeRelTol = 1e-5;
constexpr double kFdStep = 1e-6;
// Criterion 8
constexpr double kFeasibilityMax = 1e-8;
// Criterion 9
constexpr double kBlowupFactor = 3.0;
constexpr double kMonotoneSlack = 1e-6;
// Criterion 10
constexpr double kStiffnessMax = 100.0;

struct Verdict {
  bool pass = false;
  std::string summary;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

void detail(const std::string& line) { std::printf("    %s\n", line.c_str()); }

// A generic mid-flight state: tilted attitude, nonzero rates and airspeed.
Eigen::VectorXd probe_state() {
  Eigen::VectorXd x(14);
  x << 1.8, 3.0, 2.0, 0.5, -0.8, -0.6, 0.2, 0.1, -0.2, 0.05, 0.95, 0.3, -0.2, 0.1;
  x.segment<4>(kQuat).normalize();
  return x;
}

Eigen::VectorXd probe_control() {
  Eigen::VectorXd u(3);
  u << 2.2, 0.3, -0.2;
  return u;
}

ReferenceOptions tight_reference() {
  ReferenceOptions o;
  o.rtol = 1e-14;
  o.atol = 1e-14;
  return o;
}

// ---------------------------------------------------------------- 1

Verdict tableau_theorems() {
  const std::vector<std::string> gauss{"gl1", "gl2", "gl3"};
  std::vector<std::string> others{"lobatto3a"};
  for (const auto& n : tableau_names()) {
    if (tableau(n).is_explicit()) others.push_back(n);
  }
  bool ok = true;
  double worst_gauss = 0.0;
  double least_other = std::numeric_limits<double>::infinity();
  for (const auto& n : gauss) worst_gauss = std::max(worst_gauss, symplecticity_residual(tableau(n)).max_abs);
  for (const auto& n : others) {
    const double r = symplecticity_residual(tableau(n)).max_abs;
    least_other = std::min(least_other, r);
    detail(fmt("%-10s max |S_ij| = %.3e", n.c_str(), r));
  }
  ok = ok && worst_gauss <= kGaussSymplecticMax && least_other > kNonSymplecticMin;
  detail(fmt("Gauss-Legendre max |S_ij| = %.3e", worst_gauss));

  int order_failures = 0;
  for (const auto& n : tableau_names()) {
    const ButcherTableau& t = tableau(n);
    const bool at = satisfies_order(t, t.order);
    const bool above = satisfies_order(t, t.order + 1);
    if (!at || above) {
      ++order_failures;
      detail(fmt("%s: order %d %s, order %d %s", n.c_str(), t.order, at ? "holds" : "FAILS", t.order + 1,
                 above ? "also holds" : "fails"));
    }
  }
  ok = ok && order_failures == 0;
  return {ok, fmt("tableau theorems: Gauss max|S| %.1e (<= %.0e), non-symplectic min|S| %.3f (> %.0e); "
                  "%zu tableaux, %d order mismatches",
                  worst_gauss, kGaussSymplecticMax, least_other, kNonSymplecticMin, tableau_names().size(),
                  order_failures)};
}

// ---------------------------------------------------------------- 2

Verdict variable_accounting() {
  const std::vector<std::pair<std::string, int>> expected{
      {"bdf4", 253}, {"bdf6", 253},   {"trapezoidal", 253}, {"rk38", 253}, {"rk4", 253},
      {"rk5", 253},  {"rk6", 253},    {"avf2", 253},        {"avf3", 253}, {"gl1", 253},
      {"trbdf2", 449}, {"gl2", 645},  {"lobatto3a", 841},   {"gl3", 841}};
  int mismatches = 0;
  for (const auto& [name, vars] : expected) {
    const int got = build_transcription(method(name), {}, ProblemConfig{})->nlp().num_vars();
    if (got != vars) {
      ++mismatches;
      detail(fmt("%s: built %d, expected %d", name.c_str(), got, vars));
    }
  }
  return {mismatches == 0, fmt("variable accounting: %zu methods at N = 15, %d mismatches", expected.size(), mismatches)};
}

// ---------------------------------------------------------------- 3

// One-step LTE |Phi - Psi| at mesh width h (dimensionless), dilation s.
double one_step_lte(const OneStepMap& map, const ControlledOde& ode, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& u, double h, double s) {
  const ReferenceOptions ref = tight_reference();
  if (map.kind == MapKind::bdf) {
    std::vector<Eigen::VectorXd> hist{x0};
    for (int j = 1; j < map.bdf_steps; ++j) hist.push_back(integrate_reference(ode, hist.back(), u, h * s, ref));
    const Eigen::VectorXd exact = integrate_reference(ode, hist.back(), u, h * s, ref);
    return (exact - bdf_step(map.bdf_steps, ode, hist, u, h, s).x_next).norm();
  }
  const Eigen::VectorXd exact = integrate_reference(ode, x0, u, h * s, ref);
  return (exact - step(map, ode, x0, u, h, s).x_next).norm();
}

double ls_slope(const std::vector<double>& lx, const std::vector<double>& ly) {
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// The decade ends at the smallest h (on a 2^(1/4) grid from kSlopeTop) whose
// LTE still clears kLteFloor, so the fit sits as deep in the asymptotic
// range as the Newton tolerance and roundoff allow.
double decade_bottom(const OneStepMap& map, const ControlledOde& ode, double s) {
  const double ratio = std::pow(2.0, 0.25);
  double h = kSlopeTop;
  while (h / ratio >= kSlopeTop / 2000.0 &&
         one_step_lte(map, ode, probe_state(), probe_control(), h / ratio, s) >= kLteFloor) {
    h /= ratio;
  }
  return h;
}

Verdict convergence_orders() {
  const auto ode = make_rocket_ode(RocketParams{});
  const double s = 5.0;
  int failures = 0;
  double worst = 0.0;
  for (const auto& name : method_names()) {
    const OneStepMap& map = method(name);
    const double top = std::min(kSlopeTop, 10.0 * decade_bottom(map, *ode, s));
    std::vector<double> lh, le;
    for (int i = 0; i < kSlopePoints; ++i) {
      const double h = top * std::pow(10.0, -static_cast<double>(i) / (kSlopePoints - 1));
      lh.push_back(std::log(h));
      le.push_back(std::log(one_step_lte(map, *ode, probe_state(), probe_control(), h, s)));
    }
    const double slope = ls_slope(lh, le);
    const double dev = std::abs(slope - (map.order + 1));
    worst = std::max(worst, dev);
    const bool ok = dev <= kSlopeMargin;
    failures += !ok;
    const double tail = (le[kSlopePoints - 2] - le[kSlopePoints - 1]) / (lh[kSlopePoints - 2] - lh[kSlopePoints - 1]);
    detail(fmt("%-11s p = %d  h in [%.2e, %.2e]  LTE %.1e .. %.1e  slope %.3f (last pair %.3f)  %s", name.c_str(),
               map.order, top, top / 10, std::exp(le.front()), std::exp(le.back()), slope, tail,
               ok ? "ok" : "OUT OF RANGE"));
  }
  return {failures == 0, fmt("convergence orders: LTE slope within %.1f of p+1 for %d/%zu maps (worst deviation %.3f)",
                             kSlopeMargin, static_cast<int>(method_names().size()) - failures, method_names().size(),
                             worst)};
}

// ---------------------------------------------------------------- 4

// The J_r-maximizing GL3 trajectory (p = 2), started from the max-fuel
// solution: admissible by construction and as aggressive as the problem allows.
struct AdversarialTrajectory {
  ProblemConfig problem;
  Trajectory t;
  SolveResult result;
};

AdversarialTrajectory adversarial_trajectory() {
  RunConfig cfg;
  AdversarialTrajectory out;
  out.problem = cfg.problem;
  out.problem.rocket.speed_smoothing = cfg.adversarial.speed_smoothing;
  ObjectiveSpec max_spec;
  max_spec.kind = ObjectiveKind::max_fuel;
  const auto max_tr = build_transcription(method("gl3"), max_spec, out.problem);
  const SolveResult start = solve(*max_tr, cfg.solver);

  ObjectiveSpec spec;
  spec.kind = ObjectiveKind::adversarial_lr;
  spec.p = 2;
  spec.r = cfg.adversarial.r;
  spec.hessian = AdversarialHessian::gauss_newton;
  const Trajectory t0 = max_tr->unpack(start.w);
  const double j0 = eval_adversarial_objective(t0.x, t0.u, t0.s, spec, out.problem).j_r;
  if (j0 > 0.0 && std::isfinite(j0)) spec.scale = 1.0 / j0;
  const auto tr = build_transcription(method("gl3"), spec, out.problem);
  out.result = AugmentedLagrangianSolver(cfg.solver).solve(tr->nlp(), start.w);
  out.t = tr->unpack(out.result.w);
  detail(fmt("adversarial GL3 solve (p = 2): max-fuel start %s, adversarial %s, J_r %.4g -> %.4g, violation %.2e",
             status_name(start.status).c_str(), status_name(out.result.status).c_str(), j0,
             eval_adversarial_objective(out.t.x, out.t.u, out.t.s, spec, out.problem).j_r, out.result.violation));
  return out;
}

Verdict invariant_preservation() {
  const AdversarialTrajectory adv = adversarial_trajectory();
  const auto ode = make_rocket_ode(adv.problem.rocket);
  const bool converged = adv.result.status == SolveStatus::optimal || adv.result.status == SolveStatus::feasible;
  double path_margin = -std::numeric_limits<double>::infinity();
  double peak_rate = 0.0;
  for (int k = 0; k < adv.t.x.cols(); ++k) {
    const Eigen::Vector3d uk = adv.t.u.col(std::min<Eigen::Index>(k, adv.t.u.cols() - 1));
    path_margin = std::max(path_margin, eval_path_constraints(adv.t.x.col(k), uk, adv.t.s, adv.problem).maxCoeff());
    peak_rate = std::max(peak_rate, adv.t.x.col(k).segment<3>(kOmega).norm());
  }
  detail(fmt("profile: s = %.4f, h = 1/14, peak |w| = %.1f deg/s, largest path row %.2e", adv.t.s,
             peak_rate * 180.0 / M_PI, path_margin));

  const Eigen::VectorXd x0 = adv.t.x.col(0);
  auto worst = [&](const char* name) {
    const auto trace = iterate_drift_trace(method(name), *ode, x0, adv.t.u, adv.t.s);
    const double d = *std::max_element(trace.begin(), trace.end());
    detail(fmt("%-10s max | |q| - 1 | = %.3e", name, d));
    return d;
  };
  const double gauss = std::max(worst("gl2"), worst("gl3"));
  double others = std::numeric_limits<double>::infinity();
  for (const char* n : {"rk4", "rk5", "lobatto3a"}) others = std::min(others, worst(n));
  const double ratio = others / std::max(gauss, std::numeric_limits<double>::min());
  const bool ok = converged && gauss <= kGaussDriftMax && others >= kDriftRatioMin * gauss;
  return {ok, fmt("invariant preservation on the adversarial trajectory (%s): Gauss drift %.2e (<= %.0e), "
                  "RK4/RK5/Lobatto min %.2e (ratio %.1e, need >= %.0e)",
                  status_name(adv.result.status).c_str(), gauss, kGaussDriftMax, others, ratio, kDriftRatioMin)};
}

// ---------------------------------------------------------------- 5

Verdict sandwich() {
  testing_support::Gen gen(20240611);
  long violations = 0;
  long checks = 0;
  const int m = 3;
  for (double r : {1.0, 5.0, 20.0}) {
    const double c = std::pow(static_cast<double>(m), 1.0 / r);
    int remaining = kSandwichTriples;
    while (remaining > 0) {
      const int intervals = std::min(remaining, gen.integer(1, 14));
      remaining -= intervals;
      double jr = 0.0;
      double jinf = 0.0;
      for (int k = 0; k < intervals; ++k) {
        double a[3];
        const int style = gen.integer(0, 3);
        for (double& v : a) {
          switch (style) {
            case 0: v = gen.uniform(0.0, 1.0); break;
            case 1: v = std::exp(gen.uniform(-20.0, 20.0)); break;  // wide dynamic range
            case 2: v = gen.integer(0, 1) ? 0.0 : gen.uniform(0.0, 5.0); break;
            default: v = 0.25 * gen.integer(0, 4); break;  // ties and zeros
          }
        }
        const double lr = lr_norm(std::span<const double>(a, 3), r);
        const double mx = max_norm(std::span<const double>(a, 3));
        checks += 2;
        violations += !(mx <= lr);
        violations += !(lr <= c * mx);
        jr += lr;
        jinf += mx;
      }
      checks += 2;
      violations += !(jinf <= jr);
      violations += !(jr <= c * jinf * (1.0 + kSumSlack));
    }
  }
  return {violations == 0, fmt("sandwich bounds: %d triples per r in {1, 5, 20}, %ld checks, %ld violations",
                               kSandwichTriples, checks, violations)};
}

// ---------------------------------------------------------------- 6

Verdict bseries_consistency() {
  bool ok = true;
  const int expected_counts[] = {1, 1, 2, 4, 9};
  std::string counts;
  for (int n = 1; n <= 5; ++n) {
    const auto got = enumerate_trees(n).size();
    counts += (n > 1 ? "," : "") + std::to_string(got);
    ok = ok && got == static_cast<std::size_t>(expected_counts[n - 1]);
  }

  const auto ode = make_rocket_ode(RocketParams{});
  const double s = 5.0;
  const Eigen::VectorXd x = probe_state();
  const Eigen::VectorXd u = probe_control();

  // Order-6 maps: the estimate vanishes relative to the scale of its own terms.
  double worst_zero = 0.0;
  for (const char* name : {"rk6", "gl3"}) {
    const PrincipalError pe = principal_error(tableau(name), *ode, x, u, 0.04, s);
    double scale = 0.0;
    for (const auto& t : pe.terms) scale += std::pow(0.04 * s, 5) * t.f_norm / (t.sigma * t.gamma);
    const double rel = pe.estimate.norm() / scale;
    worst_zero = std::max(worst_zero, rel);
    detail(fmt("%-4s |estimate| = %.2e, relative to term scale %.2e", name, pe.estimate.norm(), rel));
  }
  ok = ok && worst_zero <= kZeroEstimateRel;

  double worst_dev = 0.0;
  for (const char* name : {"rk4", "gl2"}) {
    double prev = 0.0;
    for (double h : {0.04, 0.01}) {
      const Eigen::VectorXd exact = integrate_reference(*ode, x, u, h * s, tight_reference());
      const double measured = (exact - step(method(name), *ode, x, u, h, s).x_next).norm();
      const double estimate = principal_error_estimate(tableau(name), *ode, x, u, h, s).norm();
      const double ratio = estimate / measured;
      detail(fmt("%-4s h = %.2f  measured %.3e  estimate %.3e  ratio %.4f", name, h, measured, estimate, ratio));
      prev = ratio;
    }
    worst_dev = std::max(worst_dev, std::abs(prev - 1.0));
  }
  ok = ok && worst_dev <= kRatioMargin;
  return {ok, fmt("B-series: tree counts %s; order-6 estimate %.1e of term scale; RK4/GL2 ratio at h = 0.01 within "
                  "%.3f of 1 (need <= %.1f)",
                  counts.c_str(), worst_zero, worst_dev, kRatioMargin)};
}

// ---------------------------------------------------------------- 7

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Verdict derivatives() {
  testing_support::Gen gen(7031);
  double worst_jac = 0.0;
  double worst_grad = 0.0;
  int adversarial_points = 0;
  const auto& names = method_names();
  for (int point = 0; point < kDerivativePoints; ++point) {
    ProblemConfig cfg;
    ObjectiveSpec spec;
    std::string name = names[static_cast<std::size_t>(point) % names.size()];
    if (point % 4 == 3) {
      name = "gl3";
      spec.kind = ObjectiveKind::adversarial_lr;
      spec.p = 2 + point % 3;
      spec.r = std::array<double, 3>{1.0, 5.0, 20.0}[static_cast<std::size_t>(point / 4) % 3];
      spec.scale = 0.5;
      cfg.rocket.speed_smoothing = 0.05;
      ++adversarial_points;
    } else {
      spec.kind = std::array<ObjectiveKind, 3>{ObjectiveKind::min_fuel, ObjectiveKind::max_fuel,
                                               ObjectiveKind::feasibility}[static_cast<std::size_t>(point) % 3];
    }
    const auto tr = build_transcription(method(name), spec, cfg);
    const Nlp& nlp = tr->nlp();
    Eigen::VectorXd w = tr->initial_guess();
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      w(j) += 0.05 * std::max(1.0, std::abs(w(j))) * gen.uniform(-1.0, 1.0);
      w(j) = std::clamp(w(j), nlp.x_lo(j), nlp.x_hi(j));
    }
    const Eigen::MatrixXd jac = Eigen::MatrixXd(nlp.jacobian(w));
    const Eigen::VectorXd grad = nlp.gradient(w);
    double pj = 0.0;
    double pg = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      const double d = kFdStep * std::max(1.0, std::abs(w(j)));
      Eigen::VectorXd wp = w;
      Eigen::VectorXd wm = w;
      wp(j) += d;
      wm(j) -= d;
      const Eigen::VectorXd col = (nlp.constraints(wp) - nlp.constraints(wm)) / (2.0 * d);
      for (Eigen::Index i = 0; i < col.size(); ++i) pj = std::max(pj, rel_err(jac(i, j), col(i)));
      pg = std::max(pg, rel_err(grad(j), (nlp.objective(wp) - nlp.objective(wm)) / (2.0 * d)));
    }
    if (pj > kDerivativeRelTol || pg > kDerivativeRelTol) {
      detail(fmt("point %d (%s, %s): jacobian %.2e, gradient %.2e", point, name.c_str(),
                 objective_name(spec.kind).c_str(), pj, pg));
    }
    worst_jac = std::max(worst_jac, pj);
    worst_grad = std::max(worst_grad, pg);
  }
  const bool ok = worst_jac <= kDerivativeRelTol && worst_grad <= kDerivativeRelTol;
  return {ok, fmt("derivatives vs central differences: %d points (%d adversarial), worst jacobian %.2e, gradient %.2e "
                  "(<= %.0e)",
                  kDerivativePoints, adversarial_points, worst_jac, worst_grad, kDerivativeRelTol)};
}

// ---------------------------------------------------------------- 8

struct SolvedRuns {
  SweepTable min_fuel;
  SweepTable max_fuel;
};

const char* flag(bool b) { return b ? "Y" : "n"; }

// Solved once, shared by criteria 8 and 10.
const SolvedRuns& solved_runs() {
  static const SolvedRuns runs = [] {
    RunConfig cfg;
    SolvedRuns r;
    r.min_fuel = run_integrator_sweep(ObjectiveKind::min_fuel, {"gl2", "gl3"}, cfg);
    r.max_fuel = run_integrator_sweep(ObjectiveKind::max_fuel, method_names(), cfg);
    return r;
  }();
  return runs;
}

Verdict end_to_end() {
  const SolvedRuns& runs = solved_runs();
  bool ok = true;
  std::string cells;
  for (const auto& row : runs.min_fuel.rows) {
    const bool good = row.converged() && row.violation <= kFeasibilityMax && row.eps_ol <= kOpenLoopTolerance;
    ok = ok && good;
    detail(fmt("min-fuel %-4s status %-13s violation %.2e  eps_OL %.2e  s %.4f  m_K %.5f", row.method.c_str(),
               row.status.c_str(), row.violation, row.eps_ol, row.s,
               row.solution ? row.solution->x(kMass, row.solution->x.cols() - 1) : NAN));
    cells += fmt("%s%s viol %.1e eps %.1e", cells.empty() ? "" : ", ", row.method.c_str(), row.violation, row.eps_ol);
  }

  detail("max-fuel sweep (ours | published): Optim OL Ref-OL");
  int agree = 0;
  for (const auto& row : runs.max_fuel.rows) {
    const auto pub = published_outcome(row.method);
    const bool ref = row.ref_ol_pass.value_or(false);
    const bool same = pub && pub->max_optim == row.converged() && pub->max_ol == row.ol_pass && pub->max_ref_ol == ref;
    agree += same;
    detail(fmt("  %-11s %s %s %s | %s %s %s   %s", row.method.c_str(), flag(row.converged()), flag(row.ol_pass),
               flag(ref), flag(pub && pub->max_optim), flag(pub && pub->max_ol), flag(pub && pub->max_ref_ol),
               row.status.c_str()));
  }
  detail(fmt("max-fuel rows matching the published flags: %d/%zu (reported, not asserted)", agree,
             runs.max_fuel.rows.size()));
  return {ok, fmt("min-fuel end to end: %s (need viol <= %.0e, eps_OL <= %.0e)", cells.c_str(), kFeasibilityMax,
                  kOpenLoopTolerance)};
}

// ---------------------------------------------------------------- 9

Verdict divert_trends() {
  RunConfig cfg;
  const auto& d = cfg.divert.distances;
  const bool six_ascending = d.size() == 6 && std::is_sorted(d.begin(), d.end()) &&
                             std::adjacent_find(d.begin(), d.end()) == d.end();
  const DivertTable table = run_divert_sweep({"gl2", "rk5"}, d, cfg);
  std::vector<const DivertRow*> gl2, rk5;
  for (const auto& row : table.rows) {
    (row.method == "gl2" ? gl2 : rk5).push_back(&row);
    detail(fmt("%-4s d = %.2f  status %-13s iterations %5d  s %.4f  dt %.4f  eps_OL %.2e", row.method.c_str(),
               row.distance, row.status.c_str(), row.iterations, row.s, row.step, row.eps_ol));
  }

  bool monotone = true;
  double prev_s = -std::numeric_limits<double>::infinity();
  for (const DivertRow* r : gl2) {
    if (!r->completed()) continue;
    if (r->s < prev_s - kMonotoneSlack) monotone = false;
    prev_s = r->s;
  }

  const DivertRow* last_gl2 = nullptr;
  std::size_t last_idx = 0;
  for (std::size_t i = 0; i < gl2.size(); ++i) {
    if (gl2[i]->completed()) {
      last_gl2 = gl2[i];
      last_idx = i;
    }
  }
  bool blowup = false;
  std::string blowup_text = "no GL2 cell completed";
  if (last_gl2 && last_idx < rk5.size()) {
    const DivertRow& r = *rk5[last_idx];
    const double ratio = static_cast<double>(r.iterations) / std::max(1, last_gl2->iterations);
    const bool capped = r.status == "iteration_cap" || r.iterations >= cfg.solver.max_iter;
    blowup = capped || ratio >= kBlowupFactor;
    blowup_text = fmt("at d = %.2f RK5 %d vs GL2 %d iterations (x%.1f, RK5 %s)", last_gl2->distance, r.iterations,
                      last_gl2->iterations, ratio, r.status.c_str());
  }
  const bool ok = six_ascending && monotone && blowup;
  return {ok, fmt("divert trends: six ascending distances %s; GL2 s non-decreasing %s; %s (need x%.0f or cap)",
                  six_ascending ? "yes" : "no", monotone ? "yes" : "no", blowup_text.c_str(), kBlowupFactor)};
}

// ---------------------------------------------------------------- 10

Verdict stiffness() {
  const SolvedRuns& runs = solved_runs();
  const auto ode = make_rocket_ode(RocketParams{});
  double worst = 0.0;
  int trajectories = 0;
  auto scan = [&](const SweepTable& table, const char* label) {
    for (const auto& row : table.rows) {
      if (row.method != "gl2" && row.method != "gl3") continue;
      if (!row.converged() || !row.ol_pass || !row.solution) continue;
      const StiffnessResult r = stiffness_ratio(*ode, row.solution->x, row.solution->u);
      std::size_t at = 0;
      for (std::size_t k = 0; k < r.per_node.size(); ++k) {
        if (r.per_node[k] > r.per_node[at]) at = k;
      }
      detail(fmt("%s %-4s stiffness ratio %.1f (peak at node %zu)%s", label, row.method.c_str(), r.ratio, at,
                 r.degenerate ? ", degenerate nodes present" : ""));
      worst = std::max(worst, r.ratio);
      ++trajectories;
    }
  };
  scan(runs.min_fuel, "min-fuel");
  scan(runs.max_fuel, "max-fuel");
  const bool ok = trajectories >= 2 && worst < kStiffnessMax;
  return {ok, fmt("stiffness: max ratio %.1f over %d solved GL2/GL3 trajectories (need < %.0f)", worst, trajectories,
                  kStiffnessMax)};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::vector<bool> selected(10, true);
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::fill(selected.begin(), selected.end(), false);
      std::string list = argv[++i];
      for (char& c : list) c = c == ',' ? ' ' : c;
      std::istringstream in(list);
      for (int n; in >> n;) {
        if (n >= 1 && n <= 10) selected[static_cast<std::size_t>(n - 1)] = true;
      }
    } else {
      std::fprintf(stderr, "usage: acceptance [--strict] [--only N[,N...]]\n");
      return 2;
    }
  }
  const std::vector<std::function<Verdict()>> criteria{
      tableau_theorems, variable_accounting, convergence_orders, invariant_preservation, sandwich,
      bseries_consistency, derivatives, end_to_end, divert_trends, stiffness};
  int failed = 0;
  int ran = 0;
  try {
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      if (!selected[i]) continue;
      const auto t0 = std::chrono::steady_clock::now();
      const Verdict v = criteria[i]();
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      ++ran;
      failed += !v.pass;
      std::printf("%s %2zu  %s  [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, v.summary.c_str(), secs);
      std::fflush(stdout);
    }
  } catch (const std::exception& e) {
    std::printf("ERROR: %s\n", e.what());
    return 2;
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return strict && failed > 0 ? 1 : 0;
}
