// shotcheck: transcription benchmark driver.
//
//   shotcheck sweep --objective max-fuel --methods rk6,gl2,gl3
//   shotcheck divert --methods gl2,rk5,rk6 --distances 0.5,1,1.5
//   shotcheck validate --solution sol.json --method gl2
//   shotcheck lte --method rk4 --trajectory sol.json
//   shotcheck tableau --check gl2
//   shotcheck export --method gl3 --objective min-fuel
//   shotcheck nlp-eval --problem p.nlp --request req.txt --response resp.txt
//
// Exit codes: 0 success (pass-flag failures included), 1 a cell or the
// command failed while running, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shotcheck/bench.hpp"
#include "shotcheck/bseries.hpp"
#include "shotcheck/config.hpp"
#include "shotcheck/export.hpp"
#include "shotcheck/integrators.hpp"
#include "shotcheck/tableau.hpp"
#include "shotcheck/validation.hpp"

namespace fs = std::filesystem;
using namespace shotcheck;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigUsageError : UsageError {
  using UsageError::UsageError;
};

struct Globals {
  std::string config_path;
  std::string output_dir = "runs";
  int jobs = 1;
  std::optional<double> feas_tol;
  std::optional<double> opt_tol;
  std::optional<int> max_iter;
  bool seedless = false;  // reserved: nothing in the pipeline is randomized
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

void write_json(const fs::path& file, const nlohmann::json& doc) { write_text(file, doc.dump(2) + "\n"); }

RunConfig load_config(const Globals& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) {
    if (!fs::exists(g.config_path)) throw ConfigUsageError("config file '" + g.config_path + "' does not exist");
    try {
      cfg = load_run_config(g.config_path);
    } catch (const ConfigError& e) {
      throw ConfigUsageError(e.what());
    }
  }
  if (g.feas_tol) cfg.solver.feas_tol = *g.feas_tol;
  if (g.opt_tol) cfg.solver.opt_tol = *g.opt_tol;
  if (g.max_iter) cfg.solver.max_iter = *g.max_iter;
  try {
    return run_config_from_json(to_json(cfg));
  } catch (const ConfigError& e) {
    throw ConfigUsageError(e.what());
  }
}

fs::path start_run(const Globals& g, const RunConfig& cfg, const std::string& label) {
  const fs::path dir = make_run_directory(g.output_dir, label);
  write_json(dir / "effective-config.json", to_json(cfg));
  return dir;
}

std::vector<std::string> resolve_methods(const std::vector<std::string>& requested, const RunConfig& cfg) {
  std::vector<std::string> out = requested;
  if (out.empty()) out = cfg.bench.methods;
  if (out.empty()) out = method_names();
  for (const auto& m : out) {
    if (!has_method(m)) throw UsageError("unknown method '" + m + "'");
  }
  return out;
}

const OneStepMap& require_method(const std::string& name) {
  if (!has_method(name)) throw UsageError("unknown method '" + name + "'");
  return method(name);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    nlohmann::json doc;
    in >> doc;
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// Accepts a bare solution document or one wrapped as {"solution": ...}.
Trajectory read_solution(const std::string& path) {
  nlohmann::json doc = read_json_file(path);
  if (doc.contains("solution")) doc = doc["solution"];
  try {
    return solution_from_json(doc);
  } catch (const std::invalid_argument& e) {
    throw UsageError(path + ": " + e.what());
  }
}

std::string ref_flag(const std::optional<bool>& b) { return b ? (*b ? "pass" : "FAIL") : "n/a"; }

int cmd_sweep(const Globals& g, const std::string& objective, const std::vector<std::string>& requested,
              const std::vector<int>& orders_opt, std::optional<double> r_opt) {
  const RunConfig cfg = load_config(g);
  ObjectiveKind kind;
  try {
    kind = parse_objective(objective);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  BenchOptions opts;
  opts.jobs = g.jobs;

  if (kind == ObjectiveKind::adversarial_lr) {
    const std::vector<int> orders = orders_opt.empty() ? cfg.adversarial.orders : orders_opt;
    for (int p : orders) {
      if (p < 2 || p > 4) throw UsageError("--orders entries must lie in {2, 3, 4}");
    }
    const double r = r_opt.value_or(cfg.adversarial.r);
    if (!(r >= 1.0)) throw UsageError("--r must be >= 1");
    const fs::path dir = start_run(g, cfg, "adversarial");
    const AdversarialTable table = run_adversarial_comparison(orders, r, cfg, opts);
    write_text(dir / "adversarial.csv", to_csv(table));
    write_json(dir / "adversarial.json", to_json(table));
    bool errored = false;
    std::cout << "max-fuel: " << table.max_fuel_status << ", min-fuel: " << table.min_fuel_status << "\n";
    for (const auto& row : table.rows) {
      errored = errored || row.status == "error";
      std::cout << "p=" << row.p << " r=" << row.r << "  " << row.status << "  J_r(best) " << fmt("%.6g", row.jr_best)
                << "  max-fuel " << fmt("%.1f%%", row.pct_max_fuel) << "  min-fuel " << fmt("%.2f%%", row.pct_min_fuel)
                << (row.error.empty() ? "" : "  error: " + row.error) << "\n";
    }
    std::cout << "output: " << dir.string() << "\n";
    return errored ? kExitFailure : 0;
  }

  const std::vector<std::string> methods = resolve_methods(requested, cfg);
  const fs::path dir = start_run(g, cfg, "sweep-" + objective_name(kind));
  const SweepTable table = run_integrator_sweep(kind, methods, cfg, opts);
  write_text(dir / "sweep.csv", to_csv(table));
  write_json(dir / "sweep.json", to_json(table));
  bool errored = false;
  for (const auto& row : table.rows) {
    errored = errored || row.status == "error";
    std::cout << row.method << "  vars " << row.vars << "  " << row.status;
    if (row.status != "error") {
      std::cout << "  it " << row.iterations << "  eps_OL " << fmt("%.3e", row.eps_ol) << " ("
                << (row.ol_pass ? "pass" : "FAIL") << ")  Ref-OL " << ref_flag(row.ref_ol_pass) << "  "
                << fmt("%.2fs", row.total_seconds);
    }
    if (!row.error.empty()) std::cout << "  error: " << row.error;
    std::cout << "\n";
  }
  std::cout << "reference: " << (table.reference_method.empty() ? "none" : table.reference_method) << "\n";
  std::cout << "output: " << dir.string() << "\n";
  return errored ? kExitFailure : 0;
}

int cmd_divert(const Globals& g, const std::vector<std::string>& requested, const std::vector<double>& distances_opt) {
  const RunConfig cfg = load_config(g);
  const std::vector<std::string> methods = resolve_methods(requested, cfg);
  const std::vector<double> distances = distances_opt.empty() ? cfg.divert.distances : distances_opt;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] > 0.0) || (i > 0 && !(distances[i] > distances[i - 1]))) {
      throw UsageError("--distances must be positive and ascending");
    }
  }
  BenchOptions opts;
  opts.jobs = g.jobs;
  const fs::path dir = start_run(g, cfg, "divert");
  const DivertTable table = run_divert_sweep(methods, distances, cfg, opts);
  write_text(dir / "divert.csv", to_csv(table));
  write_json(dir / "divert.json", to_json(table));
  bool errored = false;
  for (const auto& row : table.rows) {
    errored = errored || row.status == "error";
    std::cout << row.method << "  d " << row.distance << "  " << row.status << "  it " << row.iterations << "  s "
              << fmt("%.4f", row.s) << "  " << fmt("%.2fs", row.total_seconds)
              << (row.error.empty() ? "" : "  error: " + row.error) << "\n";
  }
  for (const auto& s : table.summary) {
    std::cout << s.method << "  completed " << s.completed << "/" << distances.size() << "  mean it "
              << fmt("%.1f", s.mean_iterations) << "  mean time " << fmt("%.2fs", s.mean_total_seconds) << "\n";
  }
  std::cout << "output: " << dir.string() << "\n";
  return errored ? kExitFailure : 0;
}

int cmd_validate(const Globals& g, const std::string& solution, const std::string& name, const std::string& reference) {
  const RunConfig cfg = load_config(g);
  const OneStepMap& map = require_method(name);
  const Trajectory t = read_solution(solution);
  std::optional<Trajectory> ref;
  if (!reference.empty()) ref = read_solution(reference);
  const OdePtr ode = make_rocket_ode(cfg.problem.rocket);
  const fs::path dir = start_run(g, cfg, "validate-" + name);
  const ValidationReport rep =
      validate_solution(map, *ode, t.x, t.u, t.s, ref ? &ref->u : nullptr, ref ? &ref->s : nullptr);
  write_json(dir / "validation.json", to_json(rep));
  write_text(dir / "trace.csv", trace_csv(rep));
  std::cout << name << "  eps_OL " << fmt("%.3e", rep.eps_ol) << " (" << (rep.ol_pass ? "pass" : "FAIL") << ")  Ref-OL "
            << ref_flag(rep.ref_ol_pass) << "  stiffness ratio " << fmt("%.2f", rep.stiffness.ratio) << "\n";
  std::cout << "output: " << dir.string() << "\n";
  return 0;
}

int cmd_lte(const Globals& g, const std::string& name, const std::string& trajectory) {
  const RunConfig cfg = load_config(g);
  const OneStepMap& map = require_method(name);
  const Trajectory t = read_solution(trajectory);
  const OdePtr ode = make_rocket_ode(cfg.problem.rocket);
  const fs::path dir = start_run(g, cfg, "lte-" + name);
  ReferenceOptions ref_opts;
  ref_opts.rtol = ref_opts.atol = 1e-12;
  const Eigen::MatrixXd x_ref = reference_trajectory(*ode, t.x.col(0), t.u, t.s, ref_opts);
  const LteTrace lte = isolate_lte(map, *ode, x_ref, t.u, t.s);
  const double h = 1.0 / static_cast<double>(t.u.cols());

  std::ostringstream steps;
  steps << "# norm: 2-norm of the full normalized state\n";
  steps << "step,tau,lte,lte_h5_estimate\n";
  for (std::size_t k = 0; k < lte.measured.size(); ++k) {
    steps << k << ',' << fmt("%.10e", static_cast<double>(k) * h) << ',' << fmt("%.10e", lte.measured[k]) << ','
          << fmt("%.10e", lte.estimate[k]) << '\n';
  }
  write_text(dir / "lte.csv", steps.str());

  if (map.tableau && map.tableau->order >= 4) {
    std::ostringstream terms;
    terms << "step,tree,sigma,gamma,phi,residual,f_norm,contribution_norm\n";
    for (Eigen::Index k = 0; k < t.u.cols(); ++k) {
      const PrincipalError pe = principal_error(*map.tableau, *ode, x_ref.col(k), t.u.col(k), h, t.s);
      for (const auto& term : pe.terms) {
        terms << k << ',' << term.tree_id << ',' << fmt("%.10g", term.sigma) << ',' << fmt("%.10g", term.gamma) << ','
              << fmt("%.17g", term.phi) << ',' << fmt("%.10e", term.residual) << ',' << fmt("%.10e", term.f_norm)
              << ',' << fmt("%.10e", term.contribution.norm()) << '\n';
      }
    }
    write_text(dir / "lte_terms.csv", terms.str());
  }
  double worst = 0.0;
  for (double v : lte.measured) worst = std::max(worst, v);
  std::cout << name << "  steps " << lte.measured.size() << "  max LTE " << fmt("%.3e", worst) << "\n";
  std::cout << "output: " << dir.string() << "\n";
  return 0;
}

int cmd_tableau(const std::string& name) {
  if (!has_tableau(name)) {
    std::string known;
    for (const auto& n : tableau_names()) known += (known.empty() ? "" : ", ") + n;
    throw UsageError("no Butcher tableau named '" + name + "' (known: " + known + ")");
  }
  const ButcherTableau& tab = tableau(name);
  const SymplecticityResidual sr = symplecticity_residual(tab);
  int verified = 0;
  for (int p = 1; p <= 6 && satisfies_order(tab, p); ++p) verified = p;
  std::cout << name << "  stages " << tab.stages() << "  " << (tab.is_explicit() ? "explicit" : "implicit") << "\n";
  std::cout << "symplectic: " << (is_symplectic(tab) ? "true" : "false") << "  (max |S_ij| = " << fmt("%.3e", sr.max_abs)
            << ")\n";
  std::cout << "order verified: " << verified << "  (declared " << tab.order << ")\n";
  return verified == tab.order ? 0 : kExitFailure;
}

int cmd_export(const Globals& g, const std::string& name, const std::string& objective, int p, const std::string& file) {
  const RunConfig cfg = load_config(g);
  const OneStepMap& map = require_method(name);
  ObjectiveSpec spec;
  try {
    spec.kind = parse_objective(objective);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  spec.p = p;
  spec.r = cfg.adversarial.r;
  std::unique_ptr<Transcription> problem;
  try {
    problem = build_transcription(map, spec, cfg.problem);
  } catch (const UnsupportedCombination& e) {
    throw UsageError(e.what());
  }
  fs::path target = file;
  if (target.empty()) target = start_run(g, cfg, "export-" + name) / "problem.nlp";
  export_problem(*problem, target);
  std::cout << name << "  variables " << problem->nlp().num_vars() << "  constraints " << problem->nlp().num_constraints()
            << "  jacobian nnz " << problem->nlp().jacobian_nnz() << "\n";
  std::cout << "output: " << target.string() << "\n";
  return 0;
}

int cmd_nlp_eval(const std::string& problem_file, const std::string& request, const std::string& response) {
  if (!fs::exists(problem_file)) throw UsageError("problem file '" + problem_file + "' does not exist");
  if (!fs::exists(request)) throw UsageError("request file '" + request + "' does not exist");
  const auto problem = import_problem(problem_file);
  serve_evaluation_request(*problem, request, response);
  std::cout << "output: " << response << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transcription benchmark for 6-DOF rocket landing"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  double feas_tol = 0.0;
  double opt_tol = 0.0;
  int max_iter = 0;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--output-dir", g.output_dir, "Parent directory for run outputs")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Parallel cells")->check(CLI::PositiveNumber)->capture_default_str();
  auto* feas_opt = app.add_option("--feas-tol", feas_tol, "Solver feasibility tolerance")->check(CLI::PositiveNumber);
  auto* opt_opt = app.add_option("--opt-tol", opt_tol, "Solver optimality tolerance")->check(CLI::PositiveNumber);
  auto* iter_opt = app.add_option("--max-iter", max_iter, "Solver iteration cap")->check(CLI::PositiveNumber);
  app.add_flag("--seedless", g.seedless, "Accepted for compatibility; runs are already deterministic");

  std::string objective = "min-fuel";
  std::vector<std::string> methods;
  std::vector<int> orders;
  double r_value = 0.0;
  auto* sweep = app.add_subcommand("sweep", "Solve one transcription per method and validate it");
  sweep->add_option("--objective", objective, "min-fuel, max-fuel or adversarial")->capture_default_str();
  sweep->add_option("--methods", methods, "Comma-separated methods (default: all)")->delimiter(',');
  sweep->add_option("--orders", orders, "Adversarial orders p")->delimiter(',');
  auto* r_opt = sweep->add_option("--r", r_value, "Adversarial l_r exponent");

  std::vector<double> distances;
  auto* divert = app.add_subcommand("divert", "Lateral divert feasibility sweep");
  divert->add_option("--methods", methods, "Comma-separated methods (default: all)")->delimiter(',');
  divert->add_option("--distances", distances, "Comma-separated ascending distances")->delimiter(',');

  std::string solution, method_name, reference;
  auto* validate = app.add_subcommand("validate", "Open-loop, drift, LTE and stiffness checks of a solution");
  validate->add_option("--solution", solution, "Solution JSON")->required();
  validate->add_option("--method", method_name, "Transcription method")->required();
  validate->add_option("--reference", reference, "Reference solution JSON for the Ref-OL check");

  std::string trajectory;
  auto* lte = app.add_subcommand("lte", "Per-step local truncation error along a trajectory");
  lte->add_option("--method", method_name, "Method")->required();
  lte->add_option("--trajectory", trajectory, "Solution JSON")->required();

  std::string tableau_name;
  auto* tab = app.add_subcommand("tableau", "Check symplecticity and order conditions");
  tab->add_option("--check", tableau_name, "Tableau name")->required();

  int p = 2;
  std::string export_file;
  auto* exp = app.add_subcommand("export", "Write the NLP in the sparse text format");
  exp->add_option("--method", method_name, "Method")->required();
  exp->add_option("--objective", objective, "Objective")->capture_default_str();
  exp->add_option("--p", p, "Adversarial order")->capture_default_str();
  exp->add_option("--file", export_file, "Output file (default: inside a new run directory)");

  std::string problem_file, request_file, response_file;
  auto* eval = app.add_subcommand("nlp-eval", "Answer an evaluation request for an exported problem");
  eval->add_option("--problem", problem_file, "Exported problem file")->required();
  eval->add_option("--request", request_file, "Request file")->required();
  eval->add_option("--response", response_file, "Response file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (*feas_opt) g.feas_tol = feas_tol;
  if (*opt_opt) g.opt_tol = opt_tol;
  if (*iter_opt) g.max_iter = max_iter;

  try {
    if (*sweep) return cmd_sweep(g, objective, methods, orders, *r_opt ? std::optional<double>(r_value) : std::nullopt);
    if (*divert) return cmd_divert(g, methods, distances);
    if (*validate) return cmd_validate(g, solution, method_name, reference);
    if (*lte) return cmd_lte(g, method_name, trajectory);
    if (*tab) {
      if (!g.config_path.empty()) load_config(g);
      return cmd_tableau(tableau_name);
    }
    if (*exp) return cmd_export(g, method_name, objective, p, export_file);
    if (*eval) return cmd_nlp_eval(problem_file, request_file, response_file);
  } catch (const ConfigUsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << config_schema_hint() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
