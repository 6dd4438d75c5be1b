#include "shotcheck/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <sstream>
#include <thread>

#include "shotcheck/validation.hpp"

namespace shotcheck {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs f(0..n-1) on up to `jobs` threads. f must not throw.
template <class F>
void parallel_for(int n, int jobs, F f) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

int effective_jobs(const RunConfig& cfg, const BenchOptions& opts) {
  return cfg.bench.sequential_timing ? 1 : std::max(1, opts.jobs);
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string flag(bool b) { return b ? "true" : "false"; }
std::string flag(const std::optional<bool>& b) { return b ? flag(*b) : ""; }
std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

nlohmann::json jnum(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

template <class T>
nlohmann::json jopt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

struct CellSolve {
  std::unique_ptr<Transcription> problem;
  SolveResult result;
  Trajectory trajectory;
};

CellSolve solve_cell(const std::string& name, const ObjectiveSpec& spec, const ProblemConfig& problem,
                     const SolverOptions& solver) {
  CellSolve out;
  out.problem = build_transcription(method(name), spec, problem);
  out.result = solve(*out.problem, solver);
  out.trajectory = out.problem->unpack(out.result.w);
  return out;
}

SweepRow sweep_cell(const std::string& name, ObjectiveKind kind, const RunConfig& cfg, const std::string& hash) {
  SweepRow row;
  row.method = name;
  row.config_hash = hash;
  try {
    ObjectiveSpec spec;
    spec.kind = kind;
    CellSolve cell = solve_cell(name, spec, cfg.problem, cfg.solver);
    const Nlp& nlp = cell.problem->nlp();
    row.vars = nlp.num_vars();
    row.jacobian_nnz = nlp.jacobian_nnz();
    row.hessian_nnz = nlp.hessian_nnz();
    const SolveResult& res = cell.result;
    row.status = status_name(res.status);
    row.objective = res.objective;
    row.violation = res.violation;
    row.iterations = res.iterations;
    row.eval_seconds = res.eval_seconds;
    row.solver_seconds = res.solver_seconds;
    row.total_seconds = res.total_seconds;
    const Trajectory& t = cell.trajectory;
    row.s = t.s;
    row.max_drift = max_of(quaternion_drift(t.x));
    const Replay replay = replay_open_loop(*cell.problem->ode(), t.x, t.u, t.s);
    row.eps_ol = replay.eps_ol;
    row.ol_pass = replay.pass();
    row.solution = t;
  } catch (const std::exception& e) {
    row.status = "error";
    row.error = e.what();
  }
  return row;
}

const char* published_flag(const std::optional<PublishedOutcome>& p, ObjectiveKind kind, int column) {
  if (!p) return "";
  bool v = false;
  if (kind == ObjectiveKind::min_fuel) {
    if (column == 2) return "";
    v = column == 0 ? p->min_optim : p->min_ol;
  } else if (kind == ObjectiveKind::max_fuel) {
    v = column == 0 ? p->max_optim : column == 1 ? p->max_ol : p->max_ref_ol;
  } else {
    return "";
  }
  return v ? "true" : "false";
}

}  // namespace

const std::vector<PublishedOutcome>& published_outcomes() {
  static const std::vector<PublishedOutcome> table = {
      {"bdf4", 253, 4091, false, false, false, false, false},
      {"bdf6", 253, 4425, false, false, false, false, false},
      {"trapezoidal", 253, 4542, false, false, false, false, false},
      {"rk38", 253, 5041, true, true, false, false, false},
      {"rk4", 253, 5041, true, true, false, true, false},
      {"rk5", 253, 5041, true, true, false, false, false},
      {"rk6", 253, 5041, true, true, true, true, true},
      {"avf2", 253, 5858, false, false, false, false, false},
      {"avf3", 253, 5858, false, false, false, false, false},
      {"gl1", 253, 5858, false, false, false, false, false},
      {"trbdf2", 449, 7552, false, false, false, false, false},
      {"gl2", 645, 15526, true, true, true, true, true},
      {"lobatto3a", 841, 24318, true, true, false, true, true},
      {"gl3", 841, 27258, true, true, true, true, true},
  };
  return table;
}

std::optional<PublishedOutcome> published_outcome(const std::string& name) {
  for (const auto& p : published_outcomes()) {
    if (p.method == name) return p;
  }
  return std::nullopt;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path make_run_directory(const std::filesystem::path& base, const std::string& label) {
  std::filesystem::create_directories(base);
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  const std::string stem = label + "-" + stamp;
  for (int n = 1;; ++n) {
    const std::filesystem::path dir = base / (n == 1 ? stem : stem + "-" + std::to_string(n));
    if (std::filesystem::create_directory(dir)) return dir;
  }
}

SweepTable run_integrator_sweep(ObjectiveKind objective, const std::vector<std::string>& methods,
                                const RunConfig& cfg, const BenchOptions& opts) {
  SweepTable table;
  table.objective = objective;
  table.config_hash = config_hash(cfg);
  table.rows.resize(methods.size());
  const int jobs = effective_jobs(cfg, opts);
  parallel_for(static_cast<int>(methods.size()), jobs, [&](int i) {
    table.rows[static_cast<std::size_t>(i)] =
        sweep_cell(methods[static_cast<std::size_t>(i)], objective, cfg, table.config_hash);
  });
  if (methods.empty()) return table;

  std::vector<const SweepRow*> candidates;
  for (const auto& row : table.rows) {
    if (row.converged() && row.ol_pass) candidates.push_back(&row);
  }
  SweepRow extra;
  const bool listed = std::find(methods.begin(), methods.end(), cfg.bench.reference_method) != methods.end();
  if (!listed && !cfg.bench.reference_method.empty()) {
    extra = sweep_cell(cfg.bench.reference_method, objective, cfg, table.config_hash);
    if (extra.converged() && extra.ol_pass) candidates.push_back(&extra);
  }
  const SweepRow* best = nullptr;
  for (const SweepRow* c : candidates) {
    if (!best || c->objective < best->objective || (c->objective == best->objective && c->method < best->method)) {
      best = c;
    }
  }
  if (!best) return table;
  table.reference_method = best->method;
  table.reference = best->solution;

  const Eigen::VectorXd x0 = cfg.problem.initial_state();
  const OdePtr ode = make_rocket_ode(cfg.problem.rocket);
  const Trajectory ref = *table.reference;
  parallel_for(static_cast<int>(table.rows.size()), jobs, [&](int i) {
    SweepRow& row = table.rows[static_cast<std::size_t>(i)];
    if (row.status == "error") return;
    try {
      const RefOlResult r = ref_ol_check(method(row.method), *ode, x0, ref.u, ref.s);
      row.ref_ol_pass = r.pass;
      row.ref_ol_error = r.error;
    } catch (const std::exception& e) {
      row.ref_ol_pass = false;
      row.error = std::string("ref-ol: ") + e.what();
    }
  });
  return table;
}

AdversarialTable run_adversarial_comparison(const std::vector<int>& orders, double r, const RunConfig& cfg,
                                            const BenchOptions& opts) {
  AdversarialTable table;
  table.config_hash = config_hash(cfg);
  table.speed_smoothing = cfg.adversarial.speed_smoothing;
  ProblemConfig problem = cfg.problem;
  problem.rocket.speed_smoothing = cfg.adversarial.speed_smoothing;
  const std::string gl3 = "gl3";

  ObjectiveSpec feas_spec;
  feas_spec.kind = ObjectiveKind::feasibility;
  ObjectiveSpec max_spec;
  max_spec.kind = ObjectiveKind::max_fuel;
  ObjectiveSpec min_spec;
  min_spec.kind = ObjectiveKind::min_fuel;

  std::optional<CellSolve> feas, max_fuel, min_fuel;
  std::string setup_error;
  try {
    feas = solve_cell(gl3, feas_spec, problem, cfg.solver);
    max_fuel = solve_cell(gl3, max_spec, problem, cfg.solver);
    min_fuel = solve_cell(gl3, min_spec, problem, cfg.solver);
    table.max_fuel_status = status_name(max_fuel->result.status);
    table.min_fuel_status = status_name(min_fuel->result.status);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }

  table.rows.resize(orders.size());
  parallel_for(static_cast<int>(orders.size()), effective_jobs(cfg, opts), [&](int i) {
    AdversarialRow& row = table.rows[static_cast<std::size_t>(i)];
    row.p = orders[static_cast<std::size_t>(i)];
    row.r = r;
    if (!setup_error.empty()) {
      row.status = "error";
      row.error = setup_error;
      return;
    }
    try {
      ObjectiveSpec spec;
      spec.kind = ObjectiveKind::adversarial_lr;
      spec.p = row.p;
      spec.r = r;
      spec.hessian = cfg.adversarial.gauss_newton ? AdversarialHessian::gauss_newton : AdversarialHessian::exact;
      auto jr = [&](const Trajectory& t) { return eval_adversarial_objective(t.x, t.u, t.s, spec, problem).j_r; };
      row.jr_max_fuel = jr(max_fuel->trajectory);
      row.jr_min_fuel = jr(min_fuel->trajectory);

      bool have = false;
      bool have_converged = false;
      for (const CellSolve* start : {&*feas, &*max_fuel}) {
        ObjectiveSpec scaled = spec;
        const double j0 = jr(start->trajectory);
        if (j0 > 0.0 && std::isfinite(j0)) scaled.scale = 1.0 / j0;
        auto tr = build_transcription(method(gl3), scaled, problem);
        const SolveResult res = AugmentedLagrangianSolver(cfg.solver).solve(tr->nlp(), start->result.w);
        row.iterations += res.iterations;
        row.total_seconds += res.total_seconds;
        const Trajectory t = tr->unpack(res.w);
        const double j = jr(t);
        const bool conv = res.status == SolveStatus::optimal || res.status == SolveStatus::feasible;
        if (!std::isfinite(j)) continue;
        const bool better = !have || (conv && !have_converged) || (conv == have_converged && j > row.jr_best);
        if (better) {
          row.jr_best = j;
          row.status = status_name(res.status);
          have = true;
          have_converged = have_converged || conv;
        }
      }
      if (!have) throw std::runtime_error("no finite J_r from either start");
      row.pct_max_fuel = 100.0 * row.jr_max_fuel / row.jr_best;
      row.pct_min_fuel = 100.0 * row.jr_min_fuel / row.jr_best;
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
    }
  });
  return table;
}

DivertTable run_divert_sweep(const std::vector<std::string>& methods, const std::vector<double>& distances,
                             const RunConfig& cfg, const BenchOptions& opts) {
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] > 0.0) || (i > 0 && !(distances[i] > distances[i - 1]))) {
      throw std::invalid_argument("divert distances must be positive and ascending");
    }
  }
  DivertTable table;
  table.config_hash = config_hash(cfg);
  const int nd = static_cast<int>(distances.size());
  table.rows.resize(methods.size() * distances.size());
  parallel_for(static_cast<int>(table.rows.size()), effective_jobs(cfg, opts), [&](int i) {
    DivertRow& row = table.rows[static_cast<std::size_t>(i)];
    row.method = methods[static_cast<std::size_t>(i / nd)];
    row.distance = distances[static_cast<std::size_t>(i % nd)];
    row.config_hash = table.config_hash;
    try {
      ProblemConfig problem = cfg.problem;
      problem.boundary.r_final(cfg.divert.axis) += row.distance;
      problem.limits.s_max = cfg.divert.s_max;
      ObjectiveSpec spec;
      spec.kind = ObjectiveKind::feasibility;
      CellSolve cell = solve_cell(row.method, spec, problem, cfg.solver);
      const SolveResult& res = cell.result;
      row.status = status_name(res.status);
      row.iterations = res.iterations;
      row.violation = res.violation;
      row.eval_seconds = res.eval_seconds;
      row.solver_seconds = res.solver_seconds;
      row.total_seconds = res.total_seconds;
      row.s = cell.trajectory.s;
      row.step = row.s * cell.problem->h();
      const Replay replay = replay_open_loop(*cell.problem->ode(), cell.trajectory.x, cell.trajectory.u, row.s);
      row.eps_ol = replay.eps_ol;
      row.ol_pass = replay.pass();
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
    }
  });

  for (std::size_t m = 0; m < methods.size(); ++m) {
    DivertSummary sum;
    sum.method = methods[m];
    for (int d = 0; d < nd; ++d) {
      const DivertRow& row = table.rows[m * distances.size() + static_cast<std::size_t>(d)];
      if (!row.completed()) {
        sum.incomplete.push_back(row.distance);
        continue;
      }
      ++sum.completed;
      sum.mean_iterations += row.iterations;
      sum.mean_eval_seconds += row.eval_seconds;
      sum.mean_solver_seconds += row.solver_seconds;
      sum.mean_total_seconds += row.total_seconds;
    }
    if (sum.completed > 0) {
      sum.mean_iterations /= sum.completed;
      sum.mean_eval_seconds /= sum.completed;
      sum.mean_solver_seconds /= sum.completed;
      sum.mean_total_seconds /= sum.completed;
    } else {
      sum.mean_iterations = sum.mean_eval_seconds = sum.mean_solver_seconds = sum.mean_total_seconds = kNaN;
    }
    table.summary.push_back(sum);
  }
  return table;
}

nlohmann::json solution_to_json(const Trajectory& t, const std::string& method_name, const std::string& objective) {
  nlohmann::json doc;
  doc["method"] = method_name;
  doc["objective"] = objective;
  doc["s"] = t.s;
  nlohmann::json x = nlohmann::json::array();
  for (Eigen::Index k = 0; k < t.x.cols(); ++k) x.push_back(std::vector<double>(t.x.col(k).data(), t.x.col(k).data() + t.x.rows()));
  nlohmann::json u = nlohmann::json::array();
  for (Eigen::Index k = 0; k < t.u.cols(); ++k) u.push_back(std::vector<double>(t.u.col(k).data(), t.u.col(k).data() + t.u.rows()));
  doc["x"] = std::move(x);
  doc["u"] = std::move(u);
  return doc;
}

Trajectory solution_from_json(const nlohmann::json& doc) {
  try {
    Trajectory t;
    t.s = doc.at("s").get<double>();
    const auto xs = doc.at("x").get<std::vector<std::vector<double>>>();
    const auto us = doc.at("u").get<std::vector<std::vector<double>>>();
    if (xs.size() < 2 || us.size() + 1 != xs.size()) {
      throw std::invalid_argument("solution needs N >= 2 states and N - 1 controls");
    }
    t.x.resize(static_cast<Eigen::Index>(kStateDim), static_cast<Eigen::Index>(xs.size()));
    t.u.resize(static_cast<Eigen::Index>(kControlDim), static_cast<Eigen::Index>(us.size()));
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (xs[k].size() != kStateDim) throw std::invalid_argument("every state needs 14 entries");
      for (std::size_t i = 0; i < kStateDim; ++i) t.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = xs[k][i];
    }
    for (std::size_t k = 0; k < us.size(); ++k) {
      if (us[k].size() != kControlDim) throw std::invalid_argument("every control needs 3 entries");
      for (std::size_t i = 0; i < kControlDim; ++i) t.u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = us[k][i];
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed solution document: ") + e.what());
  }
}

std::string to_csv(const SweepTable& table) {
  std::ostringstream os;
  os << "method,objective,config_hash,vars,jacobian_nnz,hessian_nnz,nnz,status,objective_value,violation,iterations,"
        "s,eps_ol,ol_pass,ref_ol_pass,ref_ol_error,max_drift,eval_seconds,solver_seconds,total_seconds,"
        "published_vars,published_nnz,published_optim,published_ol,published_ref_ol,error\n";
  const std::string obj = objective_name(table.objective);
  for (const auto& r : table.rows) {
    const auto pub = published_outcome(r.method);
    os << r.method << ',' << obj << ',' << r.config_hash << ',' << r.vars << ',' << r.jacobian_nnz << ','
       << r.hessian_nnz << ',' << (r.jacobian_nnz + r.hessian_nnz) << ',' << r.status << ',' << num(r.objective) << ','
       << num(r.violation) << ',' << r.iterations << ',' << num(r.s) << ',' << num(r.eps_ol) << ',' << flag(r.ol_pass)
       << ',' << flag(r.ref_ol_pass) << ',' << opt_num(r.ref_ol_error) << ',' << num(r.max_drift) << ','
       << num(r.eval_seconds) << ',' << num(r.solver_seconds) << ',' << num(r.total_seconds) << ','
       << (pub ? std::to_string(pub->vars) : "") << ',' << (pub ? std::to_string(pub->nnz) : "") << ','
       << published_flag(pub, table.objective, 0) << ',' << published_flag(pub, table.objective, 1) << ','
       << published_flag(pub, table.objective, 2) << ',' << quoted(r.error) << '\n';
  }
  return os.str();
}

std::string to_csv(const AdversarialTable& table) {
  std::ostringstream os;
  os << "p,r,config_hash,status,jr_best,jr_max_fuel,jr_min_fuel,pct_max_fuel,pct_min_fuel,iterations,total_seconds,"
        "error\n";
  for (const auto& r : table.rows) {
    os << r.p << ',' << num(r.r) << ',' << table.config_hash << ',' << r.status << ',' << num(r.jr_best) << ','
       << num(r.jr_max_fuel) << ',' << num(r.jr_min_fuel) << ',' << num(r.pct_max_fuel) << ',' << num(r.pct_min_fuel)
       << ',' << r.iterations << ',' << num(r.total_seconds) << ',' << quoted(r.error) << '\n';
  }
  return os.str();
}

std::string to_csv(const DivertTable& table) {
  std::ostringstream os;
  os << "method,distance,config_hash,status,iterations,violation,s,step,eps_ol,ol_pass,eval_seconds,solver_seconds,"
        "total_seconds,error\n";
  for (const auto& r : table.rows) {
    os << r.method << ',' << num(r.distance) << ',' << r.config_hash << ',' << r.status << ',' << r.iterations << ','
       << num(r.violation) << ',' << num(r.s) << ',' << num(r.step) << ',' << num(r.eps_ol) << ',' << flag(r.ol_pass)
       << ',' << num(r.eval_seconds) << ',' << num(r.solver_seconds) << ',' << num(r.total_seconds) << ','
       << quoted(r.error) << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const SweepTable& table) {
  nlohmann::json doc;
  doc["objective"] = objective_name(table.objective);
  doc["config_hash"] = table.config_hash;
  doc["reference_method"] = table.reference_method.empty() ? nlohmann::json(nullptr) : nlohmann::json(table.reference_method);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json row;
    row["method"] = r.method;
    row["vars"] = r.vars;
    row["jacobian_nnz"] = r.jacobian_nnz;
    row["hessian_nnz"] = r.hessian_nnz;
    row["status"] = r.status;
    row["objective"] = jnum(r.objective);
    row["violation"] = jnum(r.violation);
    row["iterations"] = r.iterations;
    row["s"] = jnum(r.s);
    row["eps_ol"] = jnum(r.eps_ol);
    row["ol_pass"] = r.ol_pass;
    row["ref_ol_pass"] = jopt(r.ref_ol_pass);
    row["ref_ol_error"] = jopt(r.ref_ol_error);
    row["max_drift"] = jnum(r.max_drift);
    row["eval_seconds"] = r.eval_seconds;
    row["solver_seconds"] = r.solver_seconds;
    row["total_seconds"] = r.total_seconds;
    row["error"] = r.error;
    if (const auto pub = published_outcome(r.method)) {
      row["published"] = {{"vars", pub->vars},         {"nnz", pub->nnz},
                          {"min_optim", pub->min_optim}, {"min_ol", pub->min_ol},
                          {"max_optim", pub->max_optim}, {"max_ol", pub->max_ol},
                          {"max_ref_ol", pub->max_ref_ol}};
    }
    if (r.solution) row["solution"] = solution_to_json(*r.solution, r.method, objective_name(table.objective));
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  return doc;
}

nlohmann::json to_json(const AdversarialTable& table) {
  nlohmann::json doc;
  doc["config_hash"] = table.config_hash;
  doc["max_fuel_status"] = table.max_fuel_status;
  doc["min_fuel_status"] = table.min_fuel_status;
  doc["speed_smoothing"] = table.speed_smoothing;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"p", r.p},
                    {"r", r.r},
                    {"status", r.status},
                    {"jr_best", jnum(r.jr_best)},
                    {"jr_max_fuel", jnum(r.jr_max_fuel)},
                    {"jr_min_fuel", jnum(r.jr_min_fuel)},
                    {"pct_max_fuel", jnum(r.pct_max_fuel)},
                    {"pct_min_fuel", jnum(r.pct_min_fuel)},
                    {"iterations", r.iterations},
                    {"total_seconds", r.total_seconds},
                    {"error", r.error}});
  }
  doc["rows"] = std::move(rows);
  return doc;
}

nlohmann::json to_json(const DivertTable& table) {
  nlohmann::json doc;
  doc["config_hash"] = table.config_hash;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"method", r.method},
                    {"distance", r.distance},
                    {"status", r.status},
                    {"iterations", r.iterations},
                    {"violation", jnum(r.violation)},
                    {"s", jnum(r.s)},
                    {"step", jnum(r.step)},
                    {"eps_ol", jnum(r.eps_ol)},
                    {"ol_pass", r.ol_pass},
                    {"eval_seconds", r.eval_seconds},
                    {"solver_seconds", r.solver_seconds},
                    {"total_seconds", r.total_seconds},
                    {"error", r.error}});
  }
  doc["rows"] = std::move(rows);
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : table.summary) {
    summary.push_back({{"method", s.method},
                       {"completed", s.completed},
                       {"incomplete_distances", s.incomplete},
                       {"mean_iterations", jnum(s.mean_iterations)},
                       {"mean_eval_seconds", jnum(s.mean_eval_seconds)},
                       {"mean_solver_seconds", jnum(s.mean_solver_seconds)},
                       {"mean_total_seconds", jnum(s.mean_total_seconds)}});
  }
  doc["summary"] = std::move(summary);
  return doc;
}

}  // namespace shotcheck
