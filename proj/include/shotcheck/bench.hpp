#pragma once

// Benchmark harness: the integrator sweep with published outcomes side by
// side, the adversarial-objective comparison against the fuel surrogates,
// and the lateral divert sweep. Cells never abort a run; failures are
// recorded in their row.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shotcheck/config.hpp"
#include "shotcheck/solver.hpp"
#include "shotcheck/transcription.hpp"

namespace shotcheck {

// Published benchmark outcomes for one method (N = 15).
struct PublishedOutcome {
  std::string method;
  int vars = 0;
  int nnz = 0;  // Jacobian plus Hessian nonzeros
  bool min_optim = false;
  bool min_ol = false;
  bool max_optim = false;
  bool max_ol = false;
  bool max_ref_ol = false;
};

const std::vector<PublishedOutcome>& published_outcomes();
std::optional<PublishedOutcome> published_outcome(const std::string& method);

// FNV-1a 64-bit hash of the serialized config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Creates <base>/<label>-YYYYMMDD-HHMMSS, appending -2, -3, ... instead of
// reusing an existing directory.
std::filesystem::path make_run_directory(const std::filesystem::path& base, const std::string& label);

struct BenchOptions {
  int jobs = 1;
};

struct SweepRow {
  std::string method;
  std::string config_hash;
  int vars = 0;
  std::size_t jacobian_nnz = 0;
  std::size_t hessian_nnz = 0;
  std::string status;  // solver status, or "error"
  std::string error;
  double objective = 0.0;
  double violation = 0.0;
  int iterations = 0;
  double s = 0.0;
  double eps_ol = 0.0;
  bool ol_pass = false;
  std::optional<bool> ref_ol_pass;
  std::optional<double> ref_ol_error;
  double max_drift = 0.0;  // largest | |q_k| - 1 | over the solution's nodes
  double eval_seconds = 0.0;
  double solver_seconds = 0.0;
  double total_seconds = 0.0;
  std::optional<Trajectory> solution;

  bool converged() const { return status == "optimal" || status == "feasible"; }
};

struct SweepTable {
  ObjectiveKind objective = ObjectiveKind::min_fuel;
  std::string config_hash;
  std::string reference_method;  // method whose solution supplied the Ref-OL controls
  std::optional<Trajectory> reference;
  std::vector<SweepRow> rows;
};

// Builds, solves and validates one transcription per method from the
// identical initial guess. The best converged solution that passes the
// open-loop check (the configured reference method is added to the
// candidates when absent) supplies the controls for every Ref-OL replay.
SweepTable run_integrator_sweep(ObjectiveKind objective, const std::vector<std::string>& methods,
                                const RunConfig& cfg, const BenchOptions& opts = {});

struct AdversarialRow {
  int p = 2;
  double r = 20.0;
  std::string status;  // of the best J_r solve, or "error"
  std::string error;
  double jr_best = 0.0;
  double jr_max_fuel = 0.0;
  double jr_min_fuel = 0.0;
  double pct_max_fuel = 0.0;  // 100 J_r(max-fuel) / J_r(best)
  double pct_min_fuel = 0.0;
  int iterations = 0;
  double total_seconds = 0.0;
};

struct AdversarialTable {
  std::string config_hash;
  std::string max_fuel_status;
  std::string min_fuel_status;
  double speed_smoothing = 0.0;
  std::vector<AdversarialRow> rows;
};

// GL3 transcriptions throughout. For each p: J_r is maximized from the
// feasibility solution and from the max-fuel solution (objective scaled by
// the starting J_r); the larger converged value is J_r(best).
AdversarialTable run_adversarial_comparison(const std::vector<int>& orders, double r, const RunConfig& cfg,
                                            const BenchOptions& opts = {});

struct DivertRow {
  std::string method;
  double distance = 0.0;
  std::string config_hash;
  std::string status;
  std::string error;
  int iterations = 0;
  double violation = 0.0;
  double s = 0.0;
  double step = 0.0;  // physical step s * h
  double eps_ol = 0.0;
  bool ol_pass = false;
  double eval_seconds = 0.0;
  double solver_seconds = 0.0;
  double total_seconds = 0.0;

  bool completed() const { return status == "optimal" || status == "feasible"; }
};

struct DivertSummary {
  std::string method;
  int completed = 0;
  std::vector<double> incomplete;  // distances without a feasible solution
  double mean_iterations = 0.0;    // over completed cells
  double mean_eval_seconds = 0.0;
  double mean_solver_seconds = 0.0;
  double mean_total_seconds = 0.0;
};

struct DivertTable {
  std::string config_hash;
  std::vector<DivertRow> rows;  // method-major, distances ascending
  std::vector<DivertSummary> summary;
};

// Feasibility problems with the landing target moved by each distance
// along the configured lateral axis.
DivertTable run_divert_sweep(const std::vector<std::string>& methods, const std::vector<double>& distances,
                             const RunConfig& cfg, const BenchOptions& opts = {});

// Solution files: {"method", "objective", "s", "x": N x 14, "u": (N-1) x 3}.
nlohmann::json solution_to_json(const Trajectory& t, const std::string& method, const std::string& objective);
Trajectory solution_from_json(const nlohmann::json& doc);

std::string to_csv(const SweepTable& table);
std::string to_csv(const AdversarialTable& table);
std::string to_csv(const DivertTable& table);
nlohmann::json to_json(const SweepTable& table);
nlohmann::json to_json(const AdversarialTable& table);
nlohmann::json to_json(const DivertTable& table);

}  // namespace shotcheck
