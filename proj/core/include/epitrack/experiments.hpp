#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epitrack/error_analysis.hpp"
#include "epitrack/population.hpp"
#include "epitrack/simulation.hpp"
#include "epitrack/solver.hpp"

namespace epitrack {

enum class OutputFormat { Csv, Json };

// Generated population source: per-person rates follow a geometric or
// uniform profile whose entries sum to the given totals.
struct ProfileSpec {
  enum class Kind { Geometric, Uniform };
  Kind kind = Kind::Geometric;
  std::size_t n = 10;
  double lambda_total = 6.0;
  double mu_total = 4.0;
  double lambda_ratio = 0.9;  // used by geometric profiles only
  double mu_ratio = 1.1;
};

struct SweepSpec {
  std::string param;          // "C", "n", or "theta"
  std::vector<double> values; // strictly increasing
};

struct SimSettings {
  bool enabled = false;
  double horizon = 1e5;
  int batches = 20;
};

// One scenario: a population (inline people or a profile directive, never
// both), optional policy, optional sweep, solver and simulation settings.
struct ScenarioConfig {
  double theta = 0.5;
  double total_rate = 16.0;
  std::optional<std::vector<PersonParams>> people;
  std::optional<ProfileSpec> profile;
  std::optional<TestPolicy> policy;
  std::optional<SweepSpec> sweep;
  SolverOptions solver;
  SimSettings sim;
  std::string out = "-";
  OutputFormat format = OutputFormat::Csv;

  // The built-in ten-person scenario: theta 0.5, budget 16, geometric
  // infection rates (ratio 0.9, total 6) and recovery rates (ratio 1.1,
  // total 4).
  static ScenarioConfig defaults();

  // Materializes the population source. Call validate_scenario first;
  // throws std::invalid_argument on an unbuildable source.
  PopulationSpec population() const;
};

std::vector<std::string> validate_scenario(const ScenarioConfig& config);

// Config document: the population JSON from population.hpp plus optional
// "profile", "policy", "sweep", "solver", "sim", "out", "format" keys.
ScenarioConfig scenario_from_json(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

// ---- Experiment runners ------------------------------------------------
// Each runner solves the scenario's allocation problem and tabulates the
// quantities the CLI emits. Rows are ordered by sweep value.

// Per-person comparison of the optimized policy against uniform testing
// (s_i = c_i = C/2n) and the no-test baseline. CLI subcommand: fig4.
struct RateAllocationRow {
  int person = 0;  // 1-based
  double lambda = 0.0, mu = 0.0;
  double s = 0.0, c = 0.0;
  double delta_opt = 0.0, delta_uniform = 0.0, delta_notest = 0.0;
};
struct RateAllocationResult {
  std::vector<RateAllocationRow> rows;
  SolverReport report;
  double delta_opt = 0.0, delta_uniform = 0.0, delta_notest = 0.0;
  // Monte Carlo cross-check of the optimized policy; present when the
  // scenario has sim.enabled. Carried in JSON output only (the CSV schema
  // is fixed).
  std::optional<PopulationSimReport> simulation;
};
RateAllocationResult run_rate_allocation(const ScenarioConfig& config);

// Optimal error as a function of the total test budget. CLI: fig5.
struct BudgetSweepRow {
  double budget = 0.0;
  double delta = 0.0;
};
struct BudgetSweepResult {
  std::vector<BudgetSweepRow> rows;
  std::vector<SolverReport> reports;
};
BudgetSweepResult run_budget_sweep(const ScenarioConfig& config);

// Optimal error as the population grows, with per-person rates shrinking
// so the rate totals stay fixed; uniform and geometric profiles side by
// side. CLI: fig6.
struct PopulationSweepRow {
  int n = 0;
  double delta_uniform_rates = 0.0;
  double delta_geometric_rates = 0.0;
};
struct PopulationSweepResult {
  std::vector<PopulationSweepRow> rows;
  std::vector<SolverReport> uniform_reports;
  std::vector<SolverReport> geometric_reports;
};
PopulationSweepResult run_population_sweep(const ScenarioConfig& config);

// Error split and rate totals as the importance factor varies. CLI: fig7.
struct ImportanceSweepRow {
  double theta = 0.0;
  double delta = 0.0;
  double delta_bar1 = 0.0;  // mean undetected-infection fraction
  double delta_bar2 = 0.0;  // mean stale-infection fraction
  double sum_s = 0.0, sum_c = 0.0;
};
struct ImportanceSweepResult {
  std::vector<ImportanceSweepRow> rows;
  std::vector<SolverReport> reports;
};
ImportanceSweepResult run_importance_sweep(const ScenarioConfig& config);

// ---- Emission ------------------------------------------------------------
// CSV: header row, '.' decimal separator, shortest round-trip numbers.

std::string to_csv(const RateAllocationResult& r);
std::string to_csv(const BudgetSweepResult& r);
std::string to_csv(const PopulationSweepResult& r);
std::string to_csv(const ImportanceSweepResult& r);

std::string to_json_string(const RateAllocationResult& r);
std::string to_json_string(const BudgetSweepResult& r);
std::string to_json_string(const PopulationSweepResult& r);
std::string to_json_string(const ImportanceSweepResult& r);
std::string to_json_string(const SolverReport& r);

// Shortest representation that parses back to exactly the same double.
std::string format_double(double v);

// Entry point behind the epitrack binary; exposed so tests can drive the
// full argument surface in-process. Returns the process exit code:
// 0 success, 1 usage/validation failure, 2 non-convergence under --strict.
int cli_main(int argc, const char* const* argv);

}  // namespace epitrack
