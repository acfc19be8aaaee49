#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "epitrack/error_analysis.hpp"
#include "epitrack/population.hpp"

namespace epitrack {

struct SolverOptions {
  int restarts = 30;
  std::uint64_t seed = 1;
  double kkt_tol = 1e-9;          // max-norm stationarity residual
  double rate_change_tol = 1e-12; // fixed-point detection on the rate vector
  int max_iterations = 10000;
  // Optional extra deterministic starting point (e.g. a policy from a
  // config file); always tried in addition to the uniform split.
  std::optional<TestPolicy> initial_policy;
};

// Water-filling priorities for the 2n decision variables
// [s_1..s_n, c_1..c_n], evaluated at the current policy. An entry whose
// paired rate is zero is undefined and returned as NaN; waterfill treats
// NaN and non-positive entries as inactive.
std::vector<double> phi_values(const PopulationSpec& spec,
                               const TestPolicy& policy);

// Matching allocation coefficients: k_i = mu_i c_i / (lambda_i + c_i) for
// the s-variables, k_{n+i} = lambda_i s_i / (mu_i + s_i) for the c-variables.
std::vector<double> phi_coefficients(const PopulationSpec& spec,
                                     const TestPolicy& policy);

struct WaterfillResult {
  double beta = 0.0;       // multiplier solving sum(u) = budget (sum scale)
  std::vector<double> u;   // allocations, u_i = k_i (sqrt(phi_i/beta) - 1)^+
  bool any_active = false; // false => nothing allocatable, u is all zero
};

// Closed-form budget allocation: over the active set solve
// sum k_i (sqrt(phi_i / beta) - 1) = budget for beta, then drop the
// smallest-phi index while it falls below beta and re-solve. Drops at
// least one index per pass, so it terminates within 2n passes; the last
// remaining index always satisfies phi > beta.
WaterfillResult waterfill(std::span<const double> k,
                          std::span<const double> phi, double budget);

// Max-norm KKT stationarity violation at a policy. `beta` is the budget
// multiplier for the mean objective (average error over people); the
// water-filling step's internal multiplier is n times this value. Active
// rates contribute |grad/n + beta|; rates at zero contribute only the
// amount by which their implied multiplier would have to be negative;
// fully untested pairs are boundary-stationary and contribute 0.
double kkt_residual(const PopulationSpec& spec, const TestPolicy& policy,
                    double beta);

// Analytic partial derivatives of the weighted per-person error with
// respect to s and c (used by kkt_residual; exposed for verification
// against finite differences).
double weighted_error_ds(const PersonParams& p, double s, double c,
                         double theta);
double weighted_error_dc(const PersonParams& p, double s, double c,
                         double theta);

enum class PairDecision {
  Keep,
  ZeroSThenPair,  // s is forced to 0, error becomes flat in c, drop both
  ZeroCThenPair,  // c is forced to 0, error becomes flat in s, drop both
};

// Detects rate pairs where one direction of testing can only hurt, which
// collapses the pair to the no-test fixed label.
PairDecision zero_pair_check(const PersonParams& p, double theta, double s,
                             double c);

struct SolverState {
  TestPolicy policy;
  double beta = 0.0;  // mean-objective budget multiplier (see kkt_residual)
  // Active flags for the 2n decision variables [s..., c...]; inactive
  // variables hold rate 0.
  std::vector<bool> active;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
};

// One run of the alternating scheme from a feasible starting point with
// sum(s) + sum(c) == budget: repeatedly drop zero-pairs (sticky within the
// run), recompute priorities from the current rates, water-fill, and adopt
// the allocation. Stops when the KKT residual is below kkt_tol, the rate
// vector stops moving, or max_iterations is hit (then the best iterate
// seen is returned with converged = false).
SolverState alternate_minimize(const PopulationSpec& spec,
                               const TestPolicy& init,
                               const SolverOptions& opts = {});

struct RestartOutcome {
  std::uint64_t seed = 0;  // 0 marks the deterministic starting points
  double objective = 0.0;
  bool converged = false;
};

struct SolverReport {
  TestPolicy policy;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double beta = 0.0;
  bool converged = false;
  int iterations_used = 0;
  std::vector<RestartOutcome> restarts;
};

// Random feasible starting point: 2n unit exponentials scaled to sum to
// the budget (uniform on the scaled simplex). Deterministic per seed.
TestPolicy random_init(const PopulationSpec& spec, std::uint64_t seed);

// Full solve: alternating minimization from `restarts` random starting
// points plus the uniform split (and opts.initial_policy if given), also
// considering the raw uniform policy and the no-test baseline as
// candidates. Returns the feasible candidate with the smallest error;
// ties keep the earliest candidate. Deterministic given opts.seed.
SolverReport solve(const PopulationSpec& spec, const SolverOptions& opts = {});
SolverReport solve(const PopulationSpec& spec, int restarts,
                   std::uint64_t seed);

}  // namespace epitrack
