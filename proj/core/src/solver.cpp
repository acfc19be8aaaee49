#include "epitrack/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "epitrack/rng.hpp"

namespace epitrack {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void require_matching_policy(const PopulationSpec& spec,
                             const TestPolicy& policy, const char* where) {
  if (policy.s.size() != spec.size() || policy.c.size() != spec.size())
    throw std::invalid_argument(std::string(where) +
                                ": policy dimension mismatch");
}

// Labels untested pairs with their best constant estimate and clears stale
// labels on tested pairs, so the policy is always evaluable.
void refresh_labels(const PopulationSpec& spec, TestPolicy& policy) {
  policy.fixed_label.resize(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (policy.s[i] == 0.0 && policy.c[i] == 0.0) {
      if (!policy.fixed_label[i])
        policy.fixed_label[i] =
            no_test_error(spec.people[i], spec.theta).label;
    } else {
      policy.fixed_label[i] = std::nullopt;
    }
  }
}

std::vector<bool> active_flags(const TestPolicy& policy) {
  std::size_t n = policy.size();
  std::vector<bool> active(2 * n, false);
  for (std::size_t i = 0; i < n; ++i) {
    active[i] = policy.s[i] > 0.0;
    active[n + i] = policy.c[i] > 0.0;
  }
  return active;
}

}  // namespace

std::vector<double> phi_values(const PopulationSpec& spec,
                               const TestPolicy& policy) {
  require_matching_policy(spec, policy, "phi_values");
  std::size_t n = spec.size();
  double theta = spec.theta;
  std::vector<double> phi(2 * n, kNan);
  for (std::size_t i = 0; i < n; ++i) {
    double lam = spec.people[i].lambda, mu = spec.people[i].mu;
    double s = policy.s[i], c = policy.c[i];
    if (c > 0.0)
      phi[i] = (1.0 / (mu * c)) * (lam / (mu + lam)) *
               (theta * (c + lam) - (1.0 - theta) * mu);
    if (s > 0.0)
      phi[n + i] = (1.0 / (lam * s)) * (mu / (mu + lam)) *
                   ((1.0 - theta) * (s + mu) - theta * lam);
  }
  return phi;
}

std::vector<double> phi_coefficients(const PopulationSpec& spec,
                                     const TestPolicy& policy) {
  require_matching_policy(spec, policy, "phi_coefficients");
  std::size_t n = spec.size();
  std::vector<double> k(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double lam = spec.people[i].lambda, mu = spec.people[i].mu;
    double s = policy.s[i], c = policy.c[i];
    if (c > 0.0) k[i] = mu * c / (lam + c);
    if (s > 0.0) k[n + i] = lam * s / (mu + s);
  }
  return k;
}

WaterfillResult waterfill(std::span<const double> k,
                          std::span<const double> phi, double budget) {
  if (k.size() != phi.size())
    throw std::invalid_argument("waterfill: k and phi sizes differ");
  if (!(budget > 0.0) || !std::isfinite(budget))
    throw std::invalid_argument("waterfill: budget must be > 0");

  WaterfillResult result;
  result.u.assign(k.size(), 0.0);

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < k.size(); ++i)
    if (std::isfinite(phi[i]) && phi[i] > 0.0 && k[i] > 0.0)
      active.push_back(i);
  if (active.empty()) return result;

  double beta = 0.0;
  while (true) {
    double weighted = 0.0, mass = budget;
    for (std::size_t i : active) {
      weighted += k[i] * std::sqrt(phi[i]);
      mass += k[i];
    }
    double sqrt_beta = weighted / mass;
    beta = sqrt_beta * sqrt_beta;

    // Smallest remaining priority; strict < keeps the lowest index on ties.
    std::size_t weakest = active.front();
    for (std::size_t i : active)
      if (phi[i] < phi[weakest]) weakest = i;
    if (phi[weakest] >= beta) break;
    std::erase(active, weakest);
    // A lone index always clears its own beta for a positive budget, so
    // the active set cannot drain here.
    if (active.empty()) return result;
  }

  result.any_active = true;
  result.beta = beta;
  for (std::size_t i : active)
    result.u[i] = std::max(k[i] * (std::sqrt(phi[i] / beta) - 1.0), 0.0);
  return result;
}

double weighted_error_ds(const PersonParams& p, double s, double c,
                         double theta) {
  double denom = p.mu * c + p.lambda * s + s * c;
  if (denom == 0.0)
    throw std::domain_error("weighted_error_ds: undefined at s = c = 0");
  return (p.mu * p.lambda * c / (p.mu + p.lambda)) *
         ((1.0 - theta) * p.mu - theta * (c + p.lambda)) / (denom * denom);
}

double weighted_error_dc(const PersonParams& p, double s, double c,
                         double theta) {
  double denom = p.mu * c + p.lambda * s + s * c;
  if (denom == 0.0)
    throw std::domain_error("weighted_error_dc: undefined at s = c = 0");
  return (p.mu * p.lambda * s / (p.mu + p.lambda)) *
         (theta * p.lambda - (1.0 - theta) * (p.mu + s)) / (denom * denom);
}

double kkt_residual(const PopulationSpec& spec, const TestPolicy& policy,
                    double beta) {
  require_matching_policy(spec, policy, "kkt_residual");
  std::size_t n = spec.size();
  double inv_n = 1.0 / static_cast<double>(n);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const PersonParams& p = spec.people[i];
    double s = policy.s[i], c = policy.c[i];
    if (s == 0.0 && c == 0.0) continue;  // boundary-stationary under its label
    double gs = weighted_error_ds(p, s, c, spec.theta) * inv_n;
    double gc = weighted_error_dc(p, s, c, spec.theta) * inv_n;
    // Active rates need exact stationarity; rates at zero only need their
    // implied nonnegativity multiplier, i.e. grad/n + beta >= 0.
    if (s > 0.0)
      worst = std::max(worst, std::abs(gs + beta));
    else
      worst = std::max(worst, std::max(0.0, -(gs + beta)));
    if (c > 0.0)
      worst = std::max(worst, std::abs(gc + beta));
    else
      worst = std::max(worst, std::max(0.0, -(gc + beta)));
  }
  return worst;
}

PairDecision zero_pair_check(const PersonParams& p, double theta, double s,
                             double c) {
  // If one rate is forced to zero the error no longer depends on the
  // other, so spending any budget on the pair is wasted.
  if (theta * (c + p.lambda) < (1.0 - theta) * p.mu)
    return PairDecision::ZeroSThenPair;
  if ((1.0 - theta) * (s + p.mu) < theta * p.lambda)
    return PairDecision::ZeroCThenPair;
  return PairDecision::Keep;
}

TestPolicy random_init(const PopulationSpec& spec, std::uint64_t seed) {
  if (!(spec.total_rate > 0.0))
    throw std::invalid_argument("random_init: requires a positive budget");
  std::size_t n = spec.size();
  SplitMix64 gen(seed);
  std::vector<double> draws(2 * n);
  double total = 0.0;
  for (double& d : draws) {
    d = -std::log(uniform_unit(gen));
    total += d;
  }
  double scale = spec.total_rate / total;
  TestPolicy policy;
  policy.s.resize(n);
  policy.c.resize(n);
  policy.fixed_label.assign(n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    policy.s[i] = draws[i] * scale;
    policy.c[i] = draws[n + i] * scale;
  }
  return policy;
}

SolverState alternate_minimize(const PopulationSpec& spec,
                               const TestPolicy& init,
                               const SolverOptions& opts) {
  auto violations = validate_population(spec);
  if (!violations.empty())
    throw std::invalid_argument("alternate_minimize: " + violations.front());
  require_matching_policy(spec, init, "alternate_minimize");
  std::size_t n = spec.size();
  double budget = spec.total_rate;

  double init_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) init_sum += init.s[i] + init.c[i];
  if (std::abs(init_sum - budget) > 1e-9 * std::max(1.0, budget))
    throw std::invalid_argument(
        "alternate_minimize: initial rates must exhaust the budget");

  SolverState state;
  state.policy = init;
  refresh_labels(spec, state.policy);

  std::vector<bool> pair_dead(n, false);
  for (std::size_t i = 0; i < n; ++i)
    pair_dead[i] = init.s[i] == 0.0 && init.c[i] == 0.0;

  SolverState best;
  best.objective = std::numeric_limits<double>::infinity();

  auto finish = [&](SolverState& st, int iterations, bool converged) {
    st.iterations = iterations;
    st.converged = converged;
    st.active = active_flags(st.policy);
    st.objective = population_error(spec, st.policy).mean_weighted;
    return st;
  };

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    // Drop pairs where one test direction can only hurt; sticky for the
    // rest of this run, restarts provide the re-exploration.
    for (std::size_t i = 0; i < n; ++i) {
      if (pair_dead[i]) continue;
      if (zero_pair_check(spec.people[i], spec.theta, state.policy.s[i],
                          state.policy.c[i]) != PairDecision::Keep)
        pair_dead[i] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (pair_dead[i]) {
        state.policy.s[i] = 0.0;
        state.policy.c[i] = 0.0;
      }

    auto phi = phi_values(spec, state.policy);
    auto coef = phi_coefficients(spec, state.policy);
    for (std::size_t i = 0; i < n; ++i)
      if (pair_dead[i]) phi[i] = phi[n + i] = kNan;

    WaterfillResult fill = waterfill(coef, phi, budget);
    if (!fill.any_active) {
      // Nothing left to allocate: the whole budget is declined and every
      // person falls back to a constant label.
      state.policy.s.assign(n, 0.0);
      state.policy.c.assign(n, 0.0);
      refresh_labels(spec, state.policy);
      state.beta = 0.0;
      return finish(state, iter, true);
    }

    double max_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_change = std::max(max_change,
                            std::abs(fill.u[i] - state.policy.s[i]));
      max_change = std::max(max_change,
                            std::abs(fill.u[n + i] - state.policy.c[i]));
      state.policy.s[i] = fill.u[i];
      state.policy.c[i] = fill.u[n + i];
    }
    refresh_labels(spec, state.policy);
    // The water-filling multiplier prices the summed error; the report
    // carries the mean-objective multiplier.
    state.beta = fill.beta / static_cast<double>(n);

    double residual = kkt_residual(spec, state.policy, state.beta);
    double objective = population_error(spec, state.policy).mean_weighted;
    if (objective < best.objective) {
      best = state;
      best.objective = objective;
      best.iterations = iter;
    }
    if (residual < opts.kkt_tol) return finish(state, iter, true);
    if (max_change < opts.rate_change_tol)
      return finish(state, iter, residual < opts.kkt_tol);
  }
  return finish(best, opts.max_iterations, false);
}

SolverReport solve(const PopulationSpec& spec, const SolverOptions& opts) {
  auto violations = validate_population(spec);
  if (!violations.empty())
    throw std::invalid_argument("solve: " + violations.front());
  if (opts.restarts < 0)
    throw std::invalid_argument("solve: restarts must be >= 0");
  std::size_t n = spec.size();

  struct Candidate {
    TestPolicy policy;
    double objective = 0.0;
    double beta = 0.0;
    double residual = 0.0;
    bool converged = false;
    int iterations = 0;
  };
  std::optional<Candidate> best;
  auto consider = [&](Candidate cand) {
    if (!best || cand.objective < best->objective) best = std::move(cand);
  };
  std::vector<RestartOutcome> trace;
  auto run = [&](const TestPolicy& init, std::uint64_t label_seed) {
    SolverState st = alternate_minimize(spec, init, opts);
    trace.push_back({label_seed, st.objective, st.converged});
    double residual = kkt_residual(spec, st.policy, st.beta);
    consider({std::move(st.policy), st.objective, st.beta, residual,
              st.converged, st.iterations});
  };

  // Baseline: decline the whole budget and label everyone.
  {
    TestPolicy baseline = no_test_policy(spec);
    double objective = population_error(spec, baseline).mean_weighted;
    consider({std::move(baseline), objective, 0.0, 0.0, true, 0});
  }

  if (spec.total_rate > 0.0) {
    TestPolicy uniform = TestPolicy::uniform_split(n, spec.total_rate);
    // The raw uniform policy itself competes, so the report can never be
    // worse than testing everyone equally.
    consider({uniform, population_error(spec, uniform).mean_weighted, 0.0,
              kkt_residual(spec, uniform, 0.0), false, 0});
    run(uniform, 0);
    if (opts.initial_policy) {
      TestPolicy warm = *opts.initial_policy;
      require_matching_policy(spec, warm, "solve");
      // Project onto the budget surface the runs start from.
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += warm.s[i] + warm.c[i];
      if (total > 0.0) {
        double scale = spec.total_rate / total;
        for (std::size_t i = 0; i < n; ++i) {
          warm.s[i] *= scale;
          warm.c[i] *= scale;
        }
        run(warm, 0);
      }
    }
    for (int r = 0; r < opts.restarts; ++r) {
      std::uint64_t seed = mix_seed(opts.seed, static_cast<std::uint64_t>(r));
      run(random_init(spec, seed), seed);
    }
  }

  SolverReport report;
  report.policy = std::move(best->policy);
  report.objective = best->objective;
  report.beta = best->beta;
  report.kkt_residual = best->residual;
  report.converged = best->converged;
  report.iterations_used = best->iterations;
  report.restarts = std::move(trace);
  return report;
}

SolverReport solve(const PopulationSpec& spec, int restarts,
                   std::uint64_t seed) {
  SolverOptions opts;
  opts.restarts = restarts;
  opts.seed = seed;
  return solve(spec, opts);
}

}  // namespace epitrack
