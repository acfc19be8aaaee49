#pragma once

#include <vector>

#include "epitrack/population.hpp"

namespace epitrack {

// Expected durations of one estimate cycle for a tested person (s, c > 0).
// A cycle is one marked-healthy interval followed by one marked-infected
// interval; the error means are the expected time spent in the mismatched
// state within each interval.
struct CycleStatistics {
  double marked_healthy_mean;   // E[length of a marked-healthy interval]
  double marked_infected_mean;  // E[length of a marked-infected interval]
  double error_healthy_mean;    // E[time infected while marked healthy] = 1/s
  double error_infected_mean;   // E[time healthy while marked infected] = 1/c
};

// Long-run fractions of time in the two mismatch states.
struct ErrorRates {
  double undetected;  // infected but marked healthy
  double stale;       // healthy but still marked infected
};

// Per-person error with the importance weighting applied.
struct ErrorBreakdown {
  double undetected = 0.0;
  double stale = 0.0;
  double weighted = 0.0;  // theta * undetected + (1 - theta) * stale
};

struct NoTestChoice {
  double error;      // weighted error under the best constant label
  FixedLabel label;  // label achieving it; ties go to AlwaysHealthy
};

struct PopulationError {
  double mean_weighted = 0.0;    // average weighted error over the population
  double mean_undetected = 0.0;  // average undetected-infection fraction
  double mean_stale = 0.0;       // average stale-infection fraction
  std::vector<ErrorBreakdown> per_person;
};

// Requires lambda, mu, s, c > 0; throws std::domain_error otherwise
// (untested people are handled by no_test_error / the fixed-label branch).
CycleStatistics expected_cycle_durations(const PersonParams& p, double s,
                                         double c);

// Closed-form long-run mismatch fractions for a tested person (s, c > 0).
ErrorRates error_rates(const PersonParams& p, double s, double c);

// theta-weighted long-run error. Defined for s + c > 0; both rates zero is
// a domain error (use no_test_error).
double weighted_error(const PersonParams& p, double s, double c, double theta);

// Best constant-label error when a person is never tested.
NoTestChoice no_test_error(const PersonParams& p, double theta);

// Weighted error of a whole population under a policy. People with one
// rate zero degenerate to the matching constant-label values; people with
// both rates zero must carry a fixed_label.
PopulationError population_error(const PopulationSpec& spec,
                                 const TestPolicy& policy);

// All-zero policy with the optimal constant label per person.
TestPolicy no_test_policy(const PopulationSpec& spec);

}  // namespace epitrack
