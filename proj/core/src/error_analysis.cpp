#include "epitrack/error_analysis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace epitrack {

namespace {

void require_positive_params(const PersonParams& p, const char* where) {
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda) || !(p.mu > 0.0) ||
      !std::isfinite(p.mu))
    throw std::domain_error(std::string(where) +
                            ": lambda and mu must be positive and finite");
}

void require_theta(double theta, const char* where) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::domain_error(std::string(where) + ": theta must lie in [0, 1]");
}

// Long-run mismatch fractions of a person pinned to a constant estimate.
ErrorRates fixed_label_rates(const PersonParams& p, FixedLabel label) {
  double total = p.lambda + p.mu;
  if (label == FixedLabel::AlwaysHealthy) return {p.lambda / total, 0.0};
  return {0.0, p.mu / total};
}

}  // namespace

CycleStatistics expected_cycle_durations(const PersonParams& p, double s,
                                         double c) {
  require_positive_params(p, "expected_cycle_durations");
  if (!(s > 0.0) || !(c > 0.0))
    throw std::domain_error(
        "expected_cycle_durations: cycle undefined for s = 0 or c = 0; "
        "use the no-test baseline instead");
  CycleStatistics stats;
  stats.marked_healthy_mean = 1.0 / s + (s + p.mu) / (s * p.lambda);
  stats.marked_infected_mean = 1.0 / c + (c + p.lambda) / (c * p.mu);
  stats.error_healthy_mean = 1.0 / s;
  stats.error_infected_mean = 1.0 / c;
  return stats;
}

ErrorRates error_rates(const PersonParams& p, double s, double c) {
  require_positive_params(p, "error_rates");
  if (!(s > 0.0) || !(c > 0.0))
    throw std::domain_error("error_rates: requires s > 0 and c > 0");
  double front = p.mu * p.lambda / (p.mu + p.lambda);
  double denom = p.mu * c + p.lambda * s + c * s;
  return {front * c / denom, front * s / denom};
}

double weighted_error(const PersonParams& p, double s, double c,
                      double theta) {
  require_positive_params(p, "weighted_error");
  require_theta(theta, "weighted_error");
  if (!(s >= 0.0) || !(c >= 0.0))
    throw std::domain_error("weighted_error: rates must be >= 0");
  if (s == 0.0 && c == 0.0)
    throw std::domain_error(
        "weighted_error: undefined at s = c = 0; use no_test_error");
  // Continuous on s + c > 0: at s = 0 this is the always-healthy error,
  // at c = 0 the always-infected error.
  double front = p.mu * p.lambda / (p.mu + p.lambda);
  double denom = p.mu * c + p.lambda * s + c * s;
  return front * (theta * c + (1.0 - theta) * s) / denom;
}

NoTestChoice no_test_error(const PersonParams& p, double theta) {
  require_positive_params(p, "no_test_error");
  require_theta(theta, "no_test_error");
  double total = p.lambda + p.mu;
  double healthy = theta * p.lambda / total;         // estimate fixed at healthy
  double infected = (1.0 - theta) * p.mu / total;    // estimate fixed at infected
  if (healthy <= infected) return {healthy, FixedLabel::AlwaysHealthy};
  return {infected, FixedLabel::AlwaysInfected};
}

PopulationError population_error(const PopulationSpec& spec,
                                 const TestPolicy& policy) {
  std::size_t n = spec.size();
  if (policy.s.size() != n || policy.c.size() != n ||
      policy.fixed_label.size() != n)
    throw std::invalid_argument("population_error: policy dimension mismatch");
  require_theta(spec.theta, "population_error");

  PopulationError result;
  result.per_person.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PersonParams& p = spec.people[i];
    double s = policy.s[i], c = policy.c[i];
    ErrorRates rates{};
    if (s > 0.0 && c > 0.0) {
      rates = error_rates(p, s, c);
    } else if (s == 0.0 && c == 0.0) {
      if (!policy.fixed_label[i])
        throw std::invalid_argument("population_error: person " +
                                    std::to_string(i + 1) +
                                    " is untested but has no fixed label");
      rates = fixed_label_rates(p, *policy.fixed_label[i]);
    } else if (s == 0.0) {
      // Never retested once marked healthy: the estimate settles at
      // healthy, same long-run error as the explicit label.
      rates = fixed_label_rates(p, FixedLabel::AlwaysHealthy);
    } else {
      rates = fixed_label_rates(p, FixedLabel::AlwaysInfected);
    }
    ErrorBreakdown breakdown;
    breakdown.undetected = rates.undetected;
    breakdown.stale = rates.stale;
    breakdown.weighted =
        spec.theta * rates.undetected + (1.0 - spec.theta) * rates.stale;
    result.mean_undetected += breakdown.undetected;
    result.mean_stale += breakdown.stale;
    result.mean_weighted += breakdown.weighted;
    result.per_person.push_back(breakdown);
  }
  double inv_n = 1.0 / static_cast<double>(n);
  result.mean_undetected *= inv_n;
  result.mean_stale *= inv_n;
  result.mean_weighted *= inv_n;
  return result;
}

TestPolicy no_test_policy(const PopulationSpec& spec) {
  TestPolicy policy;
  std::size_t n = spec.size();
  policy.s.assign(n, 0.0);
  policy.c.assign(n, 0.0);
  policy.fixed_label.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    policy.fixed_label[i] = no_test_error(spec.people[i], spec.theta).label;
  return policy;
}

}  // namespace epitrack
