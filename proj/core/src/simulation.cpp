#include "epitrack/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "epitrack/rng.hpp"

namespace epitrack {

namespace {

int joint_state(int status, int estimate) {
  if (estimate == 0) return status == 0 ? 0 : 1;
  return status == 1 ? 2 : 3;
}

}  // namespace

SimReport simulate_person(const PersonParams& p, double s, double c,
                          double theta, double horizon, std::uint64_t seed,
                          std::optional<FixedLabel> label, int batches) {
  if (!(p.lambda > 0.0) || !(p.mu > 0.0))
    throw std::invalid_argument(
        "simulate_person: lambda and mu must be positive");
  if (!(s >= 0.0) || !(c >= 0.0))
    throw std::invalid_argument("simulate_person: test rates must be >= 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("simulate_person: horizon must be > 0");
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("simulate_person: theta must lie in [0, 1]");
  if (batches < 1)
    throw std::invalid_argument("simulate_person: batches must be >= 1");
  if (label && (s > 0.0 || c > 0.0))
    throw std::invalid_argument(
        "simulate_person: a fixed label excludes test rates");

  SplitMix64 gen(seed);
  int status = 0;
  int estimate = label && *label == FixedLabel::AlwaysInfected ? 1 : 0;
  double now = 0.0;
  std::uint64_t events = 0;

  double batch_len = horizon / batches;
  std::vector<double> batch_err1(batches, 0.0);
  std::vector<double> batch_err2(batches, 0.0);
  std::array<double, 4> occupancy{};

  // Adds the interval [from, to) spent in the current joint state, split
  // across batch boundaries for the error accumulators.
  auto credit = [&](double from, double to) {
    int state = joint_state(status, estimate);
    occupancy[state] += to - from;
    if (state != 1 && state != 3) return;
    std::vector<double>& err = state == 1 ? batch_err1 : batch_err2;
    double a = from;
    while (a < to) {
      int b = std::min(static_cast<int>(a / batch_len), batches - 1);
      double end = std::min(to, batch_len * (b + 1));
      if (!(end > a)) {  // boundary rounding: flush the rest into batch b
        err[b] += to - a;
        break;
      }
      err[b] += end - a;
      a = end;
    }
  };

  while (now < horizon) {
    double status_rate = status == 1 ? p.mu : p.lambda;
    double test_rate = label ? 0.0 : (estimate == 1 ? c : s);
    // All clocks are exponential, so redrawing both after every event
    // leaves the law of the process unchanged.
    double status_at = now + exponential_draw(gen, status_rate);
    double test_at = now + exponential_draw(gen, test_rate);
    double next = std::min(status_at, test_at);
    if (next >= horizon) {
      credit(now, horizon);
      break;
    }
    credit(now, next);
    now = next;
    if (status_at <= test_at)
      status ^= 1;
    else
      estimate = status;  // a test reveals the true status
    ++events;
  }

  SimReport report;
  report.horizon = horizon;
  report.events = events;
  report.state_time = occupancy;
  report.undetected_hat = occupancy[1] / horizon;
  report.stale_hat = occupancy[3] / horizon;
  report.weighted_hat =
      theta * report.undetected_hat + (1.0 - theta) * report.stale_hat;

  auto batch_stderr = [&](const std::vector<double>& err, double mean) {
    if (batches < 2) return 0.0;
    double var = 0.0;
    for (double e : err) {
      double dev = e / batch_len - mean;
      var += dev * dev;
    }
    var /= batches - 1;
    return std::sqrt(var / batches);
  };
  report.stderr_undetected = batch_stderr(batch_err1, report.undetected_hat);
  report.stderr_stale = batch_stderr(batch_err2, report.stale_hat);
  return report;
}

PopulationSimReport simulate_population(const PopulationSpec& spec,
                                        const TestPolicy& policy,
                                        double horizon, std::uint64_t seed,
                                        int batches) {
  auto violations = validate_policy(spec, policy);
  if (!violations.empty())
    throw std::invalid_argument("simulate_population: " + violations.front());

  PopulationSimReport result;
  result.per_person.reserve(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    SimReport r = simulate_person(spec.people[i], policy.s[i], policy.c[i],
                                  spec.theta, horizon, mix_seed(seed, i),
                                  policy.fixed_label[i], batches);
    result.mean_weighted += r.weighted_hat;
    result.mean_undetected += r.undetected_hat;
    result.mean_stale += r.stale_hat;
    result.per_person.push_back(r);
  }
  double inv_n = 1.0 / static_cast<double>(spec.size());
  result.mean_weighted *= inv_n;
  result.mean_undetected *= inv_n;
  result.mean_stale *= inv_n;
  return result;
}

}  // namespace epitrack
