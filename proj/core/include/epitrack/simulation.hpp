#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "epitrack/population.hpp"

namespace epitrack {

// Time-average errors from one simulated trajectory.
struct SimReport {
  double undetected_hat = 0.0;  // fraction of time infected, marked healthy
  double stale_hat = 0.0;       // fraction of time healthy, marked infected
  double weighted_hat = 0.0;    // theta-weighted combination of the two
  double horizon = 0.0;
  std::uint64_t events = 0;     // transitions applied (tests included)
  double stderr_undetected = 0.0;  // batch-means standard errors
  double stderr_stale = 0.0;
  // Occupancy by joint state, ordered as CtmcDistribution; sums to horizon.
  std::array<double, 4> state_time{};
};

// Event-driven simulation of one person's (status, estimate) process from
// status = estimate = healthy at t = 0. In each state the enabled clocks
// (infection, recovery, next test) race; every clock is exponential so
// redrawing them after each event is distributionally exact. A test copies
// the current status into the estimate. With `label` set the estimate is
// frozen and no tests occur. Standard errors come from splitting the run
// into `batches` equal time slices. Deterministic per seed.
SimReport simulate_person(const PersonParams& p, double s, double c,
                          double theta, double horizon, std::uint64_t seed,
                          std::optional<FixedLabel> label = {},
                          int batches = 20);

struct PopulationSimReport {
  std::vector<SimReport> per_person;
  double mean_weighted = 0.0;
  double mean_undetected = 0.0;
  double mean_stale = 0.0;
};

// Independent per-person simulations; person i runs on a substream derived
// from (seed, i), so results do not depend on evaluation order. Untested
// people run with the estimate frozen at their fixed label.
PopulationSimReport simulate_population(const PopulationSpec& spec,
                                        const TestPolicy& policy,
                                        double horizon, std::uint64_t seed,
                                        int batches = 20);

}  // namespace epitrack
