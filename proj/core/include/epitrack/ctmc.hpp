#pragma once

#include <array>
#include <optional>

#include "epitrack/population.hpp"

namespace epitrack {

// Stationary distribution of the joint (status, estimate) chain.
// State order: 0 = (healthy, marked healthy), 1 = (infected, marked healthy),
// 2 = (infected, marked infected), 3 = (healthy, marked infected).
struct CtmcDistribution {
  std::array<double, 4> pi{};

  double healthy_agree() const { return pi[0]; }
  double undetected() const { return pi[1]; }   // infected, marked healthy
  double infected_agree() const { return pi[2]; }
  double stale() const { return pi[3]; }        // healthy, marked infected
};

// Exact stationary distribution by direct 4x4 linear solve. Serves as the
// independent oracle for the renewal-cycle closed forms: undetected() must
// match ErrorRates::undetected and stale() must match ErrorRates::stale.
//
// With s == c == 0 the estimate never moves, the chain degenerates to the
// two-state infection process, and a fixed label is required to pin the
// estimate; omitting it throws std::invalid_argument.
CtmcDistribution ctmc_stationary(const PersonParams& p, double s, double c,
                                 std::optional<FixedLabel> label = {});

}  // namespace epitrack
