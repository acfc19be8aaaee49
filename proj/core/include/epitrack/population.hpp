#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace epitrack {

// Per-person dynamics: a two-state process that turns infected with rate
// `lambda` while healthy and recovers with rate `mu` while infected.
struct PersonParams {
  double lambda = 0.0;
  double mu = 0.0;
};

// Constant estimate used for people that are never tested.
enum class FixedLabel { AlwaysHealthy, AlwaysInfected };

// Test rates per person: s applies while the person is marked healthy,
// c while marked infected. A person with s == c == 0 carries a FixedLabel
// instead of a test schedule.
struct TestPolicy {
  std::vector<double> s;
  std::vector<double> c;
  std::vector<std::optional<FixedLabel>> fixed_label;

  std::size_t size() const { return s.size(); }

  // Evenly split budget: s_i = c_i = total_rate / (2n).
  static TestPolicy uniform_split(std::size_t n, double total_rate);
};

struct PopulationSpec {
  std::vector<PersonParams> people;
  double total_rate = 0.0;  // budget for sum(s) + sum(c)
  double theta = 0.5;       // weight on undetected-infection error, in [0,1]

  std::size_t size() const { return people.size(); }
};

// Rates a * ratio^i for i = 1..n, scaled so they sum to `total`.
// ratio < 1 gives a strictly decreasing profile, ratio > 1 increasing,
// ratio == 1 the uniform profile.
std::vector<double> geometric_rate_profile(std::size_t n, double ratio,
                                           double total);

// total / n for every person.
std::vector<double> uniform_rate_profile(std::size_t n, double total);

// Collects every invariant violation (non-positive rates, theta out of
// [0,1], negative budget) instead of stopping at the first, so a CLI run
// can report all config problems at once. Empty result means valid.
// Person indices in messages are 1-based.
std::vector<std::string> validate_population(const PopulationSpec& spec);

std::vector<std::string> validate_policy(const PopulationSpec& spec,
                                         const TestPolicy& policy);

const char* to_string(FixedLabel label);
std::optional<FixedLabel> fixed_label_from_string(const std::string& text);

// JSON document format:
//   {"theta": 0.5, "total_rate": 16.0,
//    "people": [{"lambda": 0.9, "mu": 0.25}, ...]}
PopulationSpec population_from_json(const std::string& text);
std::string to_json_string(const PopulationSpec& spec);

// {"s": [...], "c": [...], "fixed_labels": [null | "healthy" | "infected", ...]}
// fixed_labels may be omitted when no entry is labeled.
TestPolicy policy_from_json(const std::string& text);
std::string to_json_string(const TestPolicy& policy);

}  // namespace epitrack
