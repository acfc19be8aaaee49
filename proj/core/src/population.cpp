#include "epitrack/population.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "json_detail.hpp"

namespace epitrack {

namespace {

// Compensated (Kahan) summation; keeps profile normalization accurate for
// populations up to ~1e4 people.
double kahan_sum(const std::vector<double>& xs) {
  double sum = 0.0, carry = 0.0;
  for (double x : xs) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

TestPolicy TestPolicy::uniform_split(std::size_t n, double total_rate) {
  TestPolicy policy;
  double rate = total_rate / static_cast<double>(2 * n);
  policy.s.assign(n, rate);
  policy.c.assign(n, rate);
  policy.fixed_label.assign(n, std::nullopt);
  return policy;
}

std::vector<double> geometric_rate_profile(std::size_t n, double ratio,
                                           double total) {
  if (n < 1) throw std::invalid_argument("geometric_rate_profile: n must be >= 1");
  if (!(ratio > 0.0) || !std::isfinite(ratio))
    throw std::invalid_argument("geometric_rate_profile: ratio must be > 0");
  if (!(total > 0.0) || !std::isfinite(total))
    throw std::invalid_argument("geometric_rate_profile: total must be > 0");

  // Weights ratio^i normalized by the largest one so intermediate values
  // never overflow; extreme n * |log ratio| can still underflow the far
  // tail to zero, which is the best double can represent.
  std::vector<double> weights(n);
  double peak_exp = ratio >= 1.0 ? static_cast<double>(n) : 1.0;
  for (std::size_t i = 0; i < n; ++i)
    weights[i] = std::pow(ratio, static_cast<double>(i + 1) - peak_exp);
  double norm = kahan_sum(weights);

  std::vector<double> rates(n);
  double scale = total / norm;
  for (std::size_t i = 0; i < n; ++i) rates[i] = scale * weights[i];
  return rates;
}

std::vector<double> uniform_rate_profile(std::size_t n, double total) {
  return geometric_rate_profile(n, 1.0, total);
}

std::vector<std::string> validate_population(const PopulationSpec& spec) {
  std::vector<std::string> violations;
  if (spec.people.empty())
    violations.push_back("population must contain at least one person");
  for (std::size_t i = 0; i < spec.people.size(); ++i) {
    const auto& p = spec.people[i];
    std::string who = "person " + std::to_string(i + 1);
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda))
      violations.push_back(who + ": lambda must be positive and finite, got " +
                           std::to_string(p.lambda));
    if (!(p.mu > 0.0) || !std::isfinite(p.mu))
      violations.push_back(who + ": mu must be positive and finite, got " +
                           std::to_string(p.mu));
  }
  if (!(spec.total_rate >= 0.0) || !std::isfinite(spec.total_rate))
    violations.push_back("total_rate must be >= 0 and finite, got " +
                         std::to_string(spec.total_rate));
  if (!(spec.theta >= 0.0 && spec.theta <= 1.0))
    violations.push_back("theta must lie in [0, 1], got " +
                         std::to_string(spec.theta));
  return violations;
}

std::vector<std::string> validate_policy(const PopulationSpec& spec,
                                         const TestPolicy& policy) {
  std::vector<std::string> violations;
  std::size_t n = spec.size();
  if (policy.s.size() != n || policy.c.size() != n ||
      policy.fixed_label.size() != n) {
    violations.push_back("policy dimensions do not match population size " +
                         std::to_string(n));
    return violations;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::string who = "person " + std::to_string(i + 1);
    if (!(policy.s[i] >= 0.0) || !std::isfinite(policy.s[i]))
      violations.push_back(who + ": s must be >= 0 and finite");
    if (!(policy.c[i] >= 0.0) || !std::isfinite(policy.c[i]))
      violations.push_back(who + ": c must be >= 0 and finite");
    bool untested = policy.s[i] == 0.0 && policy.c[i] == 0.0;
    if (untested && !policy.fixed_label[i].has_value())
      violations.push_back(who + ": untested (s = c = 0) but no fixed label");
    if (!untested && policy.fixed_label[i].has_value())
      violations.push_back(who + ": fixed label set while test rates are nonzero");
  }
  return violations;
}

const char* to_string(FixedLabel label) {
  return label == FixedLabel::AlwaysHealthy ? "healthy" : "infected";
}

std::optional<FixedLabel> fixed_label_from_string(const std::string& text) {
  if (text == "healthy") return FixedLabel::AlwaysHealthy;
  if (text == "infected") return FixedLabel::AlwaysInfected;
  return std::nullopt;
}

namespace detail {

ojson population_to_json(const PopulationSpec& spec) {
  ojson j;
  j["theta"] = spec.theta;
  j["total_rate"] = spec.total_rate;
  ojson people = ojson::array();
  for (const auto& p : spec.people)
    people.push_back({{"lambda", p.lambda}, {"mu", p.mu}});
  j["people"] = std::move(people);
  return j;
}

PopulationSpec population_from_json_obj(const ojson& j) {
  PopulationSpec spec;
  spec.theta = j.at("theta").get<double>();
  spec.total_rate = j.at("total_rate").get<double>();
  for (const auto& pj : j.at("people")) {
    PersonParams p;
    p.lambda = pj.at("lambda").get<double>();
    p.mu = pj.at("mu").get<double>();
    spec.people.push_back(p);
  }
  return spec;
}

ojson policy_to_json(const TestPolicy& policy) {
  ojson j;
  j["s"] = policy.s;
  j["c"] = policy.c;
  ojson labels = ojson::array();
  for (const auto& label : policy.fixed_label) {
    if (label)
      labels.push_back(to_string(*label));
    else
      labels.push_back(nullptr);
  }
  j["fixed_labels"] = std::move(labels);
  return j;
}

TestPolicy policy_from_json_obj(const ojson& j) {
  TestPolicy policy;
  policy.s = j.at("s").get<std::vector<double>>();
  policy.c = j.at("c").get<std::vector<double>>();
  policy.fixed_label.assign(policy.s.size(), std::nullopt);
  if (j.contains("fixed_labels")) {
    const auto& labels = j.at("fixed_labels");
    if (labels.size() != policy.s.size())
      throw std::invalid_argument("policy: fixed_labels length mismatch");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i].is_null()) continue;
      auto parsed = fixed_label_from_string(labels[i].get<std::string>());
      if (!parsed)
        throw std::invalid_argument("policy: unknown fixed label \"" +
                                    labels[i].get<std::string>() + "\"");
      policy.fixed_label[i] = *parsed;
    }
  }
  return policy;
}

}  // namespace detail

PopulationSpec population_from_json(const std::string& text) {
  return detail::population_from_json_obj(detail::ojson::parse(text));
}

std::string to_json_string(const PopulationSpec& spec) {
  return detail::population_to_json(spec).dump(2);
}

TestPolicy policy_from_json(const std::string& text) {
  return detail::policy_from_json_obj(detail::ojson::parse(text));
}

std::string to_json_string(const TestPolicy& policy) {
  return detail::policy_to_json(policy).dump(2);
}

}  // namespace epitrack
