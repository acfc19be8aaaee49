#include "epitrack/experiments.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json_detail.hpp"

namespace epitrack {

using detail::ojson;

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// ---- Scenario configuration ----------------------------------------------

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig config;
  config.theta = 0.5;
  config.total_rate = 16.0;
  config.profile = ProfileSpec{};
  return config;
}

PopulationSpec ScenarioConfig::population() const {
  PopulationSpec spec;
  spec.theta = theta;
  spec.total_rate = total_rate;
  if (people && profile)
    throw std::invalid_argument(
        "scenario: give either inline people or a profile, not both");
  if (people) {
    spec.people = *people;
  } else if (profile) {
    std::vector<double> lambdas, mus;
    if (profile->kind == ProfileSpec::Kind::Geometric) {
      lambdas = geometric_rate_profile(profile->n, profile->lambda_ratio,
                                       profile->lambda_total);
      mus = geometric_rate_profile(profile->n, profile->mu_ratio,
                                   profile->mu_total);
    } else {
      lambdas = uniform_rate_profile(profile->n, profile->lambda_total);
      mus = uniform_rate_profile(profile->n, profile->mu_total);
    }
    spec.people.resize(profile->n);
    for (std::size_t i = 0; i < profile->n; ++i)
      spec.people[i] = {lambdas[i], mus[i]};
  } else {
    throw std::invalid_argument("scenario: no population source");
  }
  return spec;
}

std::vector<std::string> validate_scenario(const ScenarioConfig& config) {
  std::vector<std::string> violations;
  if (config.people && config.profile)
    violations.push_back("exactly one population source allowed, got both "
                         "inline people and a profile");
  if (!config.people && !config.profile)
    violations.push_back("a population source (people or profile) is required");
  if (config.profile) {
    const auto& pr = *config.profile;
    if (pr.n < 1) violations.push_back("profile: n must be >= 1");
    if (!(pr.lambda_total > 0.0) || !(pr.mu_total > 0.0))
      violations.push_back("profile: rate totals must be > 0");
    if (pr.kind == ProfileSpec::Kind::Geometric &&
        (!(pr.lambda_ratio > 0.0) || !(pr.mu_ratio > 0.0)))
      violations.push_back("profile: geometric ratios must be > 0");
  }
  if (config.sweep) {
    const auto& sw = *config.sweep;
    if (sw.param != "C" && sw.param != "n" && sw.param != "theta")
      violations.push_back("sweep: param must be one of C, n, theta");
    if (sw.values.empty()) violations.push_back("sweep: values are empty");
    for (std::size_t i = 1; i < sw.values.size(); ++i)
      if (!(sw.values[i] > sw.values[i - 1])) {
        violations.push_back("sweep: values must be strictly increasing");
        break;
      }
    if (sw.param == "n") {
      if (config.people)
        violations.push_back("sweep: an n sweep needs a profile source");
      for (double v : sw.values)
        if (v < 1.0 || v != std::floor(v)) {
          violations.push_back("sweep: n values must be integers >= 1");
          break;
        }
    }
    if (sw.param == "theta")
      for (double v : sw.values)
        if (!(v >= 0.0 && v <= 1.0)) {
          violations.push_back("sweep: theta values must lie in [0, 1]");
          break;
        }
    if (sw.param == "C")
      for (double v : sw.values)
        if (!(v >= 0.0)) {
          violations.push_back("sweep: C values must be >= 0");
          break;
        }
  }
  if (config.solver.restarts < 0)
    violations.push_back("solver: restarts must be >= 0");
  if (!(config.solver.kkt_tol > 0.0))
    violations.push_back("solver: tol must be > 0");
  if (!(config.sim.horizon > 0.0))
    violations.push_back("sim: horizon must be > 0");
  if (!violations.empty()) return violations;

  try {
    PopulationSpec spec = config.population();
    auto pop_violations = validate_population(spec);
    violations.insert(violations.end(), pop_violations.begin(),
                      pop_violations.end());
    if (config.policy) {
      auto pol_violations = validate_policy(spec, *config.policy);
      violations.insert(violations.end(), pol_violations.begin(),
                        pol_violations.end());
    }
  } catch (const std::exception& e) {
    violations.push_back(e.what());
  }
  return violations;
}

ScenarioConfig scenario_from_json(const std::string& text) {
  ojson j = ojson::parse(text);
  ScenarioConfig config;
  config.theta = j.at("theta").get<double>();
  config.total_rate = j.at("total_rate").get<double>();
  if (j.contains("people")) {
    std::vector<PersonParams> people;
    for (const auto& pj : j.at("people"))
      people.push_back(
          {pj.at("lambda").get<double>(), pj.at("mu").get<double>()});
    config.people = std::move(people);
  }
  if (j.contains("profile")) {
    const auto& pj = j.at("profile");
    ProfileSpec profile;
    std::string kind = pj.at("type").get<std::string>();
    if (kind == "geometric")
      profile.kind = ProfileSpec::Kind::Geometric;
    else if (kind == "uniform")
      profile.kind = ProfileSpec::Kind::Uniform;
    else
      throw std::invalid_argument("profile: unknown type \"" + kind + "\"");
    profile.n = pj.at("n").get<std::size_t>();
    profile.lambda_total = pj.value("lambda_total", profile.lambda_total);
    profile.mu_total = pj.value("mu_total", profile.mu_total);
    profile.lambda_ratio = pj.value("lambda_ratio", profile.lambda_ratio);
    profile.mu_ratio = pj.value("mu_ratio", profile.mu_ratio);
    config.profile = profile;
  }
  if (j.contains("policy"))
    config.policy = detail::policy_from_json_obj(j.at("policy"));
  if (j.contains("sweep")) {
    SweepSpec sweep;
    sweep.param = j.at("sweep").at("param").get<std::string>();
    sweep.values = j.at("sweep").at("values").get<std::vector<double>>();
    config.sweep = std::move(sweep);
  }
  if (j.contains("solver")) {
    const auto& sj = j.at("solver");
    config.solver.restarts = sj.value("restarts", config.solver.restarts);
    config.solver.seed = sj.value("seed", config.solver.seed);
    config.solver.kkt_tol = sj.value("tol", config.solver.kkt_tol);
    config.solver.max_iterations =
        sj.value("max_iter", config.solver.max_iterations);
  }
  if (j.contains("sim")) {
    const auto& sj = j.at("sim");
    config.sim.enabled = sj.value("enabled", config.sim.enabled);
    config.sim.horizon = sj.value("horizon", config.sim.horizon);
    config.sim.batches = sj.value("batches", config.sim.batches);
  }
  if (j.contains("out")) config.out = j.at("out").get<std::string>();
  if (j.contains("format")) {
    std::string f = j.at("format").get<std::string>();
    if (f == "csv")
      config.format = OutputFormat::Csv;
    else if (f == "json")
      config.format = OutputFormat::Json;
    else
      throw std::invalid_argument("format must be csv or json, got \"" + f +
                                  "\"");
  }
  return config;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json(buffer.str());
}

// ---- Experiment runners ----------------------------------------------------

namespace {

std::vector<double> sweep_values_or(const ScenarioConfig& config,
                                    const std::string& param,
                                    std::vector<double> fallback) {
  if (config.sweep && config.sweep->param == param)
    return config.sweep->values;
  return fallback;
}

std::vector<double> default_budget_values() {
  std::vector<double> values;
  for (int b = 5; b <= 20; ++b) values.push_back(b);
  return values;
}

std::vector<double> default_population_values() {
  std::vector<double> values;
  for (int n = 2; n <= 30; ++n) values.push_back(n);
  return values;
}

std::vector<double> default_theta_values() {
  std::vector<double> values;
  for (int k = 4; k <= 14; ++k) values.push_back(k / 20.0);
  return values;
}

void require_valid(const ScenarioConfig& config) {
  auto violations = validate_scenario(config);
  if (!violations.empty())
    throw std::invalid_argument("scenario: " + violations.front());
}

}  // namespace

RateAllocationResult run_rate_allocation(const ScenarioConfig& config) {
  require_valid(config);
  PopulationSpec spec = config.population();
  SolverOptions opts = config.solver;
  if (config.policy) opts.initial_policy = config.policy;

  RateAllocationResult result;
  result.report = solve(spec, opts);

  PopulationError opt_err = population_error(spec, result.report.policy);
  TestPolicy uniform =
      TestPolicy::uniform_split(spec.size(), spec.total_rate);
  PopulationError uniform_err = population_error(spec, uniform);

  result.delta_opt = opt_err.mean_weighted;
  result.delta_uniform = uniform_err.mean_weighted;
  result.rows.reserve(spec.size());
  double notest_sum = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    RateAllocationRow row;
    row.person = static_cast<int>(i) + 1;
    row.lambda = spec.people[i].lambda;
    row.mu = spec.people[i].mu;
    row.s = result.report.policy.s[i];
    row.c = result.report.policy.c[i];
    row.delta_opt = opt_err.per_person[i].weighted;
    row.delta_uniform = uniform_err.per_person[i].weighted;
    row.delta_notest = no_test_error(spec.people[i], spec.theta).error;
    notest_sum += row.delta_notest;
    result.rows.push_back(row);
  }
  result.delta_notest = notest_sum / static_cast<double>(spec.size());
  if (config.sim.enabled)
    result.simulation =
        simulate_population(spec, result.report.policy, config.sim.horizon,
                            config.solver.seed, config.sim.batches);
  return result;
}

BudgetSweepResult run_budget_sweep(const ScenarioConfig& config) {
  require_valid(config);
  PopulationSpec spec = config.population();
  BudgetSweepResult result;
  for (double budget : sweep_values_or(config, "C", default_budget_values())) {
    spec.total_rate = budget;
    SolverReport report = solve(spec, config.solver);
    result.rows.push_back({budget, report.objective});
    result.reports.push_back(std::move(report));
  }
  return result;
}

PopulationSweepResult run_population_sweep(const ScenarioConfig& config) {
  require_valid(config);
  ProfileSpec profile = config.profile ? *config.profile : ProfileSpec{};
  PopulationSweepResult result;
  for (double value :
       sweep_values_or(config, "n", default_population_values())) {
    auto n = static_cast<std::size_t>(value);

    ScenarioConfig uniform_point = config;
    ProfileSpec uniform_profile = profile;
    uniform_profile.kind = ProfileSpec::Kind::Uniform;
    uniform_profile.n = n;
    uniform_point.people.reset();
    uniform_point.profile = uniform_profile;
    SolverReport uniform_report =
        solve(uniform_point.population(), config.solver);

    ScenarioConfig geometric_point = config;
    ProfileSpec geometric_profile = profile;
    geometric_profile.kind = ProfileSpec::Kind::Geometric;
    geometric_profile.n = n;
    geometric_point.people.reset();
    geometric_point.profile = geometric_profile;
    SolverReport geometric_report =
        solve(geometric_point.population(), config.solver);

    result.rows.push_back({static_cast<int>(n), uniform_report.objective,
                           geometric_report.objective});
    result.uniform_reports.push_back(std::move(uniform_report));
    result.geometric_reports.push_back(std::move(geometric_report));
  }
  return result;
}

ImportanceSweepResult run_importance_sweep(const ScenarioConfig& config) {
  require_valid(config);
  PopulationSpec spec = config.population();
  ImportanceSweepResult result;
  for (double theta :
       sweep_values_or(config, "theta", default_theta_values())) {
    spec.theta = theta;
    SolverReport report = solve(spec, config.solver);
    PopulationError err = population_error(spec, report.policy);
    double sum_s = 0.0, sum_c = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      sum_s += report.policy.s[i];
      sum_c += report.policy.c[i];
    }
    result.rows.push_back({theta, err.mean_weighted, err.mean_undetected,
                           err.mean_stale, sum_s, sum_c});
    result.reports.push_back(std::move(report));
  }
  return result;
}

// ---- Emission --------------------------------------------------------------

namespace {

ojson report_to_json(const SolverReport& report) {
  ojson j;
  j["objective"] = report.objective;
  j["kkt_residual"] = report.kkt_residual;
  j["beta"] = report.beta;
  j["converged"] = report.converged;
  j["iterations_used"] = report.iterations_used;
  j["policy"] = detail::policy_to_json(report.policy);
  ojson restarts = ojson::array();
  for (const auto& r : report.restarts)
    restarts.push_back({{"seed", r.seed},
                        {"objective", r.objective},
                        {"converged", r.converged}});
  j["restarts"] = std::move(restarts);
  return j;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string to_csv(const RateAllocationResult& r) {
  std::string out =
      "i,lambda,mu,s,c,delta_opt,delta_uniform,delta_notest\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.person) + ',' + format_double(row.lambda) +
           ',' + format_double(row.mu) + ',' + format_double(row.s) + ',' +
           format_double(row.c) + ',' + format_double(row.delta_opt) + ',' +
           format_double(row.delta_uniform) + ',' +
           format_double(row.delta_notest) + '\n';
  }
  return out;
}

std::string to_csv(const BudgetSweepResult& r) {
  std::string out = "C,delta\n";
  for (const auto& row : r.rows)
    out += format_double(row.budget) + ',' + format_double(row.delta) + '\n';
  return out;
}

std::string to_csv(const PopulationSweepResult& r) {
  std::string out = "n,delta_uniform_rates,delta_geometric_rates\n";
  for (const auto& row : r.rows)
    out += std::to_string(row.n) + ',' +
           format_double(row.delta_uniform_rates) + ',' +
           format_double(row.delta_geometric_rates) + '\n';
  return out;
}

std::string to_csv(const ImportanceSweepResult& r) {
  std::string out = "theta,delta,delta_bar1,delta_bar2,sum_s,sum_c\n";
  for (const auto& row : r.rows)
    out += format_double(row.theta) + ',' + format_double(row.delta) + ',' +
           format_double(row.delta_bar1) + ',' +
           format_double(row.delta_bar2) + ',' + format_double(row.sum_s) +
           ',' + format_double(row.sum_c) + '\n';
  return out;
}

std::string to_json_string(const RateAllocationResult& r) {
  ojson j;
  j["delta_opt"] = r.delta_opt;
  j["delta_uniform"] = r.delta_uniform;
  j["delta_notest"] = r.delta_notest;
  ojson rows = ojson::array();
  for (const auto& row : r.rows)
    rows.push_back({{"i", row.person},
                    {"lambda", row.lambda},
                    {"mu", row.mu},
                    {"s", row.s},
                    {"c", row.c},
                    {"delta_opt", row.delta_opt},
                    {"delta_uniform", row.delta_uniform},
                    {"delta_notest", row.delta_notest}});
  j["rows"] = std::move(rows);
  j["report"] = report_to_json(r.report);
  if (r.simulation) {
    ojson sim;
    sim["delta_hat"] = r.simulation->mean_weighted;
    sim["delta_bar1_hat"] = r.simulation->mean_undetected;
    sim["delta_bar2_hat"] = r.simulation->mean_stale;
    j["simulation"] = std::move(sim);
  }
  return dump(j);
}

std::string to_json_string(const BudgetSweepResult& r) {
  ojson rows = ojson::array();
  for (const auto& row : r.rows)
    rows.push_back({{"C", row.budget}, {"delta", row.delta}});
  return dump(ojson{{"rows", std::move(rows)}});
}

std::string to_json_string(const PopulationSweepResult& r) {
  ojson rows = ojson::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n},
                    {"delta_uniform_rates", row.delta_uniform_rates},
                    {"delta_geometric_rates", row.delta_geometric_rates}});
  return dump(ojson{{"rows", std::move(rows)}});
}

std::string to_json_string(const ImportanceSweepResult& r) {
  ojson rows = ojson::array();
  for (const auto& row : r.rows)
    rows.push_back({{"theta", row.theta},
                    {"delta", row.delta},
                    {"delta_bar1", row.delta_bar1},
                    {"delta_bar2", row.delta_bar2},
                    {"sum_s", row.sum_s},
                    {"sum_c", row.sum_c}});
  return dump(ojson{{"rows", std::move(rows)}});
}

std::string to_json_string(const SolverReport& r) {
  return dump(report_to_json(r));
}

// ---- CLI -------------------------------------------------------------------

namespace {

struct CliArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::optional<double> tol;
  std::optional<double> horizon;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool strict = false;
};

void add_common_options(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("--config", args.config_path, "Scenario config (JSON)");
  cmd->add_option("--seed", args.seed, "Master RNG seed");
  cmd->add_option("--restarts", args.restarts, "Solver restarts");
  cmd->add_option("--tol", args.tol, "Solver KKT tolerance");
  cmd->add_option("--horizon", args.horizon, "Simulation horizon");
  cmd->add_option("--out", args.out, "Output path, - for stdout");
  cmd->add_option("--format", args.format, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--strict", args.strict,
                "Exit 2 when the solver fails to converge");
}

ScenarioConfig resolve_config(const CliArgs& args, bool config_required,
                              const char* subcommand) {
  ScenarioConfig config;
  if (!args.config_path.empty()) {
    config = load_scenario(args.config_path);
  } else if (config_required) {
    throw std::invalid_argument(std::string(subcommand) +
                                " requires --config <path>");
  } else {
    config = ScenarioConfig::defaults();
  }
  if (args.seed) config.solver.seed = *args.seed;
  if (args.restarts) config.solver.restarts = *args.restarts;
  if (args.tol) config.solver.kkt_tol = *args.tol;
  if (args.horizon) config.sim.horizon = *args.horizon;
  if (args.out) config.out = *args.out;
  if (args.format)
    config.format =
        *args.format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  return config;
}

int write_output(const ScenarioConfig& config, const std::string& text) {
  if (config.out == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(config.out, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open output file: " << config.out << "\n";
    return 1;
  }
  out << text;
  return 0;
}

int report_violations(const std::vector<std::string>& violations) {
  for (const auto& v : violations) std::cerr << "error: " << v << "\n";
  return 1;
}

const TestPolicy& require_policy(const ScenarioConfig& config,
                                 const char* subcommand) {
  if (!config.policy)
    throw std::invalid_argument(std::string(subcommand) +
                                " requires a \"policy\" object in the config");
  return *config.policy;
}

int run_eval(const ScenarioConfig& config) {
  PopulationSpec spec = config.population();
  const TestPolicy& policy = require_policy(config, "eval");
  PopulationError err = population_error(spec, policy);
  std::string text;
  if (config.format == OutputFormat::Csv) {
    text = "i,lambda,mu,s,c,undetected,stale,weighted\n";
    for (std::size_t i = 0; i < spec.size(); ++i) {
      text += std::to_string(i + 1) + ',' +
              format_double(spec.people[i].lambda) + ',' +
              format_double(spec.people[i].mu) + ',' +
              format_double(policy.s[i]) + ',' + format_double(policy.c[i]) +
              ',' + format_double(err.per_person[i].undetected) + ',' +
              format_double(err.per_person[i].stale) + ',' +
              format_double(err.per_person[i].weighted) + '\n';
    }
  } else {
    ojson j;
    j["delta"] = err.mean_weighted;
    j["delta_bar1"] = err.mean_undetected;
    j["delta_bar2"] = err.mean_stale;
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < err.per_person.size(); ++i)
      rows.push_back({{"i", i + 1},
                      {"undetected", err.per_person[i].undetected},
                      {"stale", err.per_person[i].stale},
                      {"weighted", err.per_person[i].weighted}});
    j["per_person"] = std::move(rows);
    text = dump(j);
  }
  return write_output(config, text);
}

int run_solve(const ScenarioConfig& config) {
  PopulationSpec spec = config.population();
  SolverOptions opts = config.solver;
  if (config.policy) opts.initial_policy = config.policy;
  SolverReport report = solve(spec, opts);
  std::string text;
  if (config.format == OutputFormat::Csv) {
    text = "i,lambda,mu,s,c,fixed_label\n";
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const auto& label = report.policy.fixed_label[i];
      text += std::to_string(i + 1) + ',' +
              format_double(spec.people[i].lambda) + ',' +
              format_double(spec.people[i].mu) + ',' +
              format_double(report.policy.s[i]) + ',' +
              format_double(report.policy.c[i]) + ',' +
              (label ? to_string(*label) : "") + '\n';
    }
  } else {
    text = to_json_string(report);
  }
  int rc = write_output(config, text);
  if (rc != 0) return rc;
  return report.converged ? 0 : -2;  // caller maps -2 under --strict
}

int run_simulate(const ScenarioConfig& config) {
  PopulationSpec spec = config.population();
  const TestPolicy& policy = require_policy(config, "simulate");
  PopulationSimReport sim = simulate_population(
      spec, policy, config.sim.horizon, config.solver.seed,
      config.sim.batches);
  std::string text;
  if (config.format == OutputFormat::Csv) {
    text =
        "i,undetected_hat,stale_hat,weighted_hat,stderr_undetected,"
        "stderr_stale,events\n";
    for (std::size_t i = 0; i < sim.per_person.size(); ++i) {
      const SimReport& r = sim.per_person[i];
      text += std::to_string(i + 1) + ',' +
              format_double(r.undetected_hat) + ',' +
              format_double(r.stale_hat) + ',' +
              format_double(r.weighted_hat) + ',' +
              format_double(r.stderr_undetected) + ',' +
              format_double(r.stderr_stale) + ',' +
              std::to_string(r.events) + '\n';
    }
  } else {
    ojson j;
    j["delta_hat"] = sim.mean_weighted;
    j["delta_bar1_hat"] = sim.mean_undetected;
    j["delta_bar2_hat"] = sim.mean_stale;
    j["horizon"] = config.sim.horizon;
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < sim.per_person.size(); ++i) {
      const SimReport& r = sim.per_person[i];
      rows.push_back({{"i", i + 1},
                      {"undetected_hat", r.undetected_hat},
                      {"stale_hat", r.stale_hat},
                      {"weighted_hat", r.weighted_hat},
                      {"stderr_undetected", r.stderr_undetected},
                      {"stderr_stale", r.stderr_stale},
                      {"events", r.events}});
    }
    j["per_person"] = std::move(rows);
    text = dump(j);
  }
  return write_output(config, text);
}

bool all_converged(const std::vector<SolverReport>& reports) {
  for (const auto& r : reports)
    if (!r.converged) return false;
  return true;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Test-rate allocation for tracking binary status processes"};
  app.require_subcommand(1);

  CliArgs args;
  const char* const names[] = {"eval",  "solve", "simulate", "fig4",
                               "fig5", "fig6",  "fig7"};
  const char* const descriptions[] = {
      "Closed-form error of a policy from the config",
      "Optimize test rates under the budget",
      "Monte Carlo estimate of a policy's error",
      "Per-person allocation vs uniform and no-test baselines",
      "Error as a function of the total budget",
      "Error as a function of the population size",
      "Error split as a function of the importance factor"};
  for (int i = 0; i < 7; ++i)
    add_common_options(app.add_subcommand(names[i], descriptions[i]), args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  std::string sub = app.get_subcommands().front()->get_name();

  try {
    bool needs_config = sub == "eval" || sub == "solve" || sub == "simulate";
    ScenarioConfig config = resolve_config(args, needs_config, sub.c_str());
    auto violations = validate_scenario(config);
    if (!violations.empty()) return report_violations(violations);

    int rc = 0;
    bool converged = true;
    if (sub == "eval") {
      rc = run_eval(config);
    } else if (sub == "solve") {
      rc = run_solve(config);
      if (rc == -2) {
        converged = false;
        rc = 0;
      }
    } else if (sub == "simulate") {
      rc = run_simulate(config);
    } else if (sub == "fig4") {
      RateAllocationResult r = run_rate_allocation(config);
      converged = r.report.converged;
      rc = write_output(config, config.format == OutputFormat::Csv
                                    ? to_csv(r)
                                    : to_json_string(r));
    } else if (sub == "fig5") {
      BudgetSweepResult r = run_budget_sweep(config);
      converged = all_converged(r.reports);
      rc = write_output(config, config.format == OutputFormat::Csv
                                    ? to_csv(r)
                                    : to_json_string(r));
    } else if (sub == "fig6") {
      PopulationSweepResult r = run_population_sweep(config);
      converged = all_converged(r.uniform_reports) &&
                  all_converged(r.geometric_reports);
      rc = write_output(config, config.format == OutputFormat::Csv
                                    ? to_csv(r)
                                    : to_json_string(r));
    } else if (sub == "fig7") {
      ImportanceSweepResult r = run_importance_sweep(config);
      converged = all_converged(r.reports);
      rc = write_output(config, config.format == OutputFormat::Csv
                                    ? to_csv(r)
                                    : to_json_string(r));
    }
    if (rc != 0) return rc;
    if (args.strict && !converged) {
      std::cerr << "error: solver did not converge\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace epitrack
