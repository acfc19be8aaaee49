// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criterion 10 drives the installed CLI binary end to end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "epitrack/ctmc.hpp"
#include "epitrack/error_analysis.hpp"
#include "epitrack/experiments.hpp"
#include "epitrack/population.hpp"
#include "epitrack/simulation.hpp"
#include "epitrack/solver.hpp"

using namespace epitrack;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

int g_failures = 0;

void run_criterion(int id, const std::string& name, double time_limit_s,
                   const std::function<void(Outcome&)>& body) {
  Outcome outcome;
  auto start = std::chrono::steady_clock::now();
  try {
    body(outcome);
  } catch (const std::exception& e) {
    outcome.fail(std::string("exception: ") + e.what());
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (time_limit_s > 0.0 && elapsed > time_limit_s)
    outcome.fail("runtime " + std::to_string(elapsed) + "s exceeds " +
                 std::to_string(time_limit_s) + "s");
  if (!outcome.pass) ++g_failures;
  std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n",
              outcome.pass ? "PASS" : "FAIL", id, name.c_str(), elapsed,
              outcome.detail.empty() ? "" : " -- ",
              outcome.detail.c_str());
  std::fflush(stdout);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
  return std::exp(d(rng));
}

// Stationarity, threshold, and budget-equality checks for a solver report.
std::vector<std::string> kkt_certificate(const PopulationSpec& spec,
                                         const SolverReport& report) {
  std::vector<std::string> problems;
  if (!report.converged) {
    problems.push_back("solve did not converge");
    return problems;
  }
  double residual = kkt_residual(spec, report.policy, report.beta);
  if (!(residual < 1e-8))
    problems.push_back("stationarity residual " + format_double(residual));

  std::size_t n = spec.size();
  auto phi = phi_values(spec, report.policy);
  double beta_sum = report.beta * static_cast<double>(n);
  double threshold_slack = 1e-8 * std::max(1.0, beta_sum);
  double total = 0.0;
  bool any_pair_active = false;
  for (std::size_t i = 0; i < n; ++i) {
    double s = report.policy.s[i], c = report.policy.c[i];
    total += s + c;
    if (s > 0.0 && c > 0.0) any_pair_active = true;
    const PersonParams& p = spec.people[i];
    if (s == 0.0 && c == 0.0) {
      bool zero_pair_ok =
          spec.theta * p.lambda <= (1.0 - spec.theta) * p.mu ||
          (1.0 - spec.theta) * p.mu <= spec.theta * p.lambda;
      if (!zero_pair_ok)
        problems.push_back("person " + std::to_string(i + 1) +
                           ": unjustified zero pair");
    } else if (s == 0.0) {
      if (!(phi[i] <= beta_sum + threshold_slack))
        problems.push_back("person " + std::to_string(i + 1) +
                           ": inactive s violates its threshold");
    } else if (c == 0.0) {
      if (!(phi[n + i] <= beta_sum + threshold_slack))
        problems.push_back("person " + std::to_string(i + 1) +
                           ": inactive c violates its threshold");
    }
  }
  if (any_pair_active && std::abs(total - spec.total_rate) > 1e-9)
    problems.push_back("active policy off the budget surface by " +
                       format_double(total - spec.total_rate));
  if (total > spec.total_rate + 1e-9)
    problems.push_back("budget exceeded");
  return problems;
}

std::string shell_quote(const std::string& text) {
  return "'" + text + "'";
}

int run_cli_command(const std::string& args, const fs::path& out) {
  std::string command = std::string(EPITRACK_CLI_PATH) + " " + args +
                        " --out " + shell_quote(out.string()) +
                        " > /dev/null 2>&1";
  return std::system(command.c_str());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

int main() {
  // -- 1: closed forms vs the exact stationary oracle ----------------------
  run_criterion(1, "closed forms match CTMC stationary oracle", 1.0,
                [](Outcome& out) {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      PersonParams p{log_uniform(rng, 0.01, 100.0),
                     log_uniform(rng, 0.01, 100.0)};
      double s = log_uniform(rng, 0.01, 100.0);
      double c = log_uniform(rng, 0.01, 100.0);
      auto rates = error_rates(p, s, c);
      auto dist = ctmc_stationary(p, s, c);
      worst = std::max(worst, std::abs(rates.undetected - dist.undetected()));
      worst = std::max(worst, std::abs(rates.stale - dist.stale()));
    }
    if (!(worst <= 1e-10))
      out.fail("max deviation " + format_double(worst));
  });

  // -- 2: Monte Carlo agreement --------------------------------------------
  run_criterion(2, "simulation within 3 batch-means stderr of closed forms",
                30.0, [](Outcome& out) {
    std::mt19937_64 rng(404);
    int agreeing = 0;
    const int tuples = 20;
    for (int t = 0; t < tuples; ++t) {
      PersonParams p{log_uniform(rng, 0.1, 3.0), log_uniform(rng, 0.1, 3.0)};
      double s = log_uniform(rng, 0.1, 3.0);
      double c = log_uniform(rng, 0.1, 3.0);
      auto exact = error_rates(p, s, c);
      auto sim = simulate_person(p, s, c, 0.5, 1e5, 7000 + t);
      bool ok = std::abs(sim.undetected_hat - exact.undetected) <=
                    3.0 * sim.stderr_undetected &&
                std::abs(sim.stale_hat - exact.stale) <=
                    3.0 * sim.stderr_stale;
      agreeing += ok;
    }
    if (agreeing < tuples - 1)
      out.fail("only " + std::to_string(agreeing) + "/20 tuples agree");
  });

  // -- 3: analytic gradient vs central differences --------------------------
  run_criterion(3, "analytic partials match central differences", 1.0,
                [](Outcome& out) {
    std::mt19937_64 rng(303);
    for (int point = 0; point < 100; ++point) {
      PersonParams p{log_uniform(rng, 0.1, 10.0),
                     log_uniform(rng, 0.1, 10.0)};
      double s = log_uniform(rng, 0.1, 10.0);
      double c = log_uniform(rng, 0.1, 10.0);
      std::uniform_real_distribution<double> theta_draw(0.05, 0.95);
      double theta = theta_draw(rng);
      double hs = 1e-5 * s;
      double fd_s = (weighted_error(p, s + hs, c, theta) -
                     weighted_error(p, s - hs, c, theta)) /
                    (2.0 * hs);
      double gs = weighted_error_ds(p, s, c, theta);
      double rel_s = std::abs(fd_s - gs) /
                     std::max({std::abs(gs), std::abs(fd_s), 1e-12});
      double hc = 1e-5 * c;
      double fd_c = (weighted_error(p, s, c + hc, theta) -
                     weighted_error(p, s, c - hc, theta)) /
                    (2.0 * hc);
      double gc = weighted_error_dc(p, s, c, theta);
      double rel_c = std::abs(fd_c - gc) /
                     std::max({std::abs(gc), std::abs(fd_c), 1e-12});
      if (!(rel_s <= 1e-6) || !(rel_c <= 1e-6)) {
        out.fail("point " + std::to_string(point) + " rel errors " +
                 format_double(rel_s) + ", " + format_double(rel_c));
        return;
      }
    }
  });

  // shared runs reused by criteria 4 and 9
  std::vector<std::pair<PopulationSpec, SolverReport>> certified_runs;

  // -- 4: structure of the ten-person scenario ------------------------------
  run_criterion(4, "ten-person scenario allocation structure", 10.0,
                [&](Outcome& out) {
    auto config = ScenarioConfig::defaults();
    auto result = run_rate_allocation(config);
    const auto& policy = result.report.policy;
    for (int i = 0; i < 3; ++i) {
      if (policy.s[i] != 0.0 || policy.c[i] != 0.0)
        out.fail("person " + std::to_string(i + 1) + " is tested");
      else if (policy.fixed_label[i] != FixedLabel::AlwaysInfected)
        out.fail("person " + std::to_string(i + 1) +
                 " not labeled always-infected");
    }
    if (!(result.delta_opt <= result.delta_uniform))
      out.fail("optimized error worse than uniform testing");
    double total = 0.0;
    for (std::size_t i = 0; i < policy.size(); ++i)
      total += policy.s[i] + policy.c[i];
    if (std::abs(total - 16.0) > 1e-9)
      out.fail("allocated " + format_double(total) + " of budget 16");
    certified_runs.emplace_back(config.population(), result.report);
  });

  // -- 5: error decreases with the budget -----------------------------------
  run_criterion(5, "budget sweep is nonincreasing", 120.0, [&](Outcome& out) {
    auto config = ScenarioConfig::defaults();
    auto sweep = run_budget_sweep(config);
    if (sweep.rows.size() != 16) out.fail("expected 16 budget points");
    for (std::size_t i = 1; i < sweep.rows.size(); ++i)
      if (!(sweep.rows[i].delta <= sweep.rows[i - 1].delta + 1e-6)) {
        out.fail("delta increased at C = " +
                 format_double(sweep.rows[i].budget));
        break;
      }
    PopulationSpec spec = config.population();
    for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
      spec.total_rate = sweep.rows[i].budget;
      certified_runs.emplace_back(spec, sweep.reports[i]);
    }
  });

  // -- 6: population sweep ---------------------------------------------------
  run_criterion(6, "population sweep: uniform constant, geometric nonincreasing",
                300.0, [&](Outcome& out) {
    auto config = ScenarioConfig::defaults();
    auto sweep = run_population_sweep(config);
    if (sweep.rows.size() != 29) out.fail("expected n = 2..30");
    double lo = sweep.rows[0].delta_uniform_rates;
    double hi = lo;
    for (const auto& row : sweep.rows) {
      lo = std::min(lo, row.delta_uniform_rates);
      hi = std::max(hi, row.delta_uniform_rates);
    }
    if (!(hi - lo <= 1e-4))
      out.fail("uniform-rates column varies by " + format_double(hi - lo));
    for (std::size_t i = 1; i < sweep.rows.size(); ++i)
      if (!(sweep.rows[i].delta_geometric_rates <=
            sweep.rows[i - 1].delta_geometric_rates + 1e-4)) {
        out.fail("geometric-rates column increased at n = " +
                 std::to_string(sweep.rows[i].n));
        break;
      }
  });

  // -- 7: importance-factor sweep --------------------------------------------
  run_criterion(7, "importance sweep monotonicities", 120.0,
                [&](Outcome& out) {
    auto config = ScenarioConfig::defaults();
    auto sweep = run_importance_sweep(config);
    if (sweep.rows.size() != 11) out.fail("expected theta = 0.2..0.7");
    for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
      const auto& prev = sweep.rows[i - 1];
      const auto& row = sweep.rows[i];
      if (!(row.delta_bar1 <= prev.delta_bar1 + 1e-4))
        out.fail("undetected mean increased at theta = " +
                 format_double(row.theta));
      if (!(row.delta_bar2 >= prev.delta_bar2 - 1e-4))
        out.fail("stale mean decreased at theta = " +
                 format_double(row.theta));
      if (!(row.sum_s >= prev.sum_s - 1e-4))
        out.fail("sum of s decreased at theta = " + format_double(row.theta));
    }
    PopulationSpec spec = config.population();
    for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
      spec.theta = sweep.rows[i].theta;
      certified_runs.emplace_back(spec, sweep.reports[i]);
    }
  });

  // -- 8: single-person closed-form optimum ----------------------------------
  run_criterion(8, "single person splits the budget evenly", 10.0,
                [&](Outcome& out) {
    PopulationSpec spec;
    spec.people = {{1.0, 1.0}};
    spec.theta = 0.5;
    spec.total_rate = 2.0;
    auto report = solve(spec, 30, 1);
    if (std::abs(report.policy.s[0] - 1.0) > 1e-6 ||
        std::abs(report.policy.c[0] - 1.0) > 1e-6)
      out.fail("rates (" + format_double(report.policy.s[0]) + ", " +
               format_double(report.policy.c[0]) + ")");
    if (std::abs(report.objective - 1.0 / 6.0) > 1e-9)
      out.fail("objective " + format_double(report.objective));
    certified_runs.emplace_back(spec, report);
  });

  // -- 9: KKT certification over every collected solve -----------------------
  run_criterion(9, "KKT certificates for converged solves", 0.0,
                [&](Outcome& out) {
    if (certified_runs.empty()) {
      out.fail("no runs collected");
      return;
    }
    for (std::size_t i = 0; i < certified_runs.size(); ++i) {
      auto problems =
          kkt_certificate(certified_runs[i].first, certified_runs[i].second);
      for (const auto& problem : problems)
        out.fail("run " + std::to_string(i) + ": " + problem);
      if (!out.pass) return;
    }
  });

  // -- 10: byte-identical CLI reports ----------------------------------------
  run_criterion(10, "CLI outputs are byte-identical across reruns", 0.0,
                [](Outcome& out) {
    fs::path dir = fs::temp_directory_path() / "epitrack_acceptance";
    fs::create_directories(dir);

    fs::path eval_config = dir / "eval.json";
    write_file(eval_config, R"({
      "theta": 0.5, "total_rate": 2.0,
      "people": [{"lambda": 1.0, "mu": 1.0}],
      "policy": {"s": [1.0], "c": [1.0]},
      "solver": {"restarts": 5, "seed": 7}
    })");
    fs::path sweep_c = dir / "sweep_c.json";
    write_file(sweep_c, R"({
      "theta": 0.5, "total_rate": 16.0,
      "profile": {"type": "geometric", "n": 6,
                  "lambda_total": 6.0, "mu_total": 4.0,
                  "lambda_ratio": 0.9, "mu_ratio": 1.1},
      "sweep": {"param": "C", "values": [15.0, 16.0, 17.0]},
      "solver": {"restarts": 5, "seed": 7}
    })");
    fs::path sweep_n = dir / "sweep_n.json";
    write_file(sweep_n, R"({
      "theta": 0.5, "total_rate": 16.0,
      "profile": {"type": "geometric", "n": 6,
                  "lambda_total": 6.0, "mu_total": 4.0,
                  "lambda_ratio": 0.9, "mu_ratio": 1.1},
      "sweep": {"param": "n", "values": [2, 3, 4]},
      "solver": {"restarts": 5, "seed": 7}
    })");
    fs::path sweep_theta = dir / "sweep_theta.json";
    write_file(sweep_theta, R"({
      "theta": 0.5, "total_rate": 16.0,
      "profile": {"type": "geometric", "n": 6,
                  "lambda_total": 6.0, "mu_total": 4.0,
                  "lambda_ratio": 0.9, "mu_ratio": 1.1},
      "sweep": {"param": "theta", "values": [0.3, 0.5]},
      "solver": {"restarts": 5, "seed": 7}
    })");

    struct Case {
      std::string name;
      std::string args;
    };
    std::vector<Case> cases = {
        {"eval", "eval --config " + shell_quote(eval_config.string())},
        {"solve", "solve --config " + shell_quote(eval_config.string()) +
                      " --seed 7 --format json"},
        {"simulate", "simulate --config " + shell_quote(eval_config.string()) +
                         " --seed 7 --horizon 20000"},
        {"fig4", "fig4 --restarts 5 --seed 7"},
        {"fig5", "fig5 --config " + shell_quote(sweep_c.string())},
        {"fig6", "fig6 --config " + shell_quote(sweep_n.string())},
        {"fig7", "fig7 --config " + shell_quote(sweep_theta.string()) +
                     " --format json"},
    };
    for (const auto& c : cases) {
      fs::path out_a = dir / (c.name + "_a.out");
      fs::path out_b = dir / (c.name + "_b.out");
      if (run_cli_command(c.args, out_a) != 0 ||
          run_cli_command(c.args, out_b) != 0) {
        out.fail(c.name + ": nonzero exit");
        continue;
      }
      std::string a = read_file(out_a);
      if (a.empty())
        out.fail(c.name + ": empty output");
      else if (a != read_file(out_b))
        out.fail(c.name + ": outputs differ between runs");
    }
  });

  std::printf("%d/10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
