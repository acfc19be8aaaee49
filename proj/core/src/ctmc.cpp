#include "epitrack/ctmc.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace epitrack {

namespace {

// Joint-state indices, matching CtmcDistribution.
constexpr int kHealthyAgree = 0;    // (healthy, marked healthy)
constexpr int kUndetected = 1;      // (infected, marked healthy)
constexpr int kInfectedAgree = 2;   // (infected, marked infected)
constexpr int kStale = 3;           // (healthy, marked infected)

// Solves the 4x4 system A x = b by Gaussian elimination with partial
// pivoting.
std::array<double, 4> solve4(std::array<std::array<double, 4>, 4> a,
                             std::array<double, 4> b) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 4; ++row)
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    if (a[pivot][col] == 0.0)
      throw std::runtime_error("ctmc_stationary: singular balance system");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int row = col + 1; row < 4; ++row) {
      double factor = a[row][col] / a[col][col];
      if (factor == 0.0) continue;
      for (int k = col; k < 4; ++k) a[row][k] -= factor * a[col][k];
      b[row] -= factor * b[col];
    }
  }
  std::array<double, 4> x{};
  for (int row = 3; row >= 0; --row) {
    double acc = b[row];
    for (int k = row + 1; k < 4; ++k) acc -= a[row][k] * x[k];
    x[row] = acc / a[row][row];
  }
  return x;
}

}  // namespace

CtmcDistribution ctmc_stationary(const PersonParams& p, double s, double c,
                                 std::optional<FixedLabel> label) {
  if (!(p.lambda > 0.0) || !(p.mu > 0.0) || !std::isfinite(p.lambda) ||
      !std::isfinite(p.mu))
    throw std::domain_error("ctmc_stationary: lambda and mu must be positive");
  if (!(s >= 0.0) || !(c >= 0.0))
    throw std::domain_error("ctmc_stationary: test rates must be >= 0");

  CtmcDistribution dist;
  if (s == 0.0 && c == 0.0) {
    if (!label)
      throw std::invalid_argument(
          "ctmc_stationary: s = c = 0 requires a fixed label");
    // Estimate pinned; only the two-state infection process remains.
    double healthy = p.mu / (p.lambda + p.mu);
    double infected = p.lambda / (p.lambda + p.mu);
    if (*label == FixedLabel::AlwaysHealthy) {
      dist.pi[kHealthyAgree] = healthy;
      dist.pi[kUndetected] = infected;
    } else {
      dist.pi[kInfectedAgree] = infected;
      dist.pi[kStale] = healthy;
    }
    return dist;
  }

  // Generator of the joint chain; tests in agreeing states are self-loops
  // and do not appear.
  std::array<std::array<double, 4>, 4> q{};  // q[from][to]
  q[kHealthyAgree][kUndetected] = p.lambda;
  q[kUndetected][kHealthyAgree] = p.mu;
  q[kUndetected][kInfectedAgree] = s;
  q[kInfectedAgree][kStale] = p.mu;
  q[kStale][kInfectedAgree] = p.lambda;
  q[kStale][kHealthyAgree] = c;

  // Balance equations Q^T pi = 0 have rank 3 (the four rows sum to zero),
  // so replacing any one with the normalization row gives a well-posed
  // system.
  std::array<std::array<double, 4>, 4> a{};
  for (int to = 0; to < 4; ++to) {
    for (int from = 0; from < 4; ++from) {
      if (from == to) continue;
      a[to][from] += q[from][to];   // inflow
      a[to][to] -= q[to][from];     // outflow
    }
  }
  std::array<double, 4> b{};
  for (int col = 0; col < 4; ++col) a[0][col] = 1.0;
  b[0] = 1.0;

  dist.pi = solve4(a, b);
  return dist;
}

}  // namespace epitrack
