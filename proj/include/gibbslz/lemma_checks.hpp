#pragma once

// Exact finite checks of the distributional facts behind the LZ limit:
// local CLT error, Newton-type ratio bound for Poisson-binomial sums,
// mode/mean gap for unimodal laws, conditional monotonicity (Efron) and
// negative association of fixed-sum conditioned LC variables.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gibbslz/disttab.hpp"

namespace gibbslz {

struct LocalCltError {
  double sup_error = 0;  // sup_q |sigma P(S=q) - phi((q - a)/sigma)|
  double lyapunov = 0;   // L_n = sum E|X - EX|^3 / sigma^3
  double sigma = 0;
  double mean = 0;
};

LocalCltError local_clt_error(std::span<const DistTable> marginals);

// Exact pmf of a sum of independent Bernoulli(p_i).
std::vector<double> poisson_binomial_pmf(std::span<const double> ps);

struct ScoreRatio {
  bool holds = true;
  bool vacuous = false;  // n = 0
  double ratio = 0;      // P(S = n-1) / P(S = n)
  double bound = 0;      // n / ((M - n + 1) k*)
};

// P(S=n-1)/P(S=n) >= n / ((M-n+1) k*), k* = mean of p/(1-p).
ScoreRatio score_ratio_check(std::span<const double> ps, std::size_t n);

struct ModeMean {
  bool holds = false;
  double gap = 0;    // |mode - mean|
  double bound = 0;  // sqrt(3 Var)
};

// |mode - mean| <= sqrt(3 Var). Requires a log-concave (hence unimodal) table.
ModeMean mode_mean_check(const DistTable& p);

using Config = std::vector<int>;
using ConfigFunction = std::function<double(std::span<const int>)>;

// Visits every configuration of the product of the tables with its log-probability.
void enumerate_configurations(std::span<const DistTable> marginals,
                              const std::function<void(std::span<const int>, double)>& visit);

struct EfronResult {
  bool monotone = true;
  std::vector<std::size_t> sums;         // attainable totals s
  std::vector<double> conditional_mean;  // E(phi | S = s)
};

// E(phi(V) | S = s) nondecreasing in s. At most 5 LC marginals.
EfronResult efron_monotonicity_check(std::span<const DistTable> marginals,
                                     const ConfigFunction& phi);

// Cov(f(K_A), g(K_B) | S = n) by enumeration; f and g see the full configuration
// and must only read their own index sets.
double conditional_covariance(std::span<const DistTable> marginals, std::size_t n,
                              const ConfigFunction& f, const ConfigFunction& g);

// Cov(F(X), G(X)) for X ~ p.
double covariance(const DistTable& p, std::span<const double> f, std::span<const double> g);

}  // namespace gibbslz
