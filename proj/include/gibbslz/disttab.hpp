#pragma once

// Finite pmf tables on {0, ..., K_max} stored as natural-log probabilities.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace gibbslz {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Truncation tail for geometric tables. Well below the 1e-12 normalisation
// tolerance so that second moments are unaffected at the 1e-9 level.
inline constexpr double kDefaultTailTol = 1e-15;

double log_sum_exp(double a, double b);
double log_sum_exp(std::span<const double> xs);

class DistTable {
 public:
  DistTable() = default;

  // Validates nonnegativity and normalisation (sum + tail_mass within 1e-12 of 1).
  static DistTable from_probs(std::span<const double> probs, double tail_mass = 0.0);
  static DistTable from_log_probs(std::vector<double> log_probs, double tail_mass = 0.0);
  // No normalisation check; used for intermediate results.
  static DistTable unchecked(std::vector<double> log_probs, double tail_mass = 0.0);

  static DistTable delta(std::size_t k);
  static DistTable bernoulli(double p);
  // P(k) = (1 - q) q^k truncated at the first K with q^{K+1} < tail_tol.
  static DistTable geometric(double q, double tail_tol = kDefaultTailTol);
  static DistTable geometric_with_mean(double mean, double tail_tol = kDefaultTailTol);
  static DistTable binomial(int n, double p);

  std::size_t size() const { return log_probs_.size(); }
  std::size_t support_max() const { return log_probs_.empty() ? 0 : log_probs_.size() - 1; }
  double log_prob(std::size_t k) const {
    return k < log_probs_.size() ? log_probs_[k] : kNegInf;
  }
  double prob(std::size_t k) const;
  const std::vector<double>& log_probs() const { return log_probs_; }
  std::vector<double> probs() const;
  // Mass removed by truncation (zero for exact tables).
  double tail_mass() const { return tail_mass_; }
  double total_mass() const;

  // Same law restricted to {0..k_max}, renormalised; truncated mass moves to tail_mass.
  DistTable truncated(std::size_t k_max) const;

 private:
  std::vector<double> log_probs_;
  double tail_mass_ = 0.0;
};

struct DistSummary {
  double mean = 0;
  double variance = 0;
  double abs_central_moment3 = 0;
  double entropy_bits = 0;
  std::size_t mode = 0;
};

DistTable convolve(const DistTable& a, const DistTable& b);
DistSummary summary(const DistTable& p);

// p(s)^2 >= p(s-1) p(s+1) at every interior s (relative slack 1e-14) and no
// internal zeros.
bool is_log_concave(const DistTable& p);

}  // namespace gibbslz
