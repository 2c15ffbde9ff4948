#pragma once

// Suffix-sum tables T_j(s) = P(K_j + ... + K_{l-1} = s) for independent
// nonnegative integer sites, restricted to s <= n. They give the law of the
// sites conditioned on their total through the remaining-sum Markov chain
//   q_j(k | s) = p_j(k) T_{j+1}(s - k) / T_j(s).

#include <cstddef>
#include <span>
#include <vector>

#include "gibbslz/disttab.hpp"

namespace gibbslz {

class SuffixSumDP {
 public:
  std::size_t length() const { return marginals_.size(); }
  std::size_t target() const { return n_; }
  const std::vector<DistTable>& marginals() const { return marginals_; }

  // log T_j(s), j in [0, length], s in [0, target].
  double log_suffix(std::size_t j, std::size_t s) const {
    return log_t_[j * (n_ + 1) + s];
  }
  // log q_j(k | s); -inf when k > s or outside the support of site j.
  double log_step(std::size_t j, std::size_t s, std::size_t k) const;

  // log P(S = m) for m <= target.
  double log_prob_total(std::size_t m) const { return log_suffix(0, m); }

 private:
  friend SuffixSumDP build_suffix_dp(std::span<const DistTable> marginals, std::size_t n);

  std::vector<DistTable> marginals_;
  std::size_t n_ = 0;
  std::vector<double> log_t_;
};

// O(l * n * K_max). Throws ImpossibleCondition when P(S = n) = 0.
SuffixSumDP build_suffix_dp(std::span<const DistTable> marginals, std::size_t n);

// Law of K_i given S = m (m <= dp.target(), default the DP target).
DistTable conditional_marginal(const SuffixSumDP& dp, std::size_t i);
DistTable conditional_marginal(const SuffixSumDP& dp, std::size_t i, std::size_t m);

// H(K_0, ..., K_{l-1} | S = m) in bits.
double conditional_entropy_exact(const SuffixSumDP& dp);
double conditional_entropy_exact(const SuffixSumDP& dp, std::size_t m);

// H(K | S = n) - sum_j H(K_j), in bits.
double entropy_gap(std::span<const DistTable> marginals, std::size_t n);

}  // namespace gibbslz
