#include "gibbslz/suffix_dp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gibbslz/errors.hpp"

namespace gibbslz {

SuffixSumDP build_suffix_dp(std::span<const DistTable> marginals, std::size_t n) {
  SuffixSumDP dp;
  dp.marginals_.assign(marginals.begin(), marginals.end());
  dp.n_ = n;
  const std::size_t len = marginals.size();
  std::size_t reach = 0;
  for (const auto& m : marginals) reach += m.support_max();
  if (reach < n) throw ImpossibleCondition("target sum exceeds the joint support");

  const std::size_t width = n + 1;
  dp.log_t_.assign((len + 1) * width, kNegInf);
  dp.log_t_[len * width] = 0.0;
  for (std::size_t j = len; j-- > 0;) {
    const auto& lp = marginals[j].log_probs();
    const double* next = &dp.log_t_[(j + 1) * width];
    double* row = &dp.log_t_[j * width];
    for (std::size_t s = 0; s <= n; ++s) {
      const std::size_t kmax = std::min(s, lp.size() - 1);
      double m = kNegInf;
      for (std::size_t k = 0; k <= kmax; ++k) m = std::max(m, lp[k] + next[s - k]);
      if (m == kNegInf) continue;
      double acc = 0.0;
      for (std::size_t k = 0; k <= kmax; ++k) acc += std::exp(lp[k] + next[s - k] - m);
      row[s] = m + std::log(acc);
    }
  }
  if (dp.log_t_[n] == kNegInf) throw ImpossibleCondition("P(S = n) = 0");
  return dp;
}

double SuffixSumDP::log_step(std::size_t j, std::size_t s, std::size_t k) const {
  if (k > s) return kNegInf;
  const double lp = marginals_[j].log_prob(k);
  if (lp == kNegInf) return kNegInf;
  return lp + log_suffix(j + 1, s - k) - log_suffix(j, s);
}

namespace {

// Forward occupancy of the remaining sum, advanced from site 0 to site `upto`.
// Calls visit(j, s, pi) for each reachable state with pi > 0.
template <class Visit>
std::vector<double> walk_forward(const SuffixSumDP& dp, std::size_t m, std::size_t upto,
                                 Visit&& visit) {
  if (m > dp.target()) throw DomainError("conditioning value beyond DP target");
  if (dp.log_prob_total(m) == kNegInf) throw ImpossibleCondition("P(S = m) = 0");
  std::vector<double> pi(m + 1, 0.0);
  std::vector<double> next(m + 1, 0.0);
  pi[m] = 1.0;
  for (std::size_t j = 0; j < upto; ++j) {
    std::fill(next.begin(), next.end(), 0.0);
    const std::size_t kmax = dp.marginals()[j].support_max();
    for (std::size_t s = 0; s <= m; ++s) {
      if (pi[s] == 0.0) continue;
      visit(j, s, pi[s]);
      for (std::size_t k = 0; k <= std::min(s, kmax); ++k) {
        const double lq = dp.log_step(j, s, k);
        if (lq != kNegInf) next[s - k] += pi[s] * std::exp(lq);
      }
    }
    pi.swap(next);
  }
  return pi;
}

}  // namespace

DistTable conditional_marginal(const SuffixSumDP& dp, std::size_t i) {
  return conditional_marginal(dp, i, dp.target());
}

DistTable conditional_marginal(const SuffixSumDP& dp, std::size_t i, std::size_t m) {
  if (i >= dp.length()) throw DomainError("site index out of range");
  const std::vector<double> pi = walk_forward(dp, m, i, [](auto, auto, auto) {});
  const std::size_t kmax = std::min(m, dp.marginals()[i].support_max());
  std::vector<double> out(kmax + 1, 0.0);
  for (std::size_t s = 0; s <= m; ++s) {
    if (pi[s] == 0.0) continue;
    for (std::size_t k = 0; k <= std::min(s, kmax); ++k) {
      const double lq = dp.log_step(i, s, k);
      if (lq != kNegInf) out[k] += pi[s] * std::exp(lq);
    }
  }
  double total = 0.0;
  for (double v : out) total += v;
  std::vector<double> lp(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    lp[k] = out[k] > 0 ? std::log(out[k] / total) : kNegInf;
  }
  return DistTable::unchecked(std::move(lp));
}

double conditional_entropy_exact(const SuffixSumDP& dp) {
  return conditional_entropy_exact(dp, dp.target());
}

double conditional_entropy_exact(const SuffixSumDP& dp, std::size_t m) {
  double h = 0.0;
  walk_forward(dp, m, dp.length(), [&](std::size_t j, std::size_t s, double pi) {
    const std::size_t kmax = std::min(s, dp.marginals()[j].support_max());
    double hs = 0.0;
    for (std::size_t k = 0; k <= kmax; ++k) {
      const double lq = dp.log_step(j, s, k);
      if (lq != kNegInf) hs -= std::exp(lq) * lq;
    }
    h += pi * hs;
  });
  return h / std::numbers::ln2;
}

double entropy_gap(std::span<const DistTable> marginals, std::size_t n) {
  const SuffixSumDP dp = build_suffix_dp(marginals, n);
  double unconditional = 0.0;
  for (const auto& m : marginals) unconditional += summary(m).entropy_bits;
  return conditional_entropy_exact(dp) - unconditional;
}

}  // namespace gibbslz
