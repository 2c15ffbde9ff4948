#include "gibbslz/disttab.hpp"

#include <algorithm>
#include <cmath>

#include "gibbslz/errors.hpp"

namespace gibbslz {

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

namespace {

void check_normalised(const DistTable& t) {
  const double total = t.total_mass() + t.tail_mass();
  if (!(std::abs(total - 1.0) <= 1e-12)) {
    throw DomainError("pmf does not sum to one");
  }
}

}  // namespace

DistTable DistTable::from_probs(std::span<const double> probs, double tail_mass) {
  std::vector<double> lp(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (!(probs[k] >= 0) || !std::isfinite(probs[k])) {
      throw DomainError("pmf entries must be finite and nonnegative");
    }
    lp[k] = probs[k] > 0 ? std::log(probs[k]) : kNegInf;
  }
  return from_log_probs(std::move(lp), tail_mass);
}

DistTable DistTable::from_log_probs(std::vector<double> log_probs, double tail_mass) {
  if (log_probs.empty()) throw DomainError("empty pmf");
  for (double v : log_probs) {
    if (std::isnan(v) || v > 1e-12) throw DomainError("invalid log-probability");
  }
  DistTable t = unchecked(std::move(log_probs), tail_mass);
  check_normalised(t);
  return t;
}

DistTable DistTable::unchecked(std::vector<double> log_probs, double tail_mass) {
  DistTable t;
  t.log_probs_ = std::move(log_probs);
  t.tail_mass_ = tail_mass;
  return t;
}

DistTable DistTable::delta(std::size_t k) {
  std::vector<double> lp(k + 1, kNegInf);
  lp[k] = 0.0;
  return unchecked(std::move(lp));
}

DistTable DistTable::bernoulli(double p) {
  if (!(p >= 0 && p <= 1)) throw DomainError("Bernoulli parameter outside [0,1]");
  return unchecked({p < 1 ? std::log1p(-p) : kNegInf, p > 0 ? std::log(p) : kNegInf});
}

DistTable DistTable::geometric(double q, double tail_tol) {
  if (!(q >= 0 && q < 1)) throw DomainError("geometric ratio outside [0,1)");
  if (q == 0) return delta(0);
  const double log_q = std::log(q);
  // tail mass beyond K is q^{K+1}
  const auto k_max = static_cast<std::size_t>(
      std::max(0.0, std::floor(std::log(tail_tol) / log_q)));
  const double log_norm = std::log1p(-q);
  std::vector<double> lp(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) lp[k] = log_norm + static_cast<double>(k) * log_q;
  return unchecked(std::move(lp), std::exp(static_cast<double>(k_max + 1) * log_q));
}

DistTable DistTable::geometric_with_mean(double mean, double tail_tol) {
  if (!(mean >= 0)) throw DomainError("geometric mean must be nonnegative");
  return geometric(mean / (1.0 + mean), tail_tol);
}

DistTable DistTable::binomial(int n, double p) {
  if (n < 0) throw DomainError("binomial n must be nonnegative");
  if (!(p > 0 && p < 1)) {
    if (p == 0) return delta(0);
    if (p == 1) return delta(static_cast<std::size_t>(n));
    throw DomainError("binomial p outside [0,1]");
  }
  std::vector<double> lp(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    lp[k] = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
            k * std::log(p) + (n - k) * std::log1p(-p);
  }
  return unchecked(std::move(lp));
}

double DistTable::prob(std::size_t k) const {
  return k < log_probs_.size() ? std::exp(log_probs_[k]) : 0.0;
}

std::vector<double> DistTable::probs() const {
  std::vector<double> out(log_probs_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::exp(log_probs_[k]);
  return out;
}

double DistTable::total_mass() const {
  double s = 0.0;
  for (double v : log_probs_) s += std::exp(v);
  return s;
}

DistTable DistTable::truncated(std::size_t k_max) const {
  if (k_max + 1 >= log_probs_.size()) return *this;
  std::vector<double> lp(log_probs_.begin(), log_probs_.begin() + k_max + 1);
  const double kept = log_sum_exp(lp);
  if (kept == kNegInf) throw ImpossibleCondition("truncation removes all mass");
  for (double& v : lp) v -= kept;
  return unchecked(std::move(lp), tail_mass_ + (1.0 - std::exp(kept)));
}

DistTable convolve(const DistTable& a, const DistTable& b) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  if (na == 0 || nb == 0) return {};
  std::vector<double> out(na + nb - 1, kNegInf);
  std::vector<double> terms;
  for (std::size_t s = 0; s < out.size(); ++s) {
    terms.clear();
    const std::size_t lo = s >= nb - 1 ? s - (nb - 1) : 0;
    const std::size_t hi = std::min(s, na - 1);
    for (std::size_t i = lo; i <= hi; ++i) {
      const double v = a.log_probs()[i] + b.log_probs()[s - i];
      if (v != kNegInf) terms.push_back(v);
    }
    out[s] = log_sum_exp(terms);
  }
  const double tail = a.tail_mass() + b.tail_mass() - a.tail_mass() * b.tail_mass();
  return DistTable::unchecked(std::move(out), tail);
}

DistSummary summary(const DistTable& p) {
  DistSummary out;
  const std::vector<double> pr = p.probs();
  double best = -1.0;
  for (std::size_t k = 0; k < pr.size(); ++k) {
    out.mean += static_cast<double>(k) * pr[k];
    if (pr[k] > best) {
      best = pr[k];
      out.mode = k;
    }
    if (pr[k] > 0) out.entropy_bits -= pr[k] * p.log_probs()[k];
  }
  out.entropy_bits /= std::log(2.0);
  for (std::size_t k = 0; k < pr.size(); ++k) {
    const double d = static_cast<double>(k) - out.mean;
    out.variance += d * d * pr[k];
    out.abs_central_moment3 += std::abs(d) * d * d * pr[k];
  }
  return out;
}

bool is_log_concave(const DistTable& p) {
  const auto& lp = p.log_probs();
  std::size_t first = 0;
  while (first < lp.size() && lp[first] == kNegInf) ++first;
  std::size_t last = lp.size();
  while (last > first && lp[last - 1] == kNegInf) --last;
  for (std::size_t s = first; s < last; ++s) {
    if (lp[s] == kNegInf) return false;  // internal zero
  }
  const double slack = std::log1p(-1e-14);
  for (std::size_t s = 1; s + 1 < lp.size(); ++s) {
    if (lp[s - 1] == kNegInf || lp[s + 1] == kNegInf) continue;
    if (2.0 * lp[s] < lp[s - 1] + lp[s + 1] + slack) return false;
  }
  return true;
}

}  // namespace gibbslz
