#include "gibbslz/lemma_checks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "gibbslz/errors.hpp"

namespace gibbslz {

LocalCltError local_clt_error(std::span<const DistTable> marginals) {
  LocalCltError out;
  double var = 0.0;
  double third = 0.0;
  for (const auto& m : marginals) {
    const DistSummary s = summary(m);
    out.mean += s.mean;
    var += s.variance;
    third += s.abs_central_moment3;
  }
  if (!(var > 0)) throw PreconditionError("local CLT: degenerate sum (sigma = 0)");
  out.sigma = std::sqrt(var);
  out.lyapunov = third / (var * out.sigma);

  // Sequential linear-domain convolution; the running pmf stays normalised.
  std::vector<double> pmf{1.0};
  std::vector<double> next;
  for (const auto& m : marginals) {
    const std::vector<double> p = m.probs();
    next.assign(pmf.size() + p.size() - 1, 0.0);
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      if (pmf[i] == 0.0) continue;
      for (std::size_t k = 0; k < p.size(); ++k) next[i + k] += pmf[i] * p[k];
    }
    pmf.swap(next);
    // far upper tail contributes nothing at double precision
    const double top = *std::max_element(pmf.begin(), pmf.end());
    while (pmf.size() > 1 && pmf.back() < 1e-300 * top) pmf.pop_back();
  }
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  // one lattice point past each end covers the region where P(S=q) = 0
  for (long q = -1; q <= static_cast<long>(pmf.size()); ++q) {
    const double pq = (q >= 0 && q < static_cast<long>(pmf.size())) ? pmf[q] : 0.0;
    const double z = (static_cast<double>(q) - out.mean) / out.sigma;
    const double err = std::abs(out.sigma * pq - inv_sqrt_2pi * std::exp(-0.5 * z * z));
    out.sup_error = std::max(out.sup_error, err);
  }
  return out;
}

std::vector<double> poisson_binomial_pmf(std::span<const double> ps) {
  std::vector<double> pmf(ps.size() + 1, 0.0);
  pmf[0] = 1.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double p = ps[i];
    for (std::size_t s = i + 1; s > 0; --s) pmf[s] = pmf[s] * (1 - p) + pmf[s - 1] * p;
    pmf[0] *= 1 - p;
  }
  return pmf;
}

ScoreRatio score_ratio_check(std::span<const double> ps, std::size_t n) {
  double kstar = 0.0;
  for (double p : ps) {
    if (!(p >= 0 && p < 1)) throw DomainError("score ratio: p must lie in [0,1)");
    kstar += p / (1 - p);
  }
  const auto M = ps.size();
  kstar /= static_cast<double>(M);
  ScoreRatio out;
  if (n == 0) {
    out.vacuous = true;
    return out;
  }
  if (n > M) throw ImpossibleCondition("score ratio: n exceeds the number of variables");
  const std::vector<double> pmf = poisson_binomial_pmf(ps);
  if (!(pmf[n] > 0)) throw ImpossibleCondition("score ratio: P(S = n) = 0");
  out.ratio = pmf[n - 1] / pmf[n];
  out.bound = static_cast<double>(n) / (static_cast<double>(M - n + 1) * kstar);
  out.holds = out.ratio >= out.bound * (1 - 1e-12);
  return out;
}

ModeMean mode_mean_check(const DistTable& p) {
  if (!is_log_concave(p)) {
    throw PreconditionError("mode/mean bound needs a unimodal (log-concave) law");
  }
  const DistSummary s = summary(p);
  ModeMean out;
  out.gap = std::abs(static_cast<double>(s.mode) - s.mean);
  out.bound = std::sqrt(3.0 * s.variance);
  out.holds = out.gap <= out.bound + 1e-12;
  return out;
}

void enumerate_configurations(std::span<const DistTable> marginals,
                              const std::function<void(std::span<const int>, double)>& visit) {
  const std::size_t len = marginals.size();
  std::vector<int> cfg(len, 0);
  if (len == 0) {
    visit(cfg, 0.0);
    return;
  }
  for (;;) {
    double lp = 0.0;
    for (std::size_t i = 0; i < len; ++i) lp += marginals[i].log_prob(cfg[i]);
    visit(cfg, lp);
    std::size_t i = 0;
    while (i < len && ++cfg[i] == static_cast<int>(marginals[i].size())) cfg[i++] = 0;
    if (i == len) break;
  }
}

EfronResult efron_monotonicity_check(std::span<const DistTable> marginals,
                                     const ConfigFunction& phi) {
  if (marginals.size() > 5) throw PreconditionError("Efron check is exhaustive: at most 5 sites");
  for (const auto& m : marginals) {
    if (!is_log_concave(m)) throw PreconditionError("Efron check needs LC marginals");
  }
  std::map<std::size_t, std::pair<double, double>> acc;  // s -> (mass, mass * phi)
  enumerate_configurations(marginals, [&](std::span<const int> cfg, double lp) {
    if (lp == kNegInf) return;
    std::size_t s = 0;
    for (int k : cfg) s += static_cast<std::size_t>(k);
    const double w = std::exp(lp);
    auto& slot = acc[s];
    slot.first += w;
    slot.second += w * phi(cfg);
  });
  EfronResult out;
  for (const auto& [s, v] : acc) {
    out.sums.push_back(s);
    out.conditional_mean.push_back(v.second / v.first);
  }
  for (std::size_t i = 1; i < out.conditional_mean.size(); ++i) {
    const double prev = out.conditional_mean[i - 1];
    const double tol = 1e-12 * std::max(1.0, std::abs(prev));
    if (out.conditional_mean[i] < prev - tol) out.monotone = false;
  }
  return out;
}

double conditional_covariance(std::span<const DistTable> marginals, std::size_t n,
                              const ConfigFunction& f, const ConfigFunction& g) {
  double mass = 0, ef = 0, eg = 0, efg = 0;
  enumerate_configurations(marginals, [&](std::span<const int> cfg, double lp) {
    if (lp == kNegInf) return;
    std::size_t s = 0;
    for (int k : cfg) s += static_cast<std::size_t>(k);
    if (s != n) return;
    const double w = std::exp(lp);
    const double fv = f(cfg);
    const double gv = g(cfg);
    mass += w;
    ef += w * fv;
    eg += w * gv;
    efg += w * fv * gv;
  });
  if (!(mass > 0)) throw ImpossibleCondition("conditional covariance: P(S = n) = 0");
  ef /= mass;
  eg /= mass;
  efg /= mass;
  return efg - ef * eg;
}

double covariance(const DistTable& p, std::span<const double> f, std::span<const double> g) {
  if (f.size() < p.size() || g.size() < p.size()) {
    throw DomainError("covariance: function tables shorter than support");
  }
  const std::vector<double> pr = p.probs();
  double ef = 0, eg = 0;
  for (std::size_t k = 0; k < pr.size(); ++k) {
    ef += pr[k] * f[k];
    eg += pr[k] * g[k];
  }
  double cov = 0;
  for (std::size_t k = 0; k < pr.size(); ++k) cov += pr[k] * (f[k] - ef) * (g[k] - eg);
  return cov;
}

}  // namespace gibbslz
