#include "gibbslz/property_suite.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "gibbslz/errors.hpp"
#include "gibbslz/experiment.hpp"
#include "gibbslz/lemma_checks.hpp"
#include "gibbslz/rng.hpp"
#include "gibbslz/split_tree.hpp"
#include "gibbslz/suffix_dp.hpp"
#include "json.hpp"

namespace gibbslz {

namespace {

// splitmix64 stream; plenty for test-instance generation
struct Draw {
  std::uint64_t state;

  std::uint64_t next() { return splitmix64(state++); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

std::string fmt(double v) { return format_double(v); }

PropertyResult make_result(std::string name, bool passed, double metric, std::string detail) {
  return PropertyResult{std::move(name), passed, metric, std::move(detail)};
}

DistTable random_positive_table(Draw& d, std::size_t size) {
  std::vector<double> w(size);
  for (auto& x : w) x = 0.05 + d.uniform();
  const double z = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= z;
  return DistTable::from_probs(w);
}

double enumerated_entropy_bits(std::span<const DistTable> marginals, std::size_t n) {
  std::vector<double> lps;
  enumerate_configurations(marginals, [&](std::span<const int> cfg, double lp) {
    std::size_t s = 0;
    for (int k : cfg) s += static_cast<std::size_t>(k);
    if (s == n && lp != kNegInf) lps.push_back(lp);
  });
  const double log_z = log_sum_exp(lps);
  double h = 0;
  for (double lp : lps) h -= std::exp(lp - log_z) * (lp - log_z);
  return h / std::numbers::ln2;
}

int sum_of(std::span<const int> c) { return std::accumulate(c.begin(), c.end(), 0); }

// Increasing functions of the whole configuration.
std::vector<std::pair<std::string, ConfigFunction>> efron_battery() {
  return {
      {"sum", [](std::span<const int> c) { return double(sum_of(c)); }},
      {"max", [](std::span<const int> c) { return double(*std::max_element(c.begin(), c.end())); }},
      {"min", [](std::span<const int> c) { return double(*std::min_element(c.begin(), c.end())); }},
      {"first", [](std::span<const int> c) { return double(c.front()); }},
      {"last", [](std::span<const int> c) { return double(c.back()); }},
      {"sum_sq",
       [](std::span<const int> c) {
         double s = 0;
         for (int k : c) s += double(k) * k;
         return s;
       }},
      {"first_nonzero", [](std::span<const int> c) { return c.front() >= 1 ? 1.0 : 0.0; }},
      {"prod_1pk",
       [](std::span<const int> c) {
         double p = 1;
         for (int k : c) p *= 1.0 + k;
         return p;
       }},
      {"sum_ge_2", [](std::span<const int> c) { return sum_of(c) >= 2 ? 1.0 : 0.0; }},
      {"weighted",
       [](std::span<const int> c) {
         double s = 0;
         for (std::size_t i = 0; i < c.size(); ++i) s += double(i + 1) * c[i];
         return s;
       }},
      {"max_ends", [](std::span<const int> c) { return double(std::max(c.front(), c.back())); }},
      {"exp_first_plus_last",
       [](std::span<const int> c) { return std::exp(0.5 * c.front()) + c.back(); }},
  };
}

using SubsetFunction = std::function<double(const std::vector<int>&)>;

std::vector<std::pair<std::string, SubsetFunction>> na_f_battery() {
  return {
      {"sum", [](const std::vector<int>& v) { return double(std::accumulate(v.begin(), v.end(), 0)); }},
      {"max", [](const std::vector<int>& v) { return double(*std::max_element(v.begin(), v.end())); }},
      {"min", [](const std::vector<int>& v) { return double(*std::min_element(v.begin(), v.end())); }},
      {"any", [](const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0) >= 1 ? 1.0 : 0.0; }},
      {"sum_sq",
       [](const std::vector<int>& v) {
         const double s = std::accumulate(v.begin(), v.end(), 0);
         return s * s;
       }},
  };
}

std::vector<std::pair<std::string, SubsetFunction>> na_g_battery() {
  return {
      {"sum", [](const std::vector<int>& v) { return double(std::accumulate(v.begin(), v.end(), 0)); }},
      {"max_ge_2", [](const std::vector<int>& v) { return *std::max_element(v.begin(), v.end()) >= 2 ? 1.0 : 0.0; }},
      {"prod_1pk",
       [](const std::vector<int>& v) {
         double p = 1;
         for (int k : v) p *= 1.0 + k;
         return p;
       }},
      {"first", [](const std::vector<int>& v) { return double(v.front()); }},
  };
}

using IndexSet = std::vector<std::size_t>;

std::vector<std::pair<IndexSet, IndexSet>> disjoint_splits(std::size_t len) {
  std::vector<std::pair<IndexSet, IndexSet>> out;
  out.push_back({{0}, {1}});
  if (len >= 3) {
    out.push_back({{0}, {len - 1}});
    IndexSet a, b;
    for (std::size_t i = 0; i < len; ++i) (i < len / 2 ? a : b).push_back(i);
    out.push_back({a, b});
    IndexSet rest;
    for (std::size_t i = 0; i + 1 < len; ++i) rest.push_back(i);
    out.push_back({{len - 1}, rest});
  }
  return out;
}

ConfigFunction restrict_to(const IndexSet& idx, const SubsetFunction& f) {
  return [idx, f](std::span<const int> c) {
    std::vector<int> v;
    v.reserve(idx.size());
    for (auto i : idx) v.push_back(c[i]);
    return f(v);
  };
}

std::size_t scaled(double base, double scale) {
  return static_cast<std::size_t>(std::max(1.0, std::round(base * scale)));
}

}  // namespace

bool PropertyReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

DistTable random_lc_table(std::uint64_t& state, std::size_t size) {
  Draw d{state};
  std::vector<double> lp(size, 0.0);
  double slope = d.uniform(-2.0, 2.0);
  for (std::size_t k = 1; k < size; ++k) {
    lp[k] = lp[k - 1] + slope;
    slope -= d.uniform(0.0, 1.5);
  }
  state = d.state;
  const double z = log_sum_exp(lp);
  for (auto& v : lp) v -= z;
  return DistTable::from_log_probs(std::move(lp));
}

PropertyResult check_lc_marginals(const std::vector<DistTable>& tables, bool inject_fault) {
  std::vector<std::pair<std::string, DistTable>> labelled;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    labelled.emplace_back("marginal[" + std::to_string(i) + "]", tables[i]);
  }
  for (double p : {0.01, 0.2, 0.5, 0.8, 0.99}) {
    labelled.emplace_back("bernoulli(" + fmt(p) + ")", DistTable::bernoulli(p));
    labelled.emplace_back("binomial(12," + fmt(p) + ")", DistTable::binomial(12, p));
  }
  for (double q : {0.05, 0.5, 0.9}) {
    labelled.emplace_back("geometric(" + fmt(q) + ")", DistTable::geometric(q));
  }
  if (inject_fault) {
    const double bad[] = {0.5, 0.1, 0.4};
    labelled.emplace_back("injected(0.5,0.1,0.4)", DistTable::from_probs(bad));
  }
  std::size_t failed = 0;
  std::string first;
  for (const auto& [name, t] : labelled) {
    if (!is_log_concave(t)) {
      if (failed++ == 0) first = name;
    }
  }
  std::string detail = std::to_string(labelled.size()) + " tables";
  if (failed) detail += ", " + std::to_string(failed) + " not LC (first: " + first + ")";
  return make_result("lc_marginals", failed == 0, double(failed), detail);
}

PropertyResult check_lc_closure(std::size_t count, std::uint64_t seed) {
  Draw d{seed};
  std::size_t failed = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const DistTable a = random_lc_table(d.state, 1 + d.below(12));
    const DistTable b = random_lc_table(d.state, 1 + d.below(12));
    if (!is_log_concave(convolve(a, b))) ++failed;
  }
  return make_result("lc_closure", failed == 0, double(failed),
                     std::to_string(count) + " convolutions, " + std::to_string(failed) +
                         " not LC");
}

PropertyResult check_score_ratio(std::size_t count, std::uint64_t seed) {
  Draw d{seed};
  std::size_t failed = 0, vacuous = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t m = 1 + d.below(30);
    std::vector<double> ps(m);
    for (auto& p : ps) p = d.uniform(0.01, 0.99);
    const std::size_t n = d.below(m + 1);
    const ScoreRatio r = score_ratio_check(ps, n);
    if (r.vacuous) ++vacuous;
    if (!r.holds) ++failed;
  }
  // IID: the bound is attained exactly
  double worst_iid = 0;
  const std::size_t iid_cases = std::max<std::size_t>(20, count / 10);
  for (std::size_t i = 0; i < iid_cases; ++i) {
    const std::size_t m = 1 + d.below(30);
    const std::vector<double> ps(m, d.uniform(0.05, 0.95));
    const std::size_t n = 1 + d.below(m);
    const ScoreRatio r = score_ratio_check(ps, n);
    worst_iid = std::max(worst_iid, std::abs(r.ratio - r.bound) / r.bound);
  }
  const bool ok = failed == 0 && worst_iid <= 1e-12;
  return make_result("score_ratio", ok, worst_iid,
                     std::to_string(count) + " instances (" + std::to_string(vacuous) +
                         " vacuous), " + std::to_string(failed) + " violations; " +
                         std::to_string(iid_cases) + " IID cases, max rel gap " + fmt(worst_iid));
}

PropertyResult check_efron(std::size_t per_shape, std::uint64_t seed) {
  Draw d{seed};
  const auto battery = efron_battery();
  std::size_t checks = 0, failed = 0;
  std::string first;
  for (std::size_t len = 1; len <= 5; ++len) {
    for (std::size_t support = 1; support <= 4; ++support) {
      for (std::size_t rep = 0; rep < per_shape; ++rep) {
        std::vector<DistTable> m;
        for (std::size_t i = 0; i < len; ++i) m.push_back(random_lc_table(d.state, support));
        for (const auto& [name, phi] : battery) {
          ++checks;
          if (!efron_monotonicity_check(m, phi).monotone) {
            if (failed++ == 0) {
              first = name + " at l=" + std::to_string(len) + " support=" + std::to_string(support);
            }
          }
        }
      }
    }
  }
  std::string detail = std::to_string(checks) + " checks, " + std::to_string(failed) + " failures";
  if (failed) detail += " (first: " + first + ")";
  return make_result("efron_monotonicity", failed == 0, double(failed), detail);
}

PropertyResult check_na_exhaustive(std::size_t per_shape, std::uint64_t seed) {
  Draw d{seed};
  const auto fs = na_f_battery();
  const auto gs = na_g_battery();
  std::size_t checks = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t len = 2; len <= 4; ++len) {
    const auto splits = disjoint_splits(len);
    for (std::size_t support = 2; support <= 4; ++support) {
      for (std::size_t rep = 0; rep < per_shape; ++rep) {
        std::vector<DistTable> m;
        for (std::size_t i = 0; i < len; ++i) m.push_back(random_lc_table(d.state, support));
        const std::size_t n_max = len * (support - 1);
        for (std::size_t n = 0; n <= n_max; ++n) {
          for (const auto& [a, b] : splits) {
            for (const auto& f : fs) {
              for (const auto& g : gs) {
                const double c = conditional_covariance(m, n, restrict_to(a, f.second),
                                                        restrict_to(b, g.second));
                worst = std::max(worst, c);
                ++checks;
              }
            }
          }
        }
      }
    }
  }
  return make_result("na_exhaustive", worst <= 1e-12, worst,
                     std::to_string(checks) + " covariances, max " + fmt(worst));
}

PropertyResult check_na_empirical(const EnsembleSpec& spec, double density, std::size_t draws,
                                  std::uint64_t seed) {
  constexpr std::size_t len = 64;
  const std::size_t n = choose_n(ParticleTarget{density}, len);
  const CanonicalSampler sampler(spec, len, n);
  using Stat = std::function<double(const std::vector<std::uint32_t>&)>;
  auto site = [](std::size_t i) -> Stat { return [i](const auto& k) { return double(k[i]); }; };
  auto block_sum = [](std::size_t lo, std::size_t hi) -> Stat {
    return [lo, hi](const auto& k) {
      double s = 0;
      for (std::size_t i = lo; i < hi; ++i) s += k[i];
      return s;
    };
  };
  const std::vector<std::pair<Stat, Stat>> pairs = {
      {site(0), site(1)},
      {block_sum(0, 2), block_sum(2, 4)},
      {site(0), site(32)},
      {[](const auto& k) { return double(*std::max_element(k.begin(), k.begin() + 8)); },
       block_sum(8, 16)},
      {[](const auto& k) { return k[10] >= 1 ? 1.0 : 0.0; }, site(50)},
  };
  std::vector<std::vector<double>> fv(pairs.size()), gv(pairs.size());
  for (std::size_t r = 0; r < draws; ++r) {
    const auto s = sampler.sample(seed, r);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      fv[p].push_back(pairs[p].first(s.values));
      gv[p].push_back(pairs[p].second(s.values));
    }
  }
  double worst = -std::numeric_limits<double>::infinity();
  bool ok = true;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double mf = std::accumulate(fv[p].begin(), fv[p].end(), 0.0) / draws;
    const double mg = std::accumulate(gv[p].begin(), gv[p].end(), 0.0) / draws;
    std::vector<double> prod(draws);
    for (std::size_t r = 0; r < draws; ++r) prod[r] = (fv[p][r] - mf) * (gv[p][r] - mg);
    const MeanSe c = mean_and_se(prod);
    if (c.mean > 3 * c.se) ok = false;
    worst = std::max(worst, c.se > 0 ? c.mean / c.se : c.mean);
  }
  return make_result("na_empirical", ok, worst,
                     std::to_string(pairs.size()) + " pairs at l=64 n=" + std::to_string(n) +
                         ", " + std::to_string(draws) + " draws, max cov/SE " + fmt(worst));
}

PropertyResult check_chebyshev(std::size_t count, std::uint64_t seed) {
  Draw d{seed};
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> w(10);
    for (auto& x : w) x = d.uniform() < 0.2 ? 0.0 : d.uniform();
    w[d.below(10)] += 0.1;
    const double z = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= z;
    std::vector<double> up(10), down(10);
    double a = 0, b = 0;
    for (std::size_t k = 0; k < 10; ++k) {
      a += d.uniform();
      b += d.uniform();
      up[k] = a;
      down[k] = -b;
    }
    worst = std::max(worst, covariance(DistTable::from_probs(w), up, down));
  }
  return make_result("chebyshev_rearrangement", worst <= 1e-12, worst,
                     std::to_string(count) + " instances, max cov " + fmt(worst));
}

PropertyResult check_moment_constants(const std::vector<EnsembleSpec>& specs, std::size_t length) {
  std::size_t tables = 0, failed = 0;
  double worst = 0;  // E|K-EK|^3 / (c Var)
  for (const auto& spec : specs) {
    for (std::size_t len : {std::size_t{64}, length}) {
      for (const auto& t : site_marginals(spec, len)) {
        const DistSummary s = summary(t);
        const double c = spec.stats == Statistics::Fermi ? 2.0 : 28.0 * std::max(1.0, s.mean);
        ++tables;
        if (s.variance <= 0) continue;
        const double ratio = s.abs_central_moment3 / (c * s.variance);
        worst = std::max(worst, ratio);
        if (ratio > 1.0 + 1e-12) ++failed;
      }
    }
  }
  return make_result("moment_constants", failed == 0, worst,
                     std::to_string(tables) + " marginals, max m3/(c var) " + fmt(worst));
}

PropertyResult check_bottomley(std::size_t count, std::uint64_t seed) {
  Draw d{seed};
  std::size_t failed = 0;
  double worst = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t parts = 2 + d.below(5);
    DistTable s = random_lc_table(d.state, 1 + d.below(8));
    for (std::size_t j = 1; j < parts; ++j) s = convolve(s, random_lc_table(d.state, 1 + d.below(8)));
    const ModeMean r = mode_mean_check(s);
    if (!r.holds) ++failed;
    if (r.bound > 0) worst = std::max(worst, r.gap / r.bound);
  }
  return make_result("mode_mean_bound", failed == 0, worst,
                     std::to_string(count) + " LC sums, max gap/bound " + fmt(worst));
}

PropertyResult check_local_clt(const EnsembleSpec& spec, const std::vector<std::size_t>& sizes) {
  std::ostringstream detail;
  bool ok = true;
  double prev = std::numeric_limits<double>::infinity();
  double worst_ratio = 0;
  for (std::size_t n : sizes) {
    const auto m = site_marginals(spec, n);
    const LocalCltError e = local_clt_error(m);
    const double ratio = e.sup_error / e.lyapunov;
    worst_ratio = std::max(worst_ratio, ratio);
    if (!(e.sup_error < prev)) ok = false;
    if (ratio > kLocalCltRatioBound) ok = false;
    prev = e.sup_error;
    detail << "n=" << n << " sup=" << fmt(e.sup_error) << " L=" << fmt(e.lyapunov) << "; ";
  }
  return make_result("local_clt", ok, worst_ratio, detail.str() + "max sup/L " + fmt(worst_ratio));
}

PropertyResult check_conditional_entropy(std::size_t count, std::uint64_t seed) {
  Draw d{seed};
  double worst = 0;
  auto one = [&](const std::vector<DistTable>& m, std::size_t n) {
    const double dp = conditional_entropy_exact(build_suffix_dp(m, n));
    worst = std::max(worst, std::abs(dp - enumerated_entropy_bits(m, n)));
  };
  one(std::vector<DistTable>(4, DistTable::bernoulli(0.5)), 2);
  for (std::size_t i = 1; i < count; ++i) {
    const std::size_t len = 1 + d.below(6);
    std::vector<DistTable> m;
    std::size_t n_max = 0;
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t size = 1 + d.below(4);
      m.push_back(d.uniform() < 0.5 ? random_lc_table(d.state, size)
                                    : random_positive_table(d, size));
      n_max += size - 1;
    }
    one(m, d.below(n_max + 1));
  }
  return make_result("conditional_entropy", worst <= 1e-10, worst,
                     std::to_string(count) + " instances, max |dp - enum| " + fmt(worst) + " bits");
}

PropertyResult check_chain_rule(std::size_t count, std::uint64_t seed) {
  Draw d{seed};
  double worst = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t len = 1 + d.below(8);
    std::vector<DistTable> m;
    std::size_t n_max = 0;
    double h_sites = 0;
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t size = 1 + d.below(5);
      m.push_back(random_positive_table(d, size));
      h_sites += summary(m.back()).entropy_bits;
      n_max += size - 1;
    }
    const SuffixSumDP dp = build_suffix_dp(m, n_max);
    double lhs = 0;
    for (std::size_t s = 0; s <= n_max; ++s) {
      const double lp = dp.log_prob_total(s);
      if (lp == kNegInf) continue;
      const double p = std::exp(lp);
      lhs += p * conditional_entropy_exact(dp, s) - p * lp / std::numbers::ln2;
    }
    worst = std::max(worst, std::abs(lhs - h_sites));
  }
  return make_result("entropy_chain_rule", worst <= 1e-9, worst,
                     std::to_string(count) + " instances, max defect " + fmt(worst) + " bits");
}

double canonical_tv_distance(const std::vector<DistTable>& marginals, std::size_t n,
                             std::size_t draws, std::uint64_t seed) {
  std::size_t base = 1;
  for (const auto& m : marginals) base = std::max(base, m.size());
  auto encode = [&](auto&& cfg) {
    std::uint64_t code = 0;
    for (std::size_t i = cfg.size(); i-- > 0;) code = code * base + static_cast<std::uint64_t>(cfg[i]);
    return code;
  };
  std::map<std::uint64_t, double> exact;
  std::vector<double> lps;
  std::vector<std::uint64_t> codes;
  enumerate_configurations(marginals, [&](std::span<const int> cfg, double lp) {
    if (lp == kNegInf || static_cast<std::size_t>(sum_of(cfg)) != n) return;
    lps.push_back(lp);
    codes.push_back(encode(cfg));
  });
  if (lps.empty()) throw ImpossibleCondition("tv distance: P(S = n) = 0");
  const double log_z = log_sum_exp(lps);
  for (std::size_t i = 0; i < lps.size(); ++i) exact[codes[i]] = std::exp(lps[i] - log_z);

  const CanonicalSampler sampler(marginals, n);
  std::map<std::uint64_t, double> counts;
  for (std::size_t r = 0; r < draws; ++r) counts[encode(sampler.sample(seed, r).values)] += 1.0;
  double tv = 0;
  for (const auto& [code, p] : exact) {
    const auto it = counts.find(code);
    tv += std::abs((it == counts.end() ? 0.0 : it->second / draws) - p);
  }
  for (const auto& [code, c] : counts) {
    if (!exact.count(code)) tv += c / draws;
  }
  return 0.5 * tv;
}

PropertyResult check_sampler_fidelity(std::size_t draws, std::uint64_t seed) {
  const EnsembleSpec spec{Statistics::Fermi, 1.0, 1.0, Dispersion::cosine_lattice()};
  const double tv = canonical_tv_distance(site_marginals(spec, 6), 3, draws, seed);
  return make_result("sampler_tv", tv < 5e-3, tv,
                     "l=6 n=3, " + std::to_string(draws) + " draws, TV " + fmt(tv));
}

PropertyResult check_canonical_site_marginals(const EnsembleSpec& spec, double density,
                                              std::size_t draws, std::uint64_t seed) {
  constexpr std::size_t len = 64;
  const std::size_t n = choose_n(ParticleTarget{density}, len);
  const auto marginals = site_marginals(spec, len);
  const SuffixSumDP dp = build_suffix_dp(marginals, n);
  const SplitTree tree = SplitTree::build(marginals, n);
  std::vector<double> mean(len), sd(len);
  for (std::size_t i = 0; i < len; ++i) {
    const DistSummary s = summary(conditional_marginal(dp, i));
    mean[i] = s.mean;
    sd[i] = std::sqrt(s.variance);
  }
  double worst = 0;
  bool ok = true;
  auto score = [&](const std::vector<double>& sums) {
    for (std::size_t i = 0; i < len; ++i) {
      const double emp = sums[i] / draws;
      const double se = sd[i] / std::sqrt(double(draws));
      const double z = se > 0 ? std::abs(emp - mean[i]) / se : (emp == mean[i] ? 0.0 : HUGE_VAL);
      worst = std::max(worst, z);
      if (z > 4.0) ok = false;
    }
  };
  std::vector<double> sums(len, 0.0);
  for (std::size_t r = 0; r < draws; ++r) {
    const auto v = sample_from_suffix_dp(dp, CounterRng(seed, replica_stream(r, len)));
    for (std::size_t i = 0; i < len; ++i) sums[i] += v[i];
  }
  score(sums);
  std::fill(sums.begin(), sums.end(), 0.0);
  std::vector<std::uint32_t> out(len);
  for (std::size_t r = 0; r < draws; ++r) {
    tree.sample(CounterRng(seed ^ 0x5A5A5A5AULL, replica_stream(r, len)), out);
    for (std::size_t i = 0; i < len; ++i) sums[i] += out[i];
  }
  score(sums);
  return make_result("canonical_site_marginals", ok, worst,
                     "l=64 n=" + std::to_string(n) + ", suffix table and split tree, " +
                         std::to_string(draws) + " draws each, max |z| " + fmt(worst));
}

PropertyResult check_grand_density(const EnsembleSpec& spec, std::size_t length,
                                   std::uint64_t seed) {
  const double m = particle_density(spec);
  double var = 0;
  for (const auto& t : site_marginals(spec, length)) var += summary(t).variance;
  const double se = std::sqrt(var / double(length)) / std::sqrt(double(length));
  double worst = 0;
  constexpr std::size_t reps = 4;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto s = sample_grand(spec, length, seed, r);
    const double mean =
        std::accumulate(s.values.begin(), s.values.end(), 0.0) / double(length);
    worst = std::max(worst, std::abs(mean - m) / se);
  }
  return make_result("grand_density", worst <= 4.0, worst,
                     "l=" + std::to_string(length) + ", " + std::to_string(reps) +
                         " replicas, max |z| " + fmt(worst));
}

TypicalCountStudy typical_count_study(const EnsembleSpec& spec, double density,
                                      const TypicalParams& params,
                                      const std::vector<std::size_t>& lengths,
                                      std::size_t replicas, std::uint64_t seed, int workers) {
  TypicalCountStudy out;
  out.lengths = lengths;
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  for (std::size_t len : lengths) {
    const std::size_t n = choose_n(ParticleTarget{density}, len);
    const CanonicalSampler sampler(spec, len, n);
    const auto l_profile = mean_profile(spec, len);
    const auto g_profile = entropy_profile(spec, len);
    std::vector<ResultRow> rows(replicas);
    std::vector<std::exception_ptr> failures(replicas);
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
    for (std::size_t r = 0; r < replicas; ++r) {
      try {
        rows[r] = run_replica(EnsembleKind::Canonical, nullptr, &sampler, l_profile, g_profile,
                              params, seed, r);
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
    double low = 0, frac = 0;
    for (const auto& row : rows) {
      low += double(row.low_entropy_typical);
      frac += double(row.non_typical) / double(row.words);
    }
    out.mean_low_entropy_typical.push_back(low / double(replicas));
    out.mean_non_typical_fraction.push_back(frac / double(replicas));
  }
  std::vector<double> x(lengths.begin(), lengths.end());
  out.slope = log_log_slope(x, out.mean_low_entropy_typical);
  return out;
}

PropertyResult check_typical_counts(const TypicalCountStudy& study, double epsilon,
                                    std::size_t fraction_length) {
  const double slope_bound = 1.0 - epsilon * epsilon + 0.05;
  bool ok = std::isfinite(study.slope) && study.slope < slope_bound;
  std::ostringstream detail;
  detail << "slope " << fmt(study.slope) << " (bound " << fmt(slope_bound) << ")";
  const auto it = std::find(study.lengths.begin(), study.lengths.end(), fraction_length);
  if (it != study.lengths.end()) {
    const double frac = study.mean_non_typical_fraction[it - study.lengths.begin()];
    ok = ok && frac < 0.05;
    detail << "; non-typical fraction at l=" << fraction_length << " " << fmt(frac)
           << " (bound 0.05)";
  } else {
    detail << "; l=" << fraction_length << " not in grid, fraction not checked";
  }
  return make_result("typical_word_counts", ok, study.slope, detail.str());
}

PropertyReport run_property_suite(const ExperimentConfig& cfg, int workers) {
  PropertyReport report;
  report.config_hash = config_hash_hex(cfg);
  const double s = cfg.check_scale;
  auto seed_for = [&](std::uint64_t k) { return splitmix64(cfg.seed * 0x9E3779B97F4A7C15ULL + k); };
  auto guarded = [&](const std::string& name, const std::function<PropertyResult()>& f) {
    try {
      report.results.push_back(f());
    } catch (const std::exception& e) {
      report.results.push_back(make_result(name, false, NAN, std::string("error: ") + e.what()));
    }
  };

  const EnsembleSpec spec = resolve_ensemble(cfg);
  const double density = target_density(cfg, spec);
  const Dispersion cosine = Dispersion::cosine_lattice();
  const std::vector<EnsembleSpec> reference = {
      spec,
      {Statistics::Fermi, 1.0, 1.0, cosine},
      {Statistics::Bose, 1.0, -0.5, cosine},
  };

  guarded("lc_marginals", [&] {
    std::vector<DistTable> tables;
    for (const auto& sp : reference) {
      for (auto& t : site_marginals(sp, 64)) tables.push_back(std::move(t));
    }
    return check_lc_marginals(tables, cfg.inject_fault == "lc");
  });
  guarded("lc_closure", [&] { return check_lc_closure(scaled(1000, s), seed_for(1)); });
  guarded("score_ratio", [&] { return check_score_ratio(scaled(500, s), seed_for(2)); });
  guarded("efron_monotonicity", [&] { return check_efron(scaled(4, s), seed_for(3)); });
  guarded("na_exhaustive", [&] { return check_na_exhaustive(scaled(3, s), seed_for(4)); });
  guarded("na_empirical",
          [&] { return check_na_empirical(spec, density, scaled(20000, s), seed_for(5)); });
  guarded("chebyshev_rearrangement", [&] { return check_chebyshev(scaled(200, s), seed_for(6)); });
  guarded("moment_constants", [&] { return check_moment_constants(reference, 1024); });
  guarded("mode_mean_bound", [&] { return check_bottomley(scaled(200, s), seed_for(7)); });
  guarded("local_clt", [&] { return check_local_clt(spec, {25, 100, 400, 1600}); });
  guarded("conditional_entropy",
          [&] { return check_conditional_entropy(scaled(50, s), seed_for(8)); });
  guarded("entropy_chain_rule", [&] { return check_chain_rule(scaled(50, s), seed_for(9)); });
  // TV below 5e-3 needs the full draw count regardless of scale
  guarded("sampler_tv", [&] { return check_sampler_fidelity(1000000, seed_for(10)); });
  guarded("canonical_site_marginals", [&] {
    return check_canonical_site_marginals(spec, density, scaled(20000, s), seed_for(11));
  });
  guarded("grand_density", [&] { return check_grand_density(spec, 1 << 16, seed_for(12)); });
  guarded("typical_word_counts", [&] {
    const TypicalParams params = make_typical_params(spec, cfg.epsilon, cfg.typical);
    const std::size_t reps = std::max<std::size_t>(2, scaled(double(cfg.replicas), s));
    const auto study =
        typical_count_study(spec, density, params, cfg.lengths, reps, seed_for(13), workers);
    return check_typical_counts(study, cfg.epsilon, 1 << 14);
  });
  return report;
}

void write_property_report(std::ostream& os, const PropertyReport& report, OutputFormat fmt_) {
  if (fmt_ == OutputFormat::Jsonl) {
    for (const auto& r : report.results) {
      nlohmann::ordered_json j;
      j["config_hash"] = report.config_hash;
      j["property"] = r.name;
      j["passed"] = r.passed;
      j["metric"] = std::isfinite(r.metric) ? nlohmann::ordered_json(r.metric) : nullptr;
      j["detail"] = r.detail;
      os << j.dump() << '\n';
    }
    return;
  }
  os << "config_hash,property,status,metric,detail\n";
  for (const auto& r : report.results) {
    std::string detail = r.detail;
    std::string quoted;
    for (char c : detail) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    os << report.config_hash << ',' << r.name << ',' << (r.passed ? "pass" : "fail") << ','
       << format_double(r.metric) << ",\"" << quoted << "\"\n";
  }
}

}  // namespace gibbslz
