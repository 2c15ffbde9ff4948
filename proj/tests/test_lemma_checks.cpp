#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "gibbslz/errors.hpp"
#include "gibbslz/lemma_checks.hpp"
#include "gibbslz/property_suite.hpp"
#include "oracles.hpp"

using namespace gibbslz;

TEST_CASE("local CLT error") {
  const std::vector<DistTable> hundred(100, DistTable::bernoulli(0.5));
  const LocalCltError e = local_clt_error(hundred);
  CHECK(e.sigma == doctest::Approx(5.0));
  // sigma P(S=50) with the exact binomial coefficient
  const double p50 = std::exp2(oracle::log2_binomial(100, 50) - 100);
  CHECK(5.0 * p50 == doctest::Approx(0.39795).epsilon(1e-4));
  CHECK(e.sup_error > 5e-4);
  CHECK(e.sup_error < 2e-3);
  CHECK(e.lyapunov == doctest::Approx(100 * 0.125 / 125.0));

  const std::vector<DistTable> one{DistTable::bernoulli(0.5)};
  const LocalCltError e1 = local_clt_error(one);
  // sigma P(S=k) = 1/4 against the unit Gaussian density at one sd
  CHECK(e1.sup_error == doctest::Approx(0.25 - std::exp(-0.5) / std::sqrt(2 * M_PI)).epsilon(1e-9));
  CHECK(std::isfinite(e1.lyapunov));

  const std::vector<DistTable> flat{DistTable::delta(2)};
  CHECK_THROWS_AS(local_clt_error(flat), PreconditionError);

  double prev = 1;
  for (std::size_t n : {25, 100, 400}) {
    const std::vector<DistTable> m(n, DistTable::binomial(3, 0.3));
    const double s = local_clt_error(m).sup_error;
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("Poisson-binomial pmf") {
  const std::vector<double> ps{0.2, 0.5, 0.8};
  const auto pmf = poisson_binomial_pmf(ps);
  CHECK(pmf[0] == doctest::Approx(0.8 * 0.5 * 0.2));
  CHECK(pmf[3] == doctest::Approx(0.2 * 0.5 * 0.8));
  CHECK(pmf[2] == doctest::Approx(0.2 * 0.5 * 0.2 + 0.2 * 0.5 * 0.8 + 0.8 * 0.5 * 0.8));
}

TEST_CASE("score ratio") {
  for (std::size_t n = 1; n <= 7; ++n) {
    const std::vector<double> iid(7, 0.35);
    const ScoreRatio r = score_ratio_check(iid, n);
    CHECK(r.holds);
    CHECK(std::abs(r.ratio - r.bound) <= 1e-12 * r.bound);
    // binomial ratio identity n(1-p) / ((M-n+1) p)
    CHECK(r.ratio == doctest::Approx(n * 0.65 / ((7 - n + 1) * 0.35)).epsilon(1e-12));
  }
  const std::vector<double> ps{0.2, 0.5, 0.8};
  const ScoreRatio r = score_ratio_check(ps, 2);
  CHECK(r.holds);
  const double p1 = 0.2 * 0.5 * 0.2 + 0.8 * 0.5 * 0.2 + 0.8 * 0.5 * 0.8;
  const double p2 = 0.2 * 0.5 * 0.2 + 0.2 * 0.5 * 0.8 + 0.8 * 0.5 * 0.8;
  CHECK(r.ratio == doctest::Approx(p1 / p2));
  CHECK(score_ratio_check(ps, 0).vacuous);
  const std::vector<double> certain{0.5, 1.0};
  CHECK_THROWS_AS(score_ratio_check(certain, 1), DomainError);
}

TEST_CASE("mode-mean bound") {
  const ModeMean a = mode_mean_check(DistTable::binomial(20, 0.5));
  CHECK(a.holds);
  CHECK(a.gap == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(a.bound == doctest::Approx(std::sqrt(15.0)));
  const ModeMean b = mode_mean_check(DistTable::binomial(10, 0.3));
  CHECK(b.holds);
  CHECK(b.bound == doctest::Approx(std::sqrt(3 * 2.1)));
  const ModeMean g = mode_mean_check(DistTable::geometric_with_mean(1.0));
  CHECK(g.holds);
  CHECK(g.gap == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g.bound == doctest::Approx(std::sqrt(6.0)).epsilon(1e-9));
  const double bad[] = {0.5, 0.1, 0.4};
  CHECK_THROWS_AS(mode_mean_check(DistTable::from_probs(bad)), PreconditionError);
}

TEST_CASE("Efron monotonicity") {
  const std::vector<DistTable> geo(3, DistTable::geometric_with_mean(1.0, 1e-12).truncated(4));
  const auto sum = [](std::span<const int> c) { return double(c[0] + c[1] + c[2]); };
  const EfronResult s = efron_monotonicity_check(geo, sum);
  CHECK(s.monotone);
  for (std::size_t i = 0; i < s.sums.size(); ++i) {
    CHECK(s.conditional_mean[i] == doctest::Approx(double(s.sums[i])));
  }
  const auto mx = [](std::span<const int> c) { return double(std::max({c[0], c[1], c[2]})); };
  CHECK(efron_monotonicity_check(geo, mx).monotone);

  const std::vector<DistTable> two{DistTable::bernoulli(0.3), DistTable::bernoulli(0.6)};
  const EfronResult f = efron_monotonicity_check(two, [](std::span<const int> c) { return double(c[0]); });
  REQUIRE(f.conditional_mean.size() == 3);
  CHECK(f.conditional_mean[0] < f.conditional_mean[1]);
  CHECK(f.conditional_mean[1] < f.conditional_mean[2]);

  const double bad[] = {0.5, 0.1, 0.4};
  const std::vector<DistTable> non_lc{DistTable::from_probs(bad)};
  CHECK_THROWS_AS(efron_monotonicity_check(non_lc, sum), PreconditionError);
  const std::vector<DistTable> six(6, DistTable::bernoulli(0.5));
  CHECK_THROWS_AS(efron_monotonicity_check(six, sum), PreconditionError);
}

TEST_CASE("conditional covariance of disjoint increasing functions is nonpositive") {
  const std::vector<DistTable> m{DistTable::bernoulli(0.3), DistTable::binomial(2, 0.4),
                                 DistTable::geometric(0.5, 1e-4), DistTable::bernoulli(0.8)};
  for (std::size_t n = 0; n <= 5; ++n) {
    const double c = conditional_covariance(
        m, n, [](std::span<const int> k) { return double(k[0] + k[1]); },
        [](std::span<const int> k) { return double(std::max(k[2], k[3])); });
    CHECK(c <= 1e-12);
  }
}

TEST_CASE("Chebyshev rearrangement on a fixed instance") {
  const double p[] = {0.1, 0.2, 0.3, 0.4};
  const std::vector<double> up{0, 1, 3, 4};
  const std::vector<double> down{5, 2, 2, 0};
  CHECK(covariance(DistTable::from_probs(p), up, down) <= 0);
  CHECK(covariance(DistTable::from_probs(p), up, up) >= 0);
}

TEST_CASE("property batteries pass at small scale") {
  CHECK(check_lc_closure(100, 1).passed);
  CHECK(check_score_ratio(50, 2).passed);
  CHECK(check_efron(1, 3).passed);
  CHECK(check_na_exhaustive(1, 4).passed);
  CHECK(check_chebyshev(50, 5).passed);
  CHECK(check_bottomley(50, 6).passed);
  CHECK(check_conditional_entropy(20, 7).passed);
  CHECK(check_chain_rule(20, 8).passed);
}

TEST_CASE("fault injection is caught") {
  CHECK(check_lc_marginals({DistTable::bernoulli(0.4)}, false).passed);
  const PropertyResult r = check_lc_marginals({DistTable::bernoulli(0.4)}, true);
  CHECK_FALSE(r.passed);
  CHECK(r.detail.find("injected") != std::string::npos);
}

TEST_CASE("random LC tables are LC") {
  std::uint64_t state = 42;
  for (int i = 0; i < 200; ++i) CHECK(is_log_concave(random_lc_table(state, 1 + i % 9)));
}
