#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "gibbslz/disttab.hpp"
#include "gibbslz/errors.hpp"
#include "gibbslz/suffix_dp.hpp"
#include "oracles.hpp"

using namespace gibbslz;

namespace {
std::vector<std::vector<double>> as_probs(const std::vector<DistTable>& m) {
  std::vector<std::vector<double>> out;
  for (const auto& t : m) out.push_back(t.probs());
  return out;
}

std::vector<DistTable> hetero_bernoulli(std::size_t len) {
  std::vector<DistTable> m;
  for (std::size_t i = 0; i < len; ++i) m.push_back(DistTable::bernoulli(0.15 + 0.7 * i / len));
  return m;
}
}  // namespace

TEST_CASE("construction validates") {
  const double bad_sum[] = {0.5, 0.6};
  CHECK_THROWS_AS(DistTable::from_probs(bad_sum), DomainError);
  const double negative[] = {1.2, -0.2};
  CHECK_THROWS_AS(DistTable::from_probs(negative), DomainError);
  const DistTable g = DistTable::geometric(0.5);
  CHECK(g.tail_mass() < 1e-15);
  CHECK(g.total_mass() + g.tail_mass() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("convolve") {
  const DistTable p = DistTable::binomial(5, 0.3);
  const DistTable id = convolve(DistTable::delta(0), p);
  REQUIRE(id.size() == p.size());
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(id.prob(k) == doctest::Approx(p.prob(k)));

  const DistTable b = convolve(DistTable::bernoulli(0.5), DistTable::bernoulli(0.5));
  CHECK(b.prob(0) == doctest::Approx(0.25));
  CHECK(b.prob(1) == doctest::Approx(0.5));
  CHECK(b.prob(2) == doctest::Approx(0.25));

  const double q = 0.37;
  DistTable s = DistTable::delta(0);
  for (int i = 0; i < 20; ++i) s = convolve(s, DistTable::bernoulli(q));
  for (unsigned k = 0; k <= 20; ++k) {
    const double exact = std::exp2(oracle::log2_binomial(20, k)) * std::pow(q, k) * std::pow(1 - q, 20 - k);
    CHECK(std::abs(s.prob(k) - exact) < 1e-12);
  }
}

TEST_CASE("summary") {
  const DistSummary b = summary(DistTable::bernoulli(0.5));
  CHECK(b.mean == doctest::Approx(0.5));
  CHECK(b.variance == doctest::Approx(0.25));
  CHECK(b.abs_central_moment3 == doctest::Approx(0.125));
  CHECK(b.entropy_bits == doctest::Approx(1.0));
  CHECK(b.mode == 0);

  const DistSummary g = summary(DistTable::geometric_with_mean(1.0));
  CHECK(std::abs(g.variance - 2.0) < 1e-9);
  CHECK(std::abs(g.mean - 1.0) < 1e-9);

  const DistSummary d = summary(DistTable::delta(3));
  CHECK(d.mean == 3.0);
  CHECK(d.variance == 0.0);
  CHECK(d.entropy_bits == 0.0);
  CHECK(d.mode == 3);
}

TEST_CASE("is_log_concave") {
  for (double p : {0.01, 0.3, 0.99}) CHECK(is_log_concave(DistTable::bernoulli(p)));
  for (double q : {0.1, 0.5, 0.95}) CHECK(is_log_concave(DistTable::geometric(q)));
  CHECK(is_log_concave(DistTable::binomial(30, 0.2)));
  const double bad[] = {0.5, 0.1, 0.4};
  CHECK_FALSE(is_log_concave(DistTable::from_probs(bad)));
  const double gap[] = {0.5, 0.0, 0.5};
  CHECK_FALSE(is_log_concave(DistTable::from_probs(gap)));
}

TEST_CASE("suffix DP basics") {
  const std::vector<DistTable> two(2, DistTable::bernoulli(0.5));
  const SuffixSumDP dp = build_suffix_dp(two, 1);
  CHECK(std::exp(dp.log_suffix(1, 0)) == doctest::Approx(0.5));
  CHECK(std::exp(dp.log_suffix(1, 1)) == doctest::Approx(0.5));
  CHECK(std::exp(dp.log_prob_total(1)) == doctest::Approx(0.5));

  const auto m6 = hetero_bernoulli(6);
  const SuffixSumDP dp6 = build_suffix_dp(m6, 3);
  CHECK(std::abs(std::exp(dp6.log_prob_total(3)) - oracle::prob_of_sum(as_probs(m6), 3)) < 1e-12);

  const std::vector<DistTable> sure{DistTable::bernoulli(1.0)};
  CHECK_THROWS_AS(build_suffix_dp(sure, 0), ImpossibleCondition);
  CHECK_THROWS_AS(build_suffix_dp(m6, 7), ImpossibleCondition);
}

TEST_CASE("conditional marginals") {
  const std::vector<DistTable> two(2, DistTable::bernoulli(0.3));
  const DistTable c = conditional_marginal(build_suffix_dp(two, 1), 0);
  CHECK(c.prob(0) == doctest::Approx(0.5));
  CHECK(c.prob(1) == doctest::Approx(0.5));

  const std::vector<DistTable> thirds{DistTable::bernoulli(1.0 / 3), DistTable::bernoulli(2.0 / 3)};
  CHECK(conditional_marginal(build_suffix_dp(thirds, 1), 0).prob(1) == doctest::Approx(0.2));

  const auto m5 = hetero_bernoulli(5);
  const SuffixSumDP dp = build_suffix_dp(m5, 3);
  const DistTable z = conditional_marginal(dp, 2, 0);
  CHECK(z.prob(0) == doctest::Approx(1.0));

  const auto law = oracle::conditioned_law(as_probs(m5), 3);
  for (std::size_t i = 0; i < 5; ++i) {
    double p1 = 0;
    for (const auto& [cfg, p] : law) p1 += cfg[i] * p;
    CHECK(conditional_marginal(dp, i).prob(1) == doctest::Approx(p1).epsilon(1e-12));
  }
}

TEST_CASE("conditional entropy") {
  const std::vector<DistTable> four(4, DistTable::bernoulli(0.5));
  CHECK(conditional_entropy_exact(build_suffix_dp(four, 2)) == doctest::Approx(std::log2(6.0)).epsilon(1e-12));
  CHECK(std::abs(conditional_entropy_exact(build_suffix_dp(four, 4))) < 1e-12);

  const auto m5 = hetero_bernoulli(5);
  std::vector<double> p;
  for (const auto& [cfg, w] : oracle::conditioned_law(as_probs(m5), 2)) p.push_back(w);
  CHECK(std::abs(conditional_entropy_exact(build_suffix_dp(m5, 2)) - oracle::shannon_bits(p)) < 1e-10);

  // mixed supports
  const std::vector<DistTable> mixed{DistTable::geometric(0.4, 1e-6), DistTable::binomial(3, 0.3),
                                     DistTable::bernoulli(0.8)};
  const SuffixSumDP dp = build_suffix_dp(mixed, 4);
  for (int n = 0; n <= 4; ++n) {
    std::vector<double> q;
    for (const auto& [cfg, w] : oracle::conditioned_law(as_probs(mixed), n)) q.push_back(w);
    CHECK(std::abs(conditional_entropy_exact(dp, n) - oracle::shannon_bits(q)) < 1e-10);
  }
}

TEST_CASE("entropy gap") {
  const std::vector<DistTable> four(4, DistTable::bernoulli(0.5));
  CHECK(entropy_gap(four, 2) == doctest::Approx(std::log2(6.0) - 4).epsilon(1e-12));
  const std::vector<DistTable> sixteen(16, DistTable::bernoulli(0.5));
  CHECK(entropy_gap(sixteen, 8) == doctest::Approx(oracle::log2_binomial(16, 8) - 16).epsilon(1e-12));
  CHECK(entropy_gap(sixteen, 8) == doctest::Approx(-2.349).epsilon(1e-3));
  CHECK_THROWS_AS(entropy_gap(four, 5), ImpossibleCondition);
}
