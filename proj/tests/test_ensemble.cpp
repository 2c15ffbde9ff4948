#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gibbslz/ensemble.hpp"
#include "gibbslz/errors.hpp"
#include "gibbslz/sampler.hpp"
#include "oracles.hpp"

using namespace gibbslz;

namespace {
const Dispersion kCos = Dispersion::cosine_lattice();
EnsembleSpec fermi(double beta, double mu, Dispersion d = kCos) {
  return {Statistics::Fermi, beta, mu, d};
}
EnsembleSpec bose(double beta, double mu, Dispersion d = kCos) {
  return {Statistics::Bose, beta, mu, d};
}
}  // namespace

TEST_CASE("eval_dispersion") {
  CHECK(eval_dispersion(fermi(1, 0), 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(eval_dispersion(fermi(1, 0), 0.5) == doctest::Approx(2.0));
  CHECK(eval_dispersion(fermi(1, -0.3), 0.25) == doctest::Approx(1.3));
  CHECK_THROWS_AS(eval_dispersion(fermi(1, 0), 1.5), DomainError);
  CHECK_THROWS_AS(eval_dispersion(fermi(1, 0), -0.1), DomainError);
}

TEST_CASE("tabulated dispersion interpolates linearly") {
  const Dispersion d = Dispersion::tabulated({0.0, 2.0, 1.0});
  CHECK(d(0.25) == doctest::Approx(1.0));
  CHECK(d(0.75) == doctest::Approx(1.5));
  CHECK(d.minimum() == 0.0);
  CHECK_THROWS(Dispersion::tabulated({1.0}));
}

TEST_CASE("marginal mean and entropy") {
  CHECK(marginal_mean(fermi(1, 0, Dispersion::constant(0)), 0.3) == doctest::Approx(0.5));
  const EnsembleSpec b = bose(1, 0, Dispersion::constant(std::numbers::ln2));
  CHECK(marginal_mean(b, 0.7) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(marginal_entropy(b, 0.7) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(marginal_mean(fermi(1, 1), 0.25) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(marginal_entropy(fermi(1, 0, Dispersion::constant(0)), 0.1) == doctest::Approx(1.0));
  const double p = std::exp(-4.0) / (1 + std::exp(-4.0));
  CHECK(marginal_entropy(fermi(2, 0), 0.5) == doctest::Approx(oracle::h2(p)).epsilon(1e-13));
  CHECK_THROWS_AS(marginal_mean(bose(1, 0.5), 0.0), InvalidEnsemble);
}

TEST_CASE("extreme arguments stay finite") {
  for (double x : {-800.0, -40.0, -1e-9, 1e-12, 40.0, 800.0}) {
    CHECK(std::isfinite(occupancy_entropy_bits(Statistics::Fermi, x)));
    CHECK(occupancy_entropy_bits(Statistics::Fermi, x) >= 0);
  }
  for (double x : {1e-12, 1e-3, 40.0, 800.0}) {
    CHECK(std::isfinite(occupancy_entropy_bits(Statistics::Bose, x)));
  }
}

TEST_CASE("entropy_of_mean") {
  CHECK(entropy_of_mean(Statistics::Fermi, 0.5) == doctest::Approx(1.0));
  CHECK(entropy_of_mean(Statistics::Bose, 1.0) == doctest::Approx(2.0));
  CHECK(entropy_of_mean(Statistics::Fermi, 0.11) == doctest::Approx(oracle::h2(0.11)).epsilon(1e-13));
  CHECK(entropy_of_mean(Statistics::Fermi, 0.11) == doctest::Approx(0.49999).epsilon(1e-4));
  CHECK_THROWS_AS(entropy_of_mean(Statistics::Fermi, 1.5), DomainError);
  CHECK_THROWS_AS(entropy_of_mean(Statistics::Bose, -1.0), DomainError);
}

TEST_CASE("marginal entropy equals Shannon entropy of the emitted pmf") {
  for (const EnsembleSpec& s : {fermi(1, 1), fermi(3, 0.2), bose(1, -0.5), bose(2, -0.1)}) {
    for (std::size_t j = 0; j < 16; ++j) {
      const DistTable t = marginal_pmf(s, j, 16);
      CHECK(oracle::shannon_bits(t.probs()) ==
            doctest::Approx(marginal_entropy(s, j / 16.0)).epsilon(1e-10));
    }
  }
}

TEST_CASE("particle density and entropy rate") {
  CHECK(particle_density(fermi(1, 1)) == doctest::Approx(0.5).epsilon(1e-12));
  const double c = 0.7, mu = 0.2;
  const double e = std::exp(-(c - mu));
  CHECK(particle_density(fermi(1, mu, Dispersion::constant(c))) ==
        doctest::Approx(e / (1 + e)).epsilon(1e-12));
  CHECK(entropy_rate(fermi(1, 0, Dispersion::constant(0))) == doctest::Approx(1.0));
  CHECK(entropy_rate(bose(1, 0, Dispersion::constant(std::numbers::ln2))) == doctest::Approx(2.0));

  const double m_oracle = oracle::riemann([](double y) { return oracle::bose_mean(oracle::cosine_omega(y, -0.5)); });
  CHECK(std::abs(particle_density(bose(1, -0.5)) - m_oracle) < 1e-7);
  const double h_oracle = oracle::riemann([](double y) { return oracle::h2(oracle::fermi_mean(oracle::cosine_omega(y, 1))); });
  CHECK(std::abs(entropy_rate(fermi(1, 1)) - h_oracle) < 1e-7);
}

TEST_CASE("density increases with mu") {
  for (Statistics st : {Statistics::Fermi, Statistics::Bose}) {
    double prev = -1;
    for (int i = 0; i < 50; ++i) {
      const double mu = st == Statistics::Fermi ? -3.0 + 0.12 * i : -3.0 + 0.059 * i;
      const double m = particle_density({st, 1.0, mu, kCos});
      CHECK(m > prev);
      prev = m;
    }
  }
}

TEST_CASE("solve_mu") {
  CHECK(solve_mu(Statistics::Fermi, kCos, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(solve_mu(Statistics::Fermi, Dispersion::constant(0), 1.0, 0.5)) < 1e-8);
  const double mu = solve_mu(Statistics::Bose, kCos, 1.0, 0.25);
  const double m = oracle::riemann([mu](double y) { return oracle::bose_mean(oracle::cosine_omega(y, mu)); });
  CHECK(std::abs(m - 0.25) < 1e-6);
  // round trips
  for (double r : {0.1, 0.3, 0.9}) {
    const double mf = solve_mu(Statistics::Fermi, kCos, 2.0, r);
    CHECK(particle_density(fermi(2.0, mf)) == doctest::Approx(r).epsilon(1e-8));
  }
  CHECK(solve_mu(Statistics::Fermi, kCos, 1.0, particle_density(fermi(1, -0.4))) ==
        doctest::Approx(-0.4).epsilon(1e-7));
  CHECK_THROWS_AS(solve_mu(Statistics::Fermi, kCos, 1.0, 1.2), RangeError);
  CHECK_THROWS_AS(solve_mu(Statistics::Bose, kCos, 1.0, -0.1), RangeError);
}

TEST_CASE("profiles are finite and continuous") {
  const EnsembleSpec s = fermi(1, 1);
  double jump_coarse = 0, jump_fine = 0;
  for (int i = 1; i <= 1000; ++i) {
    jump_coarse = std::max(jump_coarse, std::abs(marginal_mean(s, i / 1000.0) - marginal_mean(s, (i - 1) / 1000.0)));
  }
  for (int i = 1; i <= 10000; ++i) {
    const double v = marginal_mean(s, i / 10000.0);
    CHECK(std::isfinite(v));
    jump_fine = std::max(jump_fine, std::abs(v - marginal_mean(s, (i - 1) / 10000.0)));
  }
  CHECK(jump_fine < jump_coarse);
}

TEST_CASE("partition_intervals") {
  SUBCASE("constant mean gives one interval") {
    const auto p = partition_intervals(fermi(1, 0.2, Dispersion::constant(0.5)), 0.3);
    REQUIRE(p.size() == 1);
    CHECK(p[0].lo == 0.0);
    CHECK(p[0].hi == 1.0);
  }
  SUBCASE("oscillation within budget and half crossings are cuts") {
    const EnsembleSpec s = fermi(1, 1);
    const double budget = oscillation_budget(s, 0.3);
    const auto p = partition_intervals(s, 0.3);
    REQUIRE(!p.empty());
    CHECK(p.front().lo == 0.0);
    CHECK(p.back().hi == 1.0);
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i].lo == p[i - 1].hi);
    for (const auto& iv : p) {
      double lo = 1e9, hi = -1e9;
      for (int k = 0; k <= 10000; ++k) {
        const double y = iv.lo + (iv.hi - iv.lo) * k / 10000.0;
        lo = std::min(lo, marginal_mean(s, y));
        hi = std::max(hi, marginal_mean(s, y));
      }
      CHECK(hi - lo <= budget * (1 + 1e-9));
    }
    // l = 1/2 at y = 1/4 and 3/4
    for (double cross : {0.25, 0.75}) {
      bool found = false;
      for (const auto& iv : p) found = found || std::abs(iv.hi - cross) < 1e-9;
      CHECK(found);
    }
  }
}
