#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <set>

#include "gibbslz/errors.hpp"
#include "gibbslz/lzparse.hpp"
#include "gibbslz/rng.hpp"
#include "gibbslz/sampler.hpp"
#include "oracles.hpp"

using namespace gibbslz;

namespace {
using Str = std::vector<std::uint32_t>;

std::vector<Str> words_of(const Str& s, const LzParse& p) {
  std::vector<Str> out;
  for (const auto& w : p.words) out.emplace_back(s.begin() + w.start, s.begin() + w.start + w.length);
  return out;
}

Str coin_string(std::size_t len, std::uint64_t stream, std::uint32_t alphabet = 2) {
  const CounterRng rng(17, stream);
  Str s(len);
  for (std::size_t i = 0; i < len; ++i) s[i] = static_cast<std::uint32_t>(rng.bits(i) % alphabet);
  return s;
}
}  // namespace

TEST_CASE("hand-traced parses") {
  CHECK(lz78_parse(Str{}).count() == 0);
  const Str zeros(10, 0);
  const LzParse z = lz78_parse(zeros);
  CHECK(z.count() == 4);
  std::vector<std::size_t> lens;
  for (const auto& w : z.words) lens.push_back(w.length);
  CHECK(lens == std::vector<std::size_t>{1, 2, 3, 4});

  const Str s{1, 0, 1, 1, 0, 1, 0};
  const auto w = words_of(s, lz78_parse(s));
  REQUIRE(w.size() == 5);
  CHECK(w[0] == Str{1});
  CHECK(w[1] == Str{0});
  CHECK(w[2] == Str{1, 1});
  CHECK(w[3] == Str{0, 1});
  CHECK(w[4] == Str{0});  // trailing repeat still counted
}

TEST_CASE("parse invariants") {
  for (std::uint32_t alphabet : {2u, 3u, 40u}) {
    const Str s = coin_string(5000, alphabet, alphabet);
    const LzParse p = lz78_parse(s);
    CHECK(p.count() == oracle::lz78_words(s));
    std::size_t pos = 0;
    for (const auto& w : p.words) {
      CHECK(w.start == pos);
      pos += w.length;
    }
    CHECK(pos == s.size());
    const auto words = words_of(s, p);
    std::set<Str> seen;
    for (std::size_t r = 0; r < words.size(); ++r) {
      const bool last = r + 1 == words.size();
      if (!last) CHECK(seen.insert(words[r]).second);
      if (words[r].size() > 1) {
        const Str prefix(words[r].begin(), words[r].end() - 1);
        CHECK(seen.count(prefix) == 1);
      }
    }
  }
}

TEST_CASE("relabeling leaves C unchanged") {
  const Str s = coin_string(4000, 9, 5);
  Str t(s.size());
  const std::uint32_t perm[] = {7, 1000000, 3, 0, 42};
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = perm[s[i]];
  CHECK(lz78_parse(s).count() == lz78_parse(t).count());
}

TEST_CASE("large symbols") {
  const Str s{4000000000u, 4000000000u, 7, 4000000000u, 4000000000u};
  CHECK(lz78_parse(s).count() == oracle::lz78_words(s));
}

TEST_CASE("lz_rate") {
  LzParse p;
  p.words.resize(4);
  CHECK(lz_rate(p, 10) == doctest::Approx(4 * std::log2(10.0) / 10));
  CHECK(lz_rate(LzParse{}, 2) == 0);
  CHECK_THROWS_AS(lz_rate(LzParse{}, 1), DomainError);
}

TEST_CASE("all-zeros rate vanishes") {
  double prev = 1e9;
  for (std::size_t len : {1000, 10000, 100000}) {
    const Str z(len, 0);
    const LzParse p = lz78_parse(z);
    CHECK(std::abs(double(p.count()) - std::sqrt(2.0 * len)) < 3);
    const double r = lz_rate(p, len);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("fair coin rate decreases toward 1 bit") {
  // LZ78 converges slowly: the overshoot at 2^16 is still ~45%.
  double prev = 1e9;
  for (std::size_t len : {1u << 10, 1u << 13, 1u << 16}) {
    double acc = 0;
    for (int r = 0; r < 20; ++r) acc += lz_rate(lz78_parse(coin_string(len, 100 + r)), len);
    const double mean = acc / 20;
    CHECK(mean > 1.0);
    CHECK(mean < prev);
    prev = mean;
  }
}

TEST_CASE("word ensemble entropy") {
  const Str s{1, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0};
  const LzParse p = lz78_parse(s);
  const std::vector<double> ones(s.size(), 1.0);
  const auto e1 = word_ensemble_entropy(p, ones);
  for (std::size_t r = 0; r < e1.size(); ++r) CHECK(e1[r] == double(p.words[r].length));

  const EnsembleSpec spec{Statistics::Fermi, 1, 1, Dispersion::cosine_lattice()};
  const auto e = word_ensemble_entropy(p, spec, s.size());
  double total = 0;
  for (std::size_t r = 0; r < e.size(); ++r) {
    double direct = 0;
    for (std::size_t u = p.words[r].start; u < p.words[r].start + p.words[r].length; ++u) {
      direct += oracle::h2(oracle::fermi_mean(oracle::cosine_omega(double(u) / s.size(), 1)));
    }
    CHECK(e[r] == doctest::Approx(direct).epsilon(1e-12));
    total += e[r];
  }
  double sites = 0;
  for (std::size_t j = 0; j < s.size(); ++j) sites += marginal_entropy(spec, double(j) / s.size());
  CHECK(std::abs(total - sites) < 1e-9);
}

TEST_CASE("typical membership") {
  const EnsembleSpec half{Statistics::Fermi, 1, 0, Dispersion::constant(0)};
  const TypicalParams tp = make_typical_params(half, 0.3);
  CHECK(tp.epsilon_prime < 0.5);
  CHECK(tp.epsilon_prime > 0);
  const Str zeros(20, 0), ones(20, 1);
  CHECK(typical_membership(zeros, 0, 20, tp, half));
  CHECK_FALSE(typical_membership(ones, 0, 20, tp, half));
  CHECK_THROWS_AS(typical_membership(zeros, 15, 10, tp, half), DomainError);

  TypicalParams abs = tp;
  abs.deviation = Deviation::Absolute;
  CHECK_FALSE(typical_membership(zeros, 0, 20, abs, half));
}

TEST_CASE("typical windows are frequent (fourth-moment bound)") {
  const EnsembleSpec spec{Statistics::Fermi, 1, 1, Dispersion::cosine_lattice()};
  const std::size_t len = 20000, window = 100;
  const TypicalParams tp = make_typical_params(spec, 0.3);
  const auto l = mean_profile(spec, len);
  double b = 0;
  for (double p : l) b = std::max(b, p * (1 - p) * (1 - 3 * p * (1 - p)));
  const double bound = 1 - 3 * b / (double(window * window) * std::pow(tp.epsilon_prime, 4));
  std::size_t members = 0, total = 0;
  for (int r = 0; r < 5; ++r) {
    const auto s = sample_grand(spec, len, 8, r);
    for (std::size_t j = 0; j + window <= len; j += window) {
      members += typical_membership(s.values, j, window, tp, l);
      ++total;
    }
  }
  CHECK(double(members) / total >= bound);
}

TEST_CASE("classify_words") {
  const EnsembleSpec spec{Statistics::Fermi, 1, 1, Dispersion::cosine_lattice()};
  const TypicalParams tp = make_typical_params(spec, 0.3);
  // at l = 8 the entropy threshold is 0.7 * 3 = 2.1 bits; a single-site word can fall below
  const Str s{1, 1, 0, 1, 0, 0, 1, 1};
  const LzParse p = lz78_parse(s);
  const WordClasses c = classify_words(p, s, spec, tp);
  CHECK(c.low_entropy_typical + c.non_typical + c.other == p.count());

  // entropies all above the threshold give no low-entropy words
  const std::vector<double> g(s.size(), 5.0), l(s.size(), 0.5);
  const WordClasses hi = classify_words(p, s, l, g, tp);
  CHECK(hi.low_entropy_typical == 0);
}
