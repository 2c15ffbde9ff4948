#include "gibbslz/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "gibbslz/errors.hpp"

namespace gibbslz {

namespace {

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(EnsembleKind k) {
  return k == EnsembleKind::Grand ? "grand" : "canonical";
}

std::size_t choose_n(const ParticleTarget& target, std::size_t length) {
  if (!(target.r > 0) || !std::isfinite(target.r)) throw DomainError("density must be positive");
  return static_cast<std::size_t>(std::llround(target.r * static_cast<double>(length)));
}

std::string spec_identifier(const EnsembleSpec& spec) {
  std::string id = to_string(spec.stats) + "|beta=" + shortest(spec.beta) +
                   "|mu=" + shortest(spec.mu) + "|";
  if (spec.dispersion.form() == Dispersion::Form::CosineLattice) return id + "cosine";
  return id + "grid" + std::to_string(spec.dispersion.grid().size());
}

DistTable marginal_pmf(const EnsembleSpec& spec, std::size_t j, std::size_t length,
                       double tail_tol) {
  if (j >= length) throw DomainError("site index out of range");
  spec.validate();
  const double y = static_cast<double>(j) / static_cast<double>(length);
  const double x = spec.beta * eval_dispersion(spec, y);
  if (spec.stats == Statistics::Fermi) {
    // P(1) = e^{-x} / (1 + e^{-x})
    const double lp0 = x > 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
    const double lp1 = x > 0 ? -x - std::log1p(std::exp(-x)) : -std::log1p(std::exp(x));
    return DistTable::unchecked({lp0, lp1});
  }
  if (!(x > 0)) throw InvalidEnsemble("Bose eigenvalue must be positive");
  return DistTable::geometric(std::exp(-x), tail_tol);
}

std::vector<DistTable> site_marginals(const EnsembleSpec& spec, std::size_t length,
                                      double tail_tol) {
  std::vector<DistTable> out;
  out.reserve(length);
  for (std::size_t j = 0; j < length; ++j) out.push_back(marginal_pmf(spec, j, length, tail_tol));
  return out;
}

GrandSampler::GrandSampler(const EnsembleSpec& spec, std::size_t length)
    : spec_id_(spec_identifier(spec)), marginals_(site_marginals(spec, length)) {
  cdfs_.reserve(length);
  for (const auto& m : marginals_) {
    std::vector<double> cdf = m.probs();
    for (std::size_t k = 1; k < cdf.size(); ++k) cdf[k] += cdf[k - 1];
    cdfs_.push_back(std::move(cdf));
  }
}

OccupancyString GrandSampler::sample(std::uint64_t seed, std::uint64_t replica) const {
  const CounterRng rng(seed, replica_stream(replica, length()));
  OccupancyString out;
  out.values.resize(length());
  for (std::size_t j = 0; j < length(); ++j) {
    const auto& cdf = cdfs_[j];
    const double u = rng.uniform(j);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // u beyond the truncated mass lands on the last entry
    out.values[j] = static_cast<std::uint32_t>(
        it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin()));
  }
  out.provenance = {spec_id_, EnsembleKind::Grand, std::nullopt, seed, replica};
  return out;
}

std::vector<std::uint32_t> sample_from_suffix_dp(const SuffixSumDP& dp, const CounterRng& rng) {
  std::vector<std::uint32_t> out(dp.length());
  std::size_t s = dp.target();
  for (std::size_t j = 0; j < dp.length(); ++j) {
    const double u = rng.uniform(j);
    const std::size_t kmax = std::min(s, dp.marginals()[j].support_max());
    double acc = 0.0;
    std::size_t pick = kmax + 1;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k <= kmax; ++k) {
      const double lq = dp.log_step(j, s, k);
      if (lq == kNegInf) continue;
      last_positive = k;
      acc += std::exp(lq);
      if (u < acc) {
        pick = k;
        break;
      }
    }
    if (pick > kmax) pick = last_positive;  // rounding left u above the final cumulative sum
    out[j] = static_cast<std::uint32_t>(pick);
    s -= pick;
  }
  if (s != 0) throw NumericError("suffix DP sampler did not exhaust the target");
  return out;
}

CanonicalSampler::CanonicalSampler(const EnsembleSpec& spec, std::size_t length, std::size_t n)
    : CanonicalSampler(site_marginals(spec, length), n, spec_identifier(spec)) {}

namespace {

std::variant<SuffixSumDP, SplitTree> make_engine(const std::vector<DistTable>& marginals,
                                                 std::size_t n) {
  if ((marginals.size() + 1) * (n + 1) <= CanonicalSampler::kDpCells) {
    return build_suffix_dp(marginals, n);
  }
  return SplitTree::build(marginals, n);
}

}  // namespace

CanonicalSampler::CanonicalSampler(std::vector<DistTable> marginals, std::size_t n,
                                   std::string spec_id)
    : spec_id_(std::move(spec_id)),
      length_(marginals.size()),
      n_(n),
      engine_(make_engine(marginals, n)) {
  for (const auto& m : marginals) tail_ = std::max(tail_, m.tail_mass());
}

OccupancyString CanonicalSampler::sample(std::uint64_t seed, std::uint64_t replica) const {
  const CounterRng rng(seed, replica_stream(replica, length_));
  OccupancyString out;
  if (const auto* dp = std::get_if<SuffixSumDP>(&engine_)) {
    out.values = sample_from_suffix_dp(*dp, rng);
  } else {
    out.values.resize(length_);
    std::get<SplitTree>(engine_).sample(rng, out.values);
  }
  std::size_t total = 0;
  for (auto v : out.values) total += v;
  if (total != n_) throw NumericError("canonical sample does not carry n particles");
  out.provenance = {spec_id_, EnsembleKind::Canonical, n_, seed, replica};
  return out;
}

OccupancyString sample_grand(const EnsembleSpec& spec, std::size_t length, std::uint64_t seed,
                             std::uint64_t replica) {
  return GrandSampler(spec, length).sample(seed, replica);
}

OccupancyString sample_canonical(const EnsembleSpec& spec, std::size_t length, std::size_t n,
                                 std::uint64_t seed, std::uint64_t replica) {
  if (spec.stats == Statistics::Fermi && n > length) {
    throw ImpossibleCondition("Fermi string cannot hold more than one particle per site");
  }
  return CanonicalSampler(spec, length, n).sample(seed, replica);
}

}  // namespace gibbslz
