#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gibbslz/disttab.hpp"
#include "gibbslz/ensemble.hpp"
#include "gibbslz/rng.hpp"
#include "gibbslz/split_tree.hpp"
#include "gibbslz/suffix_dp.hpp"

namespace gibbslz {

enum class EnsembleKind { Grand, Canonical };

std::string to_string(EnsembleKind k);

struct Provenance {
  std::string spec_id;
  EnsembleKind kind = EnsembleKind::Grand;
  std::optional<std::size_t> n;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
};

struct OccupancyString {
  std::vector<std::uint32_t> values;
  Provenance provenance;

  std::size_t length() const { return values.size(); }
};

struct ParticleTarget {
  double r = 0.5;
};

// n = round(r * l), halves rounded away from zero.
std::size_t choose_n(const ParticleTarget& target, std::size_t length);

// Short identifier of the ensemble parameters, e.g. "fermi|beta=1|mu=1|cosine".
std::string spec_identifier(const EnsembleSpec& spec);

// Law of K_j for a string of length l: eigenvalue kappa = omega_mu(j / l).
// Bose tables are truncated with tail mass below tail_tol.
DistTable marginal_pmf(const EnsembleSpec& spec, std::size_t j, std::size_t length,
                       double tail_tol = kDefaultTailTol);
std::vector<DistTable> site_marginals(const EnsembleSpec& spec, std::size_t length,
                                      double tail_tol = kDefaultTailTol);

// Independent sites; one uniform per site.
class GrandSampler {
 public:
  GrandSampler(const EnsembleSpec& spec, std::size_t length);

  std::size_t length() const { return cdfs_.size(); }
  const std::vector<DistTable>& marginals() const { return marginals_; }
  OccupancyString sample(std::uint64_t seed, std::uint64_t replica) const;

 private:
  std::string spec_id_;
  std::vector<DistTable> marginals_;
  std::vector<std::vector<double>> cdfs_;
};

// Sites conditioned on their total. Uses the suffix-sum table when
// (l + 1)(n + 1) <= kDpCells, otherwise the split tree. Both are exact.
class CanonicalSampler {
 public:
  static constexpr std::size_t kDpCells = std::size_t{1} << 22;

  CanonicalSampler(const EnsembleSpec& spec, std::size_t length, std::size_t n);
  CanonicalSampler(std::vector<DistTable> marginals, std::size_t n, std::string spec_id = {});

  std::size_t length() const { return length_; }
  std::size_t target() const { return n_; }
  bool uses_suffix_dp() const { return std::holds_alternative<SuffixSumDP>(engine_); }
  // Largest truncation tail among the marginals (zero for Fermi).
  double truncation_tail() const { return tail_; }

  OccupancyString sample(std::uint64_t seed, std::uint64_t replica) const;

 private:
  std::string spec_id_;
  std::size_t length_ = 0;
  std::size_t n_ = 0;
  double tail_ = 0.0;
  std::variant<SuffixSumDP, SplitTree> engine_;
};

// Sequential draw from the remaining-sum chain of a suffix-sum table.
std::vector<std::uint32_t> sample_from_suffix_dp(const SuffixSumDP& dp, const CounterRng& rng);

OccupancyString sample_grand(const EnsembleSpec& spec, std::size_t length, std::uint64_t seed,
                             std::uint64_t replica = 0);
// Throws ImpossibleCondition when P(S = n) = 0 (e.g. Fermi with n > l).
OccupancyString sample_canonical(const EnsembleSpec& spec, std::size_t length, std::size_t n,
                                 std::uint64_t seed, std::uint64_t replica = 0);

}  // namespace gibbslz
