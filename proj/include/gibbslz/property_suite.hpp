#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "gibbslz/config.hpp"
#include "gibbslz/disttab.hpp"
#include "gibbslz/ensemble.hpp"
#include "gibbslz/lzparse.hpp"
#include "gibbslz/sampler.hpp"

namespace gibbslz {

// Ratio sup_error / L_n allowed by the local CLT property.
inline constexpr double kLocalCltRatioBound = 1.0;

struct PropertyResult {
  std::string name;
  bool passed = false;
  double metric = 0;  // worst observed value of the checked quantity
  std::string detail;
};

struct PropertyReport {
  std::string config_hash;
  std::vector<PropertyResult> results;

  bool all_passed() const;
};

PropertyReport run_property_suite(const ExperimentConfig& cfg, int workers = 0);
void write_property_report(std::ostream& os, const PropertyReport& report, OutputFormat fmt);

// Individual batteries; `count` is the number of random instances.
// Every table must pass is_log_concave. The fault injection adds the
// non-LC pmf (0.5, 0.1, 0.4) under an LC label.
PropertyResult check_lc_marginals(const std::vector<DistTable>& tables, bool inject_fault);
PropertyResult check_lc_closure(std::size_t count, std::uint64_t seed);
PropertyResult check_score_ratio(std::size_t count, std::uint64_t seed);
PropertyResult check_efron(std::size_t per_shape, std::uint64_t seed);
PropertyResult check_na_exhaustive(std::size_t per_shape, std::uint64_t seed);
PropertyResult check_na_empirical(const EnsembleSpec& spec, double density, std::size_t draws,
                                  std::uint64_t seed);
PropertyResult check_chebyshev(std::size_t count, std::uint64_t seed);
PropertyResult check_moment_constants(const std::vector<EnsembleSpec>& specs, std::size_t length);
PropertyResult check_bottomley(std::size_t count, std::uint64_t seed);
PropertyResult check_local_clt(const EnsembleSpec& spec, const std::vector<std::size_t>& sizes);
PropertyResult check_conditional_entropy(std::size_t count, std::uint64_t seed);
PropertyResult check_chain_rule(std::size_t count, std::uint64_t seed);
PropertyResult check_sampler_fidelity(std::size_t draws, std::uint64_t seed);
PropertyResult check_canonical_site_marginals(const EnsembleSpec& spec, double density,
                                              std::size_t draws, std::uint64_t seed);
PropertyResult check_grand_density(const EnsembleSpec& spec, std::size_t length,
                                   std::uint64_t seed);

// Word-class counts over a grid of lengths (canonical strings).
struct TypicalCountStudy {
  std::vector<std::size_t> lengths;
  std::vector<double> mean_low_entropy_typical;
  std::vector<double> mean_non_typical_fraction;
  double slope = 0;  // log-log growth exponent of the low-entropy typical counts
};

TypicalCountStudy typical_count_study(const EnsembleSpec& spec, double density,
                                      const TypicalParams& params,
                                      const std::vector<std::size_t>& lengths,
                                      std::size_t replicas, std::uint64_t seed, int workers = 0);
PropertyResult check_typical_counts(const TypicalCountStudy& study, double epsilon,
                                    std::size_t fraction_length);

// Total variation between the empirical law of canonical draws and the exact
// conditioned law (enumerated). Small l only.
double canonical_tv_distance(const std::vector<DistTable>& marginals, std::size_t n,
                             std::size_t draws, std::uint64_t seed);

// Random table with log-concave pmf and support {0..size-1}.
DistTable random_lc_table(std::uint64_t& state, std::size_t size);

}  // namespace gibbslz
