#pragma once

// Experiment drivers behind the command-line tool. Replicas fan out over an
// OpenMP worker pool; results are gathered by (kind, l, replica) so output is
// independent of the number of workers.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gibbslz/config.hpp"
#include "gibbslz/ensemble.hpp"
#include "gibbslz/sampler.hpp"

namespace gibbslz {

struct ResultRow {
  EnsembleKind kind = EnsembleKind::Canonical;
  std::size_t length = 0;
  std::size_t n = 0;
  std::size_t replica = 0;
  std::size_t words = 0;  // C
  double lz_rate = 0;
  double h_target = 0;
  std::optional<double> entropy_gap_per_site;
  std::size_t low_entropy_typical = 0;
  std::size_t non_typical = 0;
  std::size_t other = 0;
  double wall_seconds = 0;  // reported separately; not part of the deterministic output
};

struct ErrorRow {
  EnsembleKind kind = EnsembleKind::Canonical;
  std::size_t length = 0;
  std::size_t n = 0;
  std::string message;
};

struct LengthSummary {
  EnsembleKind kind = EnsembleKind::Canonical;
  std::size_t length = 0;
  std::size_t n = 0;
  std::size_t replicas = 0;
  double mean_rate = 0;
  double std_error = 0;
  double h_target = 0;
  double rel_deviation = 0;  // (mean - h) / h
  double mean_words = 0;
  double mean_low_entropy_typical = 0;
  double mean_non_typical_fraction = 0;
};

struct KindComparison {
  std::size_t length = 0;
  double grand_mean = 0;
  double canonical_mean = 0;
  double pooled_se = 0;
  bool flagged = false;  // |difference| > 3 pooled SE
};

struct ConvergeResult {
  std::string config_hash;
  EnsembleSpec spec;
  double density = 0;
  double h_target = 0;
  std::vector<ResultRow> rows;
  std::vector<ErrorRow> errors;
  std::vector<LengthSummary> summaries;
  std::vector<KindComparison> comparisons;
};

// workers = 0 uses the OpenMP default.
ConvergeResult run_converge(const ExperimentConfig& cfg, int workers = 0);
// Single-threaded reference; identical output.
ConvergeResult run_converge_serial(const ExperimentConfig& cfg);

// Per-replica work for one (kind, l): sample, parse, classify.
ResultRow run_replica(EnsembleKind kind, const GrandSampler* grand,
                      const CanonicalSampler* canonical, std::span<const double> l_profile,
                      std::span<const double> g_profile, const TypicalParams& typical,
                      std::uint64_t seed, std::size_t replica);

void write_rows(std::ostream& os, const ConvergeResult& r, OutputFormat fmt);
void write_summary(std::ostream& os, const ConvergeResult& r, OutputFormat fmt);
void write_timings(std::ostream& os, const ConvergeResult& r);

struct GapRow {
  std::size_t length = 0;
  std::size_t n = 0;
  std::optional<double> delta;  // absent when skipped or failed
  std::string status = "ok";
};

struct EntropyGapResult {
  std::string config_hash;
  std::vector<GapRow> rows;
};

EntropyGapResult run_entropy_gap(const ExperimentConfig& cfg);
void write_entropy_gap(std::ostream& os, const EntropyGapResult& r, OutputFormat fmt);

// Mean and standard error of a sample.
struct MeanSe {
  double mean = 0;
  double se = 0;
};
MeanSe mean_and_se(std::span<const double> xs);

// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace gibbslz
