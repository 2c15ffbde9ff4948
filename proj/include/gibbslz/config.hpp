#pragma once

// Flat key-value experiment configuration:
//
//   # comment
//   ensemble.stats = fermi
//   ensemble.beta = 1
//   ensemble.density = 0.5        # or ensemble.mu = 1 (exactly one of the two)
//   run.lengths = 1024, 4096, 2^14
//
// Unknown keys and malformed values raise ConfigError.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gibbslz/ensemble.hpp"
#include "gibbslz/lzparse.hpp"

namespace gibbslz {

enum class RunKind { Grand, Canonical, Both };
enum class OutputFormat { Csv, Jsonl };

struct ExperimentConfig {
  // ensemble
  Statistics stats = Statistics::Fermi;
  double beta = 1.0;
  Dispersion dispersion = Dispersion::cosine_lattice();
  std::optional<double> mu;
  std::optional<double> density;

  // run
  std::vector<std::size_t> lengths{1024, 4096, 16384, 65536};
  std::size_t replicas = 20;
  std::uint64_t seed = 1;
  RunKind kind = RunKind::Canonical;

  // analysis
  double epsilon = 0.3;
  double quad_tol = kDefaultQuadTol;
  std::string out_dir = ".";
  OutputFormat format = OutputFormat::Csv;
  Deviation typical = Deviation::OneSided;
  bool entropy_gap = false;  // add delta / l to converge rows when within budget
  double gap_budget = 5e7;   // max l * n * K_max for exact entropy gaps

  // check
  double check_scale = 1.0;
  std::string inject_fault = "none";

  // effective key/value pairs, used for hashing
  std::map<std::string, std::string> entries;
};

ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

// FNV-1a over the sorted entries, excluding output location and format.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string config_hash_hex(const ExperimentConfig& cfg);

// EnsembleSpec with mu given directly or solved from the density.
EnsembleSpec resolve_ensemble(const ExperimentConfig& cfg);
// r: the configured density, or the density implied by mu.
double target_density(const ExperimentConfig& cfg, const EnsembleSpec& spec);

std::string to_string(RunKind k);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace gibbslz
