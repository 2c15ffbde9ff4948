#pragma once

// LZ78 incremental parsing over an unbounded integer alphabet. Each word is
// the shortest prefix of the remaining input that is not yet a dictionary
// word; a trailing word that repeats a dictionary entry is still counted.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "gibbslz/ensemble.hpp"

namespace gibbslz {

struct LzWord {
  std::size_t start = 0;   // t(r)
  std::size_t length = 0;  // s(r)
};

struct LzParse {
  std::vector<LzWord> words;
  std::size_t dictionary_size = 0;  // distinct words inserted

  std::size_t count() const { return words.size(); }
  // length -> number of words
  std::map<std::size_t, std::size_t> length_histogram() const;
};

LzParse lz78_parse(std::span<const std::uint32_t> symbols);

// (log2 l / l) * C. Requires l >= 2.
double lz_rate(const LzParse& parse, std::size_t length);

// Per-word ensemble entropy E(r) = sum over the word's sites of g(u / l).
std::vector<double> word_ensemble_entropy(const LzParse& parse, const EnsembleSpec& spec,
                                          std::size_t length);
// Same, from a precomputed profile g(u / l), u < l.
std::vector<double> word_ensemble_entropy(const LzParse& parse, std::span<const double> g_profile);

enum class Deviation { OneSided, Absolute };

struct TypicalParams {
  double epsilon = 0.3;
  double epsilon_prime = 0;  // epsilon * e_L / (2L)
  double sup_mean = 0;       // L
  Deviation deviation = Deviation::OneSided;
};

TypicalParams make_typical_params(const EnsembleSpec& spec, double epsilon,
                                  Deviation deviation = Deviation::OneSided);

// sum_{i=j}^{j+M-1} (k_i - l(i / l)) <= M epsilon' (absolute value of the sum
// in the Absolute variant). Throws DomainError when j + M > l.
bool typical_membership(std::span<const std::uint32_t> symbols, std::size_t j, std::size_t window,
                        const TypicalParams& params, std::span<const double> l_profile);
bool typical_membership(std::span<const std::uint32_t> symbols, std::size_t j, std::size_t window,
                        const TypicalParams& params, const EnsembleSpec& spec);

struct WordClasses {
  std::size_t low_entropy_typical = 0;  // E(r) <= (1 - eps) log2 l and typical
  std::size_t non_typical = 0;
  std::size_t other = 0;  // typical, higher entropy
};

WordClasses classify_words(const LzParse& parse, std::span<const std::uint32_t> symbols,
                           std::span<const double> l_profile, std::span<const double> g_profile,
                           const TypicalParams& params);
WordClasses classify_words(const LzParse& parse, std::span<const std::uint32_t> symbols,
                           const EnsembleSpec& spec, const TypicalParams& params);

// l(j / len) and g(j / len) for j < len.
std::vector<double> mean_profile(const EnsembleSpec& spec, std::size_t length);
std::vector<double> entropy_profile(const EnsembleSpec& spec, std::size_t length);

}  // namespace gibbslz
