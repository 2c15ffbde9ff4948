#include "gibbslz/lzparse.hpp"

#include <cmath>
#include <unordered_map>

#include "gibbslz/errors.hpp"

namespace gibbslz {

std::map<std::size_t, std::size_t> LzParse::length_histogram() const {
  std::map<std::size_t, std::size_t> h;
  for (const auto& w : words) ++h[w.length];
  return h;
}

LzParse lz78_parse(std::span<const std::uint32_t> symbols) {
  // trie edges keyed by (node, symbol); node 0 is the empty word
  std::unordered_map<std::uint64_t, std::uint32_t> children;
  children.reserve(symbols.size() / 4 + 16);
  std::uint32_t nodes = 1;

  LzParse out;
  std::size_t start = 0;
  std::uint32_t node = 0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const std::uint64_t key = (static_cast<std::uint64_t>(node) << 32) | symbols[i];
    const auto it = children.find(key);
    if (it != children.end()) {
      node = it->second;
      continue;
    }
    children.emplace(key, nodes++);
    out.words.push_back({start, i + 1 - start});
    start = i + 1;
    node = 0;
  }
  if (start < symbols.size()) out.words.push_back({start, symbols.size() - start});
  out.dictionary_size = nodes - 1;
  return out;
}

double lz_rate(const LzParse& parse, std::size_t length) {
  if (length < 2) throw DomainError("lz_rate needs a string of length >= 2");
  const double l = static_cast<double>(length);
  return std::log2(l) / l * static_cast<double>(parse.count());
}

std::vector<double> mean_profile(const EnsembleSpec& spec, std::size_t length) {
  std::vector<double> out(length);
  for (std::size_t j = 0; j < length; ++j) {
    out[j] = marginal_mean(spec, static_cast<double>(j) / static_cast<double>(length));
  }
  return out;
}

std::vector<double> entropy_profile(const EnsembleSpec& spec, std::size_t length) {
  std::vector<double> out(length);
  for (std::size_t j = 0; j < length; ++j) {
    out[j] = marginal_entropy(spec, static_cast<double>(j) / static_cast<double>(length));
  }
  return out;
}

std::vector<double> word_ensemble_entropy(const LzParse& parse,
                                          std::span<const double> g_profile) {
  std::vector<double> out;
  out.reserve(parse.count());
  for (const auto& w : parse.words) {
    if (w.start + w.length > g_profile.size()) throw DomainError("word beyond entropy profile");
    double e = 0.0;
    for (std::size_t u = w.start; u < w.start + w.length; ++u) e += g_profile[u];
    out.push_back(e);
  }
  return out;
}

std::vector<double> word_ensemble_entropy(const LzParse& parse, const EnsembleSpec& spec,
                                          std::size_t length) {
  return word_ensemble_entropy(parse, entropy_profile(spec, length));
}

TypicalParams make_typical_params(const EnsembleSpec& spec, double epsilon,
                                  Deviation deviation) {
  TypicalParams p;
  p.epsilon = epsilon;
  p.sup_mean = sup_mean(spec);
  p.epsilon_prime = oscillation_budget(spec, epsilon);
  p.deviation = deviation;
  return p;
}

bool typical_membership(std::span<const std::uint32_t> symbols, std::size_t j, std::size_t window,
                        const TypicalParams& params, std::span<const double> l_profile) {
  if (j + window > symbols.size() || j + window > l_profile.size()) {
    throw DomainError("typical window out of bounds");
  }
  double dev = 0.0;
  for (std::size_t i = j; i < j + window; ++i) dev += static_cast<double>(symbols[i]) - l_profile[i];
  if (params.deviation == Deviation::Absolute) dev = std::abs(dev);
  return dev <= static_cast<double>(window) * params.epsilon_prime;
}

bool typical_membership(std::span<const std::uint32_t> symbols, std::size_t j, std::size_t window,
                        const TypicalParams& params, const EnsembleSpec& spec) {
  return typical_membership(symbols, j, window, params, mean_profile(spec, symbols.size()));
}

WordClasses classify_words(const LzParse& parse, std::span<const std::uint32_t> symbols,
                           std::span<const double> l_profile, std::span<const double> g_profile,
                           const TypicalParams& params) {
  const double threshold = (1.0 - params.epsilon) * std::log2(static_cast<double>(symbols.size()));
  const std::vector<double> e = word_ensemble_entropy(parse, g_profile);
  WordClasses out;
  for (std::size_t r = 0; r < parse.count(); ++r) {
    const auto& w = parse.words[r];
    if (!typical_membership(symbols, w.start, w.length, params, l_profile)) {
      ++out.non_typical;
    } else if (e[r] <= threshold) {
      ++out.low_entropy_typical;
    } else {
      ++out.other;
    }
  }
  return out;
}

WordClasses classify_words(const LzParse& parse, std::span<const std::uint32_t> symbols,
                           const EnsembleSpec& spec, const TypicalParams& params) {
  return classify_words(parse, symbols, mean_profile(spec, symbols.size()),
                        entropy_profile(spec, symbols.size()), params);
}

}  // namespace gibbslz
