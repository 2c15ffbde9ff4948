#pragma once

// Exact sampler for independent sites conditioned on their total, for
// instances too large for a full suffix-sum table.
//
// Sites are paired bottom-up into a binary tree; every node stores the pmf of
// the partial sum over its sites (linear scale, max normalised, trimmed where
// it falls below kTrim of the max and capped at the target). A draw walks the
// tree top-down, splitting the node total t between the children with
// probability proportional to P_L(a) P_R(t - a).
//
// Before building, all marginals are tilted by exp(theta k) with theta chosen
// so the tilted mean total is the target. The conditioned law does not depend
// on theta, and the tilt keeps the target in the bulk of every node pmf.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gibbslz/disttab.hpp"
#include "gibbslz/rng.hpp"

namespace gibbslz {

class SplitTree {
 public:
  static constexpr double kTrim = 1e-280;

  // Parallel build: nodes of one level are convolved concurrently.
  static SplitTree build(std::span<const DistTable> marginals, std::size_t n);
  // Serial reference build; produces identical tables.
  static SplitTree build_serial(std::span<const DistTable> marginals, std::size_t n);

  std::size_t length() const { return length_; }
  std::size_t target() const { return n_; }
  double tilt() const { return theta_; }

  // Writes one conditioned configuration into out (size length()).
  void sample(const CounterRng& rng, std::span<std::uint32_t> out) const;

  struct Node {
    std::size_t lo = 0;     // smallest represented partial sum
    std::vector<double> w;  // relative weight of partial sum lo + i
    bool operator==(const Node&) const = default;
  };
  const std::vector<std::vector<Node>>& levels() const { return levels_; }

 private:
  static SplitTree build_impl(std::span<const DistTable> marginals, std::size_t n,
                              bool parallel);

  std::size_t length_ = 0;
  std::size_t n_ = 0;
  double theta_ = 0.0;
  // Degenerate targets (0 or the joint maximum) fix every site.
  std::vector<std::uint32_t> forced_;
  std::vector<std::vector<Node>> levels_;  // levels_[0] = leaves
};

// theta with sum_i E_theta K_i = n, for 0 < n < sum of support maxima.
double solve_tilt(std::span<const DistTable> marginals, std::size_t n);

}  // namespace gibbslz
