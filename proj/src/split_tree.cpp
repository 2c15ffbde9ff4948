#include "gibbslz/split_tree.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "gibbslz/errors.hpp"

namespace gibbslz {

namespace {

struct TiltMoments {
  double mean = 0;
  double var = 0;
};

TiltMoments tilted_moments(std::span<const DistTable> marginals, double theta) {
  TiltMoments out;
  for (const auto& m : marginals) {
    const auto& lp = m.log_probs();
    double peak = kNegInf;
    for (std::size_t k = 0; k < lp.size(); ++k) {
      peak = std::max(peak, lp[k] + theta * static_cast<double>(k));
    }
    double z = 0, s1 = 0, s2 = 0;
    for (std::size_t k = 0; k < lp.size(); ++k) {
      const double w = std::exp(lp[k] + theta * static_cast<double>(k) - peak);
      const double kd = static_cast<double>(k);
      z += w;
      s1 += w * kd;
      s2 += w * kd * kd;
    }
    const double mean = s1 / z;
    out.mean += mean;
    out.var += std::max(0.0, s2 / z - mean * mean);
  }
  return out;
}

SplitTree::Node combine(const SplitTree::Node& a, const SplitTree::Node& b, std::size_t cap) {
  SplitTree::Node out;
  out.lo = a.lo + b.lo;
  const std::size_t hi = std::min(a.lo + a.w.size() + b.lo + b.w.size() - 2, cap);
  if (hi < out.lo) throw ImpossibleCondition("split tree: partial sums exceed the target");
  out.w.assign(hi - out.lo + 1, 0.0);
  for (std::size_t i = 0; i < a.w.size() && i < out.w.size(); ++i) {
    const double wa = a.w[i];
    if (wa == 0.0) continue;
    const std::size_t limit = std::min(b.w.size(), out.w.size() - i);
    double* dst = out.w.data() + i;
    for (std::size_t k = 0; k < limit; ++k) dst[k] += wa * b.w[k];
  }
  const double peak = *std::max_element(out.w.begin(), out.w.end());
  std::size_t first = 0;
  std::size_t last = out.w.size();
  while (first < last && out.w[first] < peak * SplitTree::kTrim) ++first;
  while (last > first && out.w[last - 1] < peak * SplitTree::kTrim) --last;
  std::vector<double> trimmed(out.w.begin() + first, out.w.begin() + last);
  for (double& v : trimmed) v /= peak;
  out.w = std::move(trimmed);
  out.lo += first;
  return out;
}

}  // namespace

double solve_tilt(std::span<const DistTable> marginals, std::size_t n) {
  const double target = static_cast<double>(n);
  double lo = -1.0;
  double hi = 1.0;
  while (tilted_moments(marginals, lo).mean > target) {
    lo *= 2.0;
    if (lo < -1e6) throw NumericError("tilt bracket expansion failed");
  }
  while (tilted_moments(marginals, hi).mean < target) {
    hi *= 2.0;
    if (hi > 1e6) throw NumericError("tilt bracket expansion failed");
  }
  // safeguarded Newton; a tilt within a fraction of a standard deviation is enough
  double theta = 0.0;
  if (theta <= lo || theta >= hi) theta = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const TiltMoments m = tilted_moments(marginals, theta);
    const double f = m.mean - target;
    if (std::abs(f) <= 0.01 * std::sqrt(m.var) + 1e-9) break;
    (f < 0 ? lo : hi) = theta;
    double next = m.var > 0 ? theta - f / m.var : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    theta = next;
  }
  return theta;
}

SplitTree SplitTree::build(std::span<const DistTable> marginals, std::size_t n) {
  return build_impl(marginals, n, true);
}

SplitTree SplitTree::build_serial(std::span<const DistTable> marginals, std::size_t n) {
  return build_impl(marginals, n, false);
}

SplitTree SplitTree::build_impl(std::span<const DistTable> marginals, std::size_t n,
                                bool parallel) {
  SplitTree tree;
  tree.length_ = marginals.size();
  tree.n_ = n;
  if (marginals.empty()) {
    if (n != 0) throw ImpossibleCondition("empty string cannot carry particles");
    return tree;
  }

  std::size_t reach = 0;
  for (const auto& m : marginals) reach += std::min(m.support_max(), n);
  if (n > reach) throw ImpossibleCondition("target sum exceeds the joint support");
  if (n == 0 || n == reach) {
    tree.forced_.resize(marginals.size());
    for (std::size_t i = 0; i < marginals.size(); ++i) {
      const std::size_t k = n == 0 ? 0 : std::min(marginals[i].support_max(), n);
      if (marginals[i].log_prob(k) == kNegInf) throw ImpossibleCondition("P(S = n) = 0");
      tree.forced_[i] = static_cast<std::uint32_t>(k);
    }
    return tree;
  }

  std::vector<DistTable> capped;
  capped.reserve(marginals.size());
  for (const auto& m : marginals) {
    capped.push_back(m.support_max() > n ? m.truncated(n) : m);
  }
  tree.theta_ = solve_tilt(capped, n);

  std::vector<Node> leaves(capped.size());
  for (std::size_t i = 0; i < capped.size(); ++i) {
    const auto& lp = capped[i].log_probs();
    std::vector<double> tl(lp.size());
    double peak = kNegInf;
    for (std::size_t k = 0; k < lp.size(); ++k) {
      tl[k] = lp[k] + tree.theta_ * static_cast<double>(k);
      peak = std::max(peak, tl[k]);
    }
    Node leaf;
    leaf.w.resize(lp.size());
    for (std::size_t k = 0; k < lp.size(); ++k) leaf.w[k] = std::exp(tl[k] - peak);
    std::size_t first = 0;
    while (first + 1 < leaf.w.size() && leaf.w[first] == 0.0) ++first;
    std::size_t last = leaf.w.size();
    while (last > first + 1 && leaf.w[last - 1] == 0.0) --last;
    leaf.lo = first;
    leaf.w = std::vector<double>(leaf.w.begin() + first, leaf.w.begin() + last);
    leaves[i] = std::move(leaf);
  }
  tree.levels_.push_back(std::move(leaves));

  while (tree.levels_.back().size() > 1) {
    const auto& below = tree.levels_.back();
    const std::size_t count = (below.size() + 1) / 2;
    std::vector<Node> level(count);
    std::vector<std::exception_ptr> failures(count);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::size_t i = 0; i < count; ++i) {
      try {
        if (2 * i + 1 < below.size()) {
          level[i] = combine(below[2 * i], below[2 * i + 1], n);
        } else {
          level[i] = below[2 * i];
        }
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
    tree.levels_.push_back(std::move(level));
  }

  const Node& root = tree.levels_.back().front();
  if (n < root.lo || n >= root.lo + root.w.size() || root.w[n - root.lo] == 0.0) {
    throw ImpossibleCondition("P(S = n) = 0 (or below double precision)");
  }
  return tree;
}

void SplitTree::sample(const CounterRng& rng, std::span<std::uint32_t> out) const {
  if (out.size() != length_) throw DomainError("output span has wrong length");
  if (!forced_.empty() || length_ == 0) {
    std::copy(forced_.begin(), forced_.end(), out.begin());
    return;
  }
  // targets for the current level, top-down
  std::vector<std::size_t> targets{n_};
  std::vector<std::size_t> next;
  std::uint64_t counter = 0;
  for (std::size_t lv = levels_.size() - 1; lv > 0; --lv) {
    const auto& below = levels_[lv - 1];
    next.assign(below.size(), 0);
    for (std::size_t i = 0; i < targets.size(); ++i, ++counter) {
      const std::size_t t = targets[i];
      if (2 * i + 1 >= below.size()) {
        next[2 * i] = t;
        continue;
      }
      const Node& left = below[2 * i];
      const Node& right = below[2 * i + 1];
      const std::size_t right_hi = right.lo + right.w.size() - 1;
      const std::size_t a_lo = std::max(left.lo, t > right_hi ? t - right_hi : 0);
      const std::size_t a_hi = std::min(left.lo + left.w.size() - 1, t - std::min(t, right.lo));
      if (t < right.lo || a_lo > a_hi) throw NumericError("split tree: empty split range");
      double total = 0.0;
      for (std::size_t a = a_lo; a <= a_hi; ++a) {
        total += left.w[a - left.lo] * right.w[t - a - right.lo];
      }
      if (!(total > 0)) throw NumericError("split tree: zero split weight");
      const double u = rng.uniform(counter) * total;
      double acc = 0.0;
      std::size_t pick = a_hi;
      for (std::size_t a = a_lo; a <= a_hi; ++a) {
        const double w = left.w[a - left.lo] * right.w[t - a - right.lo];
        acc += w;
        if (u < acc && w > 0) {
          pick = a;
          break;
        }
      }
      while (left.w[pick - left.lo] * right.w[t - pick - right.lo] == 0.0) --pick;
      next[2 * i] = pick;
      next[2 * i + 1] = t - pick;
    }
    targets.swap(next);
  }
  for (std::size_t i = 0; i < length_; ++i) out[i] = static_cast<std::uint32_t>(targets[i]);
}

}  // namespace gibbslz
