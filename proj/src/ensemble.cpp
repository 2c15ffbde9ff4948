#include "gibbslz/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "gibbslz/errors.hpp"

namespace gibbslz {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double simpson_panel(const std::function<double(double)>& f, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  if (!std::isfinite(flm) || !std::isfinite(frm)) {
    throw NumericError("quadrature: non-finite integrand");
  }
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  if (depth <= 0) throw NumericError("quadrature: recursion limit reached");
  return simpson_panel(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_panel(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_unit(const EnsembleSpec& spec, const std::function<double(double)>& f,
                      double tol) {
  if (!(tol > 0)) throw DomainError("quadrature tolerance must be positive");
  std::vector<double> knots = spec.dispersion.breakpoints();
  if (spec.dispersion.form() == Dispersion::Form::CosineLattice) {
    knots.clear();
    for (int i = 0; i <= 8; ++i) knots.push_back(i / 8.0);
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i];
    const double b = knots[i + 1];
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm)) {
      throw NumericError("quadrature: non-finite integrand");
    }
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_panel(f, a, b, fa, fm, fb, whole, tol * (b - a), 48);
  }
  return total;
}

}  // namespace

std::string to_string(Statistics s) { return s == Statistics::Bose ? "bose" : "fermi"; }

Statistics parse_statistics(const std::string& name) {
  if (name == "bose" || name == "Bose") return Statistics::Bose;
  if (name == "fermi" || name == "Fermi") return Statistics::Fermi;
  throw DomainError("unknown statistics '" + name + "'");
}

Dispersion Dispersion::cosine_lattice() { return Dispersion{}; }

Dispersion Dispersion::tabulated(std::vector<double> values) {
  if (values.size() < 2) throw DomainError("tabulated dispersion needs at least two values");
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError("tabulated dispersion has non-finite value");
  }
  Dispersion d;
  d.form_ = Form::TabulatedGrid;
  d.grid_ = std::move(values);
  return d;
}

double Dispersion::operator()(double y) const {
  if (form_ == Form::CosineLattice) return 1.0 - std::cos(2.0 * std::numbers::pi * y);
  const double pos = y * static_cast<double>(grid_.size() - 1);
  const auto cell = std::min<std::size_t>(static_cast<std::size_t>(pos), grid_.size() - 2);
  const double frac = pos - static_cast<double>(cell);
  return grid_[cell] + frac * (grid_[cell + 1] - grid_[cell]);
}

double Dispersion::minimum() const {
  if (form_ == Form::CosineLattice) return 0.0;
  return *std::min_element(grid_.begin(), grid_.end());
}

double Dispersion::mean() const {
  if (form_ == Form::CosineLattice) return 1.0;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < grid_.size(); ++i) s += 0.5 * (grid_[i] + grid_[i + 1]);
  return s / static_cast<double>(grid_.size() - 1);
}

std::vector<double> Dispersion::breakpoints() const {
  if (form_ == Form::CosineLattice) return {0.0, 1.0};
  std::vector<double> out(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    out[i] = static_cast<double>(i) / static_cast<double>(grid_.size() - 1);
  }
  return out;
}

void EnsembleSpec::validate() const {
  if (!(beta > 0) || !std::isfinite(beta)) throw InvalidEnsemble("beta must be positive");
  if (!std::isfinite(mu)) throw InvalidEnsemble("mu must be finite");
  if (stats == Statistics::Bose && !(dispersion.minimum() - mu > 0)) {
    throw InvalidEnsemble("Bose ensemble requires mu < min omega_0");
  }
}

double eval_dispersion(const EnsembleSpec& spec, double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("y outside [0,1]");
  return spec.dispersion(y) - spec.mu;
}

double occupancy_mean(Statistics stats, double x) {
  if (stats == Statistics::Fermi) return 1.0 / (1.0 + std::exp(x));
  if (!(x > 0)) throw InvalidEnsemble("Bose occupancy needs beta * omega > 0");
  return 1.0 / std::expm1(x);
}

double occupancy_entropy_bits(Statistics stats, double x) {
  if (stats == Statistics::Fermi) {
    // symmetric in x; evaluate on the side where both terms are small
    const double ax = std::abs(x);
    return (softplus(-ax) + ax / (1.0 + std::exp(ax))) / kLn2;
  }
  if (!(x > 0)) throw InvalidEnsemble("Bose occupancy needs beta * omega > 0");
  return (-std::log(-std::expm1(-x)) + x / std::expm1(x)) / kLn2;
}

double marginal_mean(const EnsembleSpec& spec, double y) {
  return occupancy_mean(spec.stats, spec.beta * eval_dispersion(spec, y));
}

double marginal_entropy(const EnsembleSpec& spec, double y) {
  return occupancy_entropy_bits(spec.stats, spec.beta * eval_dispersion(spec, y));
}

double entropy_of_mean(Statistics stats, double a) {
  if (stats == Statistics::Fermi) {
    if (!(a > 0 && a < 1)) throw DomainError("Fermi mean must lie in (0,1)");
    return -(a * std::log2(a) + (1 - a) * std::log2(1 - a));
  }
  if (!(a > 0) || !std::isfinite(a)) throw DomainError("Bose mean must be positive");
  return (a + 1) * std::log2(a + 1) - a * std::log2(a);
}

double particle_density(const EnsembleSpec& spec, double quad_tol) {
  spec.validate();
  return integrate_unit(spec, [&](double y) { return marginal_mean(spec, y); }, quad_tol);
}

double entropy_rate(const EnsembleSpec& spec, double quad_tol) {
  spec.validate();
  return integrate_unit(spec, [&](double y) { return marginal_entropy(spec, y); }, quad_tol);
}

double solve_mu(Statistics stats, const Dispersion& dispersion, double beta, double r,
                double tol) {
  if (!(beta > 0)) throw InvalidEnsemble("beta must be positive");
  if (stats == Statistics::Fermi && !(r > 0 && r < 1)) {
    throw RangeError("Fermi density must lie in (0,1)");
  }
  if (stats == Statistics::Bose && !(r > 0)) throw RangeError("Bose density must be positive");

  const double quad_tol = std::min(kDefaultQuadTol, 1e-2 * tol);
  EnsembleSpec spec{stats, beta, 0.0, dispersion};
  auto density_minus_r = [&](double mu) {
    spec.mu = mu;
    return particle_density(spec, quad_tol) - r;
  };

  constexpr int kMaxExpansions = 60;
  const double upper = dispersion.minimum() - 1e-12;
  double lo = 0.0;
  double hi = 0.0;
  if (stats == Statistics::Fermi) {
    const double start = dispersion.mean();
    lo = start - 1.0;
    hi = start + 1.0;
    double step = 1.0;
    for (int i = 0; density_minus_r(lo) > 0; ++i) {
      if (i == kMaxExpansions) throw RangeError("density not attainable (below range)");
      step *= 2.0;
      lo = start - step;
    }
    step = 1.0;
    for (int i = 0; density_minus_r(hi) < 0; ++i) {
      if (i == kMaxExpansions) throw RangeError("density not attainable (above range)");
      step *= 2.0;
      hi = start + step;
    }
  } else {
    const double start = dispersion.minimum() - 2.0;
    lo = start - 1.0;
    hi = start + 1.0;
    double step = 1.0;
    for (int i = 0; density_minus_r(lo) > 0; ++i) {
      if (i == kMaxExpansions) throw RangeError("density not attainable (below range)");
      step *= 2.0;
      lo = start - step;
    }
    double gap = upper - hi;
    for (int i = 0;; ++i) {
      double f = 0.0;
      try {
        f = density_minus_r(hi);
      } catch (const NumericError&) {
        throw RangeError("density not attainable (quadrature fails near mu = min omega_0)");
      }
      if (f >= 0) break;
      if (i == kMaxExpansions) throw RangeError("density not attainable (above range)");
      gap *= 0.5;
      hi = std::max(upper - gap, hi);
      if (gap < 1e-12) hi = upper;
    }
  }

  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = density_minus_r(mid);
    if (f == 0.0) {
      lo = hi = mid;
      break;
    }
    (f < 0 ? lo : hi) = mid;
  }
  const double mu = 0.5 * (lo + hi);
  if (!(std::abs(density_minus_r(mu)) < tol)) {
    throw NumericError("solve_mu: bisection did not reach the requested tolerance");
  }
  return mu;
}

double sup_mean(const EnsembleSpec& spec) {
  spec.validate();
  constexpr int kGrid = 1 << 14;
  auto l = [&](double y) { return marginal_mean(spec, std::clamp(y, 0.0, 1.0)); };
  double best_y = 0.0;
  double best = l(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double y = static_cast<double>(i) / kGrid;
    const double v = l(y);
    if (v > best) {
      best = v;
      best_y = y;
    }
  }
  for (double y : spec.dispersion.breakpoints()) best = std::max(best, l(y));
  // golden-section refinement inside the neighbouring cells
  double a = std::max(0.0, best_y - 1.0 / kGrid);
  double b = std::min(1.0, best_y + 1.0 / kGrid);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    if (l(c) >= l(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return std::max(best, l(0.5 * (a + b)));
}

double oscillation_budget(const EnsembleSpec& spec, double epsilon) {
  if (!(epsilon > 0 && epsilon < 1)) throw DomainError("epsilon must lie in (0,1)");
  const double L = sup_mean(spec);
  return epsilon * entropy_of_mean(spec.stats, L) / (2.0 * L);
}

std::vector<Interval> partition_intervals(const EnsembleSpec& spec, double epsilon) {
  const double budget = oscillation_budget(spec, epsilon);
  // construction runs on a fine grid with a margin so that the oscillation
  // between grid points stays inside the budget
  const double target = 0.9 * budget;
  constexpr int kGrid = 1 << 16;
  auto l = [&](double y) { return marginal_mean(spec, y); };

  std::vector<double> cuts{0.0};
  if (spec.stats == Statistics::Fermi) {
    // sign changes between nonzero samples of l - 1/2, refined by bisection
    double prev = l(0.0) - 0.5;
    double prev_y = 0.0;
    for (int i = 1; i <= kGrid; ++i) {
      const double y1 = static_cast<double>(i) / kGrid;
      const double cur = l(y1) - 0.5;
      if (cur == 0.0) continue;
      if (prev != 0.0 && (prev < 0) != (cur < 0)) {
        double a = prev_y;
        double b = y1;
        for (int it = 0; it < 80; ++it) {
          const double m = 0.5 * (a + b);
          const double fm = l(m) - 0.5;
          if (fm == 0.0) {
            a = b = m;
            break;
          }
          ((fm < 0) == (prev < 0) ? a : b) = m;
        }
        const double cut = 0.5 * (a + b);
        if (cut > 0.0 && cut < 1.0) cuts.push_back(cut);
      }
      prev = cur;
      prev_y = y1;
    }
  }
  cuts.push_back(1.0);

  std::vector<Interval> out;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double seg_lo = cuts[c];
    const double seg_hi = cuts[c + 1];
    if (!(seg_hi > seg_lo)) continue;
    // grid points strictly inside the segment, plus its end
    std::vector<double> ys;
    for (int i = static_cast<int>(std::floor(seg_lo * kGrid)) + 1;
         i < static_cast<int>(std::ceil(seg_hi * kGrid)); ++i) {
      ys.push_back(static_cast<double>(i) / kGrid);
    }
    ys.push_back(seg_hi);

    double start = seg_lo;
    double vmin = l(seg_lo);
    double vmax = vmin;
    double last = seg_lo;
    for (double y : ys) {
      const double v = l(y);
      const double nmin = std::min(vmin, v);
      const double nmax = std::max(vmax, v);
      if (nmax - nmin > target && last > start) {
        out.push_back({start, last});
        start = last;
        const double lv = l(last);
        vmin = std::min(lv, v);
        vmax = std::max(lv, v);
      } else {
        vmin = nmin;
        vmax = nmax;
      }
      last = y;
    }
    out.push_back({start, seg_hi});
  }
  return out;
}

}  // namespace gibbslz
