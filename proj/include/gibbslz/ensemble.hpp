#pragma once

// Single-particle dispersion, occupancy marginal laws and the thermodynamic
// integrals built from them. All entropies are in bits; Gibbs weights use
// natural exponentials.

#include <string>
#include <vector>

namespace gibbslz {

enum class Statistics { Bose, Fermi };

std::string to_string(Statistics s);
Statistics parse_statistics(const std::string& name);

// Base energy omega_0 on the unit interval.
class Dispersion {
 public:
  enum class Form { CosineLattice, TabulatedGrid };

  // omega_0(y) = 1 - cos(2 pi y)
  static Dispersion cosine_lattice();
  // Values on the uniform grid y_i = i / (N - 1), linearly interpolated. N >= 2.
  static Dispersion tabulated(std::vector<double> values);
  static Dispersion constant(double value) { return tabulated({value, value}); }

  Form form() const { return form_; }
  const std::vector<double>& grid() const { return grid_; }

  double operator()(double y) const;
  double minimum() const;
  double mean() const;
  // Knots where the interpolant may have kinks, including 0 and 1.
  std::vector<double> breakpoints() const;

 private:
  Form form_ = Form::CosineLattice;
  std::vector<double> grid_;
};

struct EnsembleSpec {
  Statistics stats = Statistics::Fermi;
  double beta = 1.0;
  double mu = 0.0;
  Dispersion dispersion = Dispersion::cosine_lattice();

  // Throws InvalidEnsemble when beta <= 0, or when Bose and min omega_0 - mu <= 0.
  void validate() const;
};

inline constexpr double kDefaultQuadTol = 1e-9;

// omega_0(y) - mu. Throws DomainError for y outside [0,1].
double eval_dispersion(const EnsembleSpec& spec, double y);

// Mean occupancy l(y) and entropy g(y) as functions of x = beta * omega.
// Bose requires x > 0 (InvalidEnsemble otherwise).
double occupancy_mean(Statistics stats, double x);
double occupancy_entropy_bits(Statistics stats, double x);

double marginal_mean(const EnsembleSpec& spec, double y);
double marginal_entropy(const EnsembleSpec& spec, double y);

// Entropy (bits) of the two-point (Fermi) or geometric (Bose) law with mean a.
double entropy_of_mean(Statistics stats, double a);

// Adaptive composite Simpson over [0,1] split at the dispersion breakpoints.
double particle_density(const EnsembleSpec& spec, double quad_tol = kDefaultQuadTol);
double entropy_rate(const EnsembleSpec& spec, double quad_tol = kDefaultQuadTol);

// Chemical potential with particle_density = r. Bracket expansion followed by
// bisection; throws RangeError when r is not attainable.
double solve_mu(Statistics stats, const Dispersion& dispersion, double beta, double r,
                double tol = 1e-10);

// sup_y l(y), located by a grid scan refined at the best cell.
double sup_mean(const EnsembleSpec& spec);

// epsilon' = epsilon * e_L / (2 L), L = sup l.
double oscillation_budget(const EnsembleSpec& spec, double epsilon);

struct Interval {
  double lo;
  double hi;
};

// Tiling of [0,1] into intervals on which l oscillates by at most
// oscillation_budget(spec, epsilon). For Fermi, every crossing of l = 1/2 is a
// boundary.
std::vector<Interval> partition_intervals(const EnsembleSpec& spec, double epsilon);

}  // namespace gibbslz
