#pragma once

#include <array>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "perfhom/core/geometry.hpp"

namespace perfhom {

using Complex = std::complex<double>;
using Matrix2c = std::array<std::array<Complex, 2>, 2>;
using Vector2c = std::array<Complex, 2>;

/// Coefficients of L = -div(A grad) + b . grad + c.
struct Coefficients {
  std::string name = "laplacian";
  std::function<Matrix2c(Point)> A;
  std::function<Vector2c(Point)> b;
  std::function<Complex(Point)> c;
  /// Declared ellipticity constant and sup-norm bounds.
  double c1 = 1.0;
  double bound_A = 1.0;
  double bound_grad_A = 0.0;
  double bound_b = 0.0;
  double bound_grad_b = 0.0;
  double bound_c = 0.0;
  bool constant = true;
};

/// "laplacian", "variable" or "convection".
Coefficients coefficients_preset(const std::string& key);

/// Robin law a(x, u) with declared Lipschitz constant mu.
struct RobinNonlinearity {
  std::string name = "none";
  std::function<Complex(Point, Complex)> a;
  double mu = 0.0;
};

/// "none", "linear" (mu u), "saturating" (mu u / (1 + |u|)) or "quadratic" (mu u^2, not Lipschitz).
RobinNonlinearity nonlinearity_preset(const std::string& key, double mu);

using Forcing = std::function<Complex(Point)>;

/// "zero", "one", "mode11" or "mode22" (the last two are manufactured for -Delta + 1 on the unit square).
Forcing forcing_preset(const std::string& key);

/// eta(eps) = eta0 eps^gamma, mu(eps) = mu0 eps^delta (mu identically zero when mu0 = 0).
struct ScalingLaw {
  double eta0 = 1.0;
  double gamma = 1.0;
  double mu0 = 0.0;
  double delta = 1.0;
  std::string description;

  static ScalingLaw power(double eta0, double gamma, double mu0, double delta);
  double eta(double eps) const;
  double mu(double eps) const;
  bool mu_vanishes() const { return mu0 == 0.0; }
  /// Exponent of mu in eps, infinite when mu vanishes.
  double mu_exponent() const { return mu_vanishes() ? std::numeric_limits<double>::infinity() : delta; }
};

struct ProblemSpec {
  Coefficients coefficients = coefficients_preset("laplacian");
  RobinNonlinearity nonlinearity = nonlinearity_preset("none", 0.0);
  Complex lambda{-1.0, 0.0};
  /// Declared shift bound; Re(lambda) must not exceed it.
  double lambda0 = -1.0;
  Forcing f = forcing_preset("zero");
  std::shared_ptr<const Perforation> perforation;
};

/// Throws when Re(lambda) exceeds the declared lambda0.
void check_problem(const ProblemSpec& spec);

struct EllipticityReport {
  double c1_estimate = 0.0;
  bool violated = false;
  /// A sample exceeded a declared sup-norm bound.
  bool bound_exceeded = false;
};

EllipticityReport check_ellipticity(const Coefficients& coeffs, const std::vector<Point>& samples,
                                    const std::vector<Vector2c>& probes);

struct LipschitzSample {
  Point x;
  Complex u1;
  Complex u2;
};

struct LipschitzReport {
  double ratio = 0.0;
  bool flagged = false;
  /// max |a(x, 0)| over the sampled x.
  double at_zero = 0.0;
};

LipschitzReport check_lipschitz(const RobinNonlinearity& nl, const std::vector<LipschitzSample>& samples);

struct AdmissibilityReport {
  std::vector<double> eps;
  std::vector<double> values;
  bool nonincreasing = false;
  /// Log-log slope of the values against eps; NaN when all values vanish.
  double slope = 0.0;
  bool admissible = false;
  std::string verdict;
};

/// (eps eta varkappa + eps^{-1} eta^{dim-1}) mu per grid point and a decay verdict.
AdmissibilityReport check_scaling_admissible(const ScalingLaw& law, const std::vector<double>& eps_grid, int dim);

/// Random sample points in the unit square and unit-length complex probe vectors.
std::vector<Point> sample_points(std::size_t n, std::uint64_t seed, Point lo = {0.0, 0.0}, Point hi = {1.0, 1.0});
std::vector<Vector2c> sample_probes(std::size_t n, std::uint64_t seed);

}  // namespace perfhom
