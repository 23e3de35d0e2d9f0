#include "perfhom/core/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "perfhom/core/error.hpp"
#include "perfhom/core/theory.hpp"

namespace perfhom {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double spectral_norm(const Matrix2c& a) {
  // Largest singular value from the 2x2 Gram matrix.
  const double p = std::norm(a[0][0]) + std::norm(a[1][0]);
  const double q = std::norm(a[0][1]) + std::norm(a[1][1]);
  const Complex r = std::conj(a[0][0]) * a[0][1] + std::conj(a[1][0]) * a[1][1];
  const double mid = 0.5 * (p + q);
  const double rad = std::sqrt(0.25 * (p - q) * (p - q) + std::norm(r));
  return std::sqrt(mid + rad);
}

}  // namespace

Coefficients coefficients_preset(const std::string& key) {
  Coefficients c;
  c.name = key;
  c.b = [](Point) { return Vector2c{}; };
  c.c = [](Point) { return Complex{}; };
  if (key == "laplacian") {
    c.A = [](Point) { return Matrix2c{{{1.0, 0.0}, {0.0, 1.0}}}; };
    return c;
  }
  if (key == "variable") {
    c.A = [](Point x) {
      const double a = 1.0 + 0.5 * std::sin(kPi * x.x) * std::sin(kPi * x.y);
      return Matrix2c{{{a, 0.3}, {-0.3, a}}};
    };
    c.c1 = 0.5;
    c.bound_A = 1.6;
    c.bound_grad_A = 2.3;
    c.constant = false;
    return c;
  }
  if (key == "convection") {
    c.A = [](Point) { return Matrix2c{{{1.0, 0.0}, {0.0, 1.0}}}; };
    c.b = [](Point x) { return Vector2c{0.6 * std::cos(kPi * x.y), 0.6 * std::sin(kPi * x.x)}; };
    c.bound_b = 0.85;
    c.bound_grad_b = 1.9;
    c.constant = false;
    return c;
  }
  throw invalid_argument("unknown coefficient preset '" + key + "' (laplacian, variable, convection)");
}

RobinNonlinearity nonlinearity_preset(const std::string& key, double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw invalid_argument("mu must be finite and nonnegative");
  RobinNonlinearity nl;
  nl.name = key;
  nl.mu = mu;
  if (key == "none") {
    nl.mu = 0.0;
    nl.a = [](Point, Complex) { return Complex{}; };
  } else if (key == "linear") {
    nl.a = [mu](Point, Complex u) { return mu * u; };
  } else if (key == "saturating") {
    nl.a = [mu](Point, Complex u) { return mu * u / (1.0 + std::abs(u)); };
  } else if (key == "quadratic") {
    nl.a = [mu](Point, Complex u) { return mu * u * u; };
  } else {
    throw invalid_argument("unknown nonlinearity preset '" + key + "' (none, linear, saturating, quadratic)");
  }
  return nl;
}

Forcing forcing_preset(const std::string& key) {
  if (key == "zero") return [](Point) { return Complex{}; };
  if (key == "one") return [](Point) { return Complex{1.0, 0.0}; };
  if (key == "mode11") {
    return [](Point x) { return Complex{(2.0 * kPi * kPi + 1.0) * std::sin(kPi * x.x) * std::sin(kPi * x.y), 0.0}; };
  }
  if (key == "mode22") {
    return [](Point x) {
      return Complex{(8.0 * kPi * kPi + 1.0) * std::sin(2.0 * kPi * x.x) * std::sin(2.0 * kPi * x.y), 0.0};
    };
  }
  throw invalid_argument("unknown forcing preset '" + key + "' (zero, one, mode11, mode22)");
}

ScalingLaw ScalingLaw::power(double eta0, double gamma, double mu0, double delta) {
  if (!(eta0 > 0.0 && eta0 <= 1.0)) throw invalid_argument("eta0 must lie in (0, 1]");
  if (!(gamma >= 0.0)) throw invalid_argument("gamma must be nonnegative");
  if (!(mu0 >= 0.0)) throw invalid_argument("mu0 must be nonnegative");
  ScalingLaw law;
  law.eta0 = eta0;
  law.gamma = gamma;
  law.mu0 = mu0;
  law.delta = delta;
  std::ostringstream d;
  d << "eta = " << eta0 << " eps^" << gamma << ", mu = ";
  if (mu0 == 0.0) {
    d << "0";
  } else {
    d << mu0 << " eps^" << delta;
  }
  law.description = d.str();
  return law;
}

double ScalingLaw::eta(double eps) const { return eta0 * std::pow(eps, gamma); }

double ScalingLaw::mu(double eps) const { return mu0 == 0.0 ? 0.0 : mu0 * std::pow(eps, delta); }

void check_problem(const ProblemSpec& spec) {
  if (spec.lambda.real() > spec.lambda0) {
    std::ostringstream msg;
    msg << "Re(lambda) = " << spec.lambda.real() << " exceeds the declared lambda0 = " << spec.lambda0;
    throw invalid_argument(msg.str());
  }
  if (!spec.coefficients.A || !spec.coefficients.b || !spec.coefficients.c) throw invalid_argument("incomplete coefficients");
  if (!spec.nonlinearity.a) throw invalid_argument("missing Robin nonlinearity");
  if (!spec.f) throw invalid_argument("missing right-hand side");
}

EllipticityReport check_ellipticity(const Coefficients& coeffs, const std::vector<Point>& samples,
                                    const std::vector<Vector2c>& probes) {
  if (samples.empty() || probes.empty()) throw invalid_argument("ellipticity check needs samples and probes");
  EllipticityReport r;
  r.c1_estimate = std::numeric_limits<double>::infinity();
  for (const Point& x : samples) {
    const Matrix2c a = coeffs.A(x);
    for (const Vector2c& z : probes) {
      const double zz = std::norm(z[0]) + std::norm(z[1]);
      if (zz == 0.0) continue;
      Complex q{};
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) q += std::conj(z[static_cast<std::size_t>(i)]) * a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(j)];
      }
      r.c1_estimate = std::min(r.c1_estimate, q.real() / zz);
    }
    const Vector2c b = coeffs.b(x);
    const double bn = std::sqrt(std::norm(b[0]) + std::norm(b[1]));
    if (spectral_norm(a) > coeffs.bound_A * (1.0 + 1e-12) || bn > coeffs.bound_b * (1.0 + 1e-12) + 1e-300 ||
        std::abs(coeffs.c(x)) > coeffs.bound_c * (1.0 + 1e-12) + 1e-300) {
      r.bound_exceeded = true;
    }
  }
  r.violated = !(r.c1_estimate > 0.0) || r.c1_estimate < coeffs.c1 * (1.0 - 1e-12);
  return r;
}

LipschitzReport check_lipschitz(const RobinNonlinearity& nl, const std::vector<LipschitzSample>& samples) {
  if (samples.empty()) throw invalid_argument("Lipschitz check needs samples");
  LipschitzReport r;
  for (const auto& s : samples) {
    const double du = std::abs(s.u1 - s.u2);
    if (du == 0.0) throw invalid_argument("Lipschitz samples need u1 != u2");
    r.ratio = std::max(r.ratio, std::abs(nl.a(s.x, s.u1) - nl.a(s.x, s.u2)) / du);
    r.at_zero = std::max(r.at_zero, std::abs(nl.a(s.x, Complex{})));
  }
  r.flagged = r.ratio > nl.mu * (1.0 + 1e-9);
  return r;
}

AdmissibilityReport check_scaling_admissible(const ScalingLaw& law, const std::vector<double>& eps_grid, int dim) {
  if (dim < 2) throw invalid_argument("dimension must be at least 2");
  if (eps_grid.empty()) throw invalid_argument("empty eps grid");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0)) throw invalid_argument("eps grid must be positive");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1])) throw invalid_argument("eps grid must be strictly decreasing");
  }
  AdmissibilityReport r;
  r.eps = eps_grid;
  bool all_zero = true;
  for (double e : eps_grid) {
    const double eta = law.eta(e);
    if (!(eta > 0.0 && eta <= 1.0)) throw invalid_argument("scaling law gives eta outside (0, 1]");
    const double weight = e * eta * varkappa(eta, dim) + std::pow(eta, dim - 1.0) / e;
    const double v = weight * law.mu(e);
    r.values.push_back(v);
    all_zero = all_zero && v == 0.0;
  }
  r.nonincreasing = true;
  for (std::size_t i = 1; i < r.values.size(); ++i) {
    r.nonincreasing = r.nonincreasing && r.values[i] <= r.values[i - 1] * (1.0 + 1e-12);
  }
  if (all_zero) {
    r.slope = std::numeric_limits<double>::quiet_NaN();
    r.admissible = true;
    r.verdict = "admissible: mu vanishes identically";
    return r;
  }
  const bool positive = std::all_of(r.values.begin(), r.values.end(), [](double v) { return v > 0.0; });
  if (positive && r.values.size() >= 2) {
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    const double n = static_cast<double>(r.values.size());
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      const double x = std::log(eps_grid[i]);
      const double y = std::log(r.values[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  } else {
    r.slope = std::numeric_limits<double>::quiet_NaN();
  }
  // Decay toward zero is read off a positive power-law slope; a plateau (slope near 0) is not admissible.
  r.admissible = positive && r.nonincreasing && r.slope > 0.1;
  std::ostringstream v;
  v << (r.admissible ? "admissible" : "not admissible") << ": values " << (r.nonincreasing ? "nonincreasing" : "not monotone")
    << ", log-log slope " << r.slope;
  r.verdict = v.str();
  return r;
}

std::vector<Point> sample_points(std::size_t n, std::uint64_t seed, Point lo, Point hi) {
  std::mt19937_64 rng(seed);
  std::vector<Point> out(n);
  for (auto& p : out) p = {lo.x + (hi.x - lo.x) * uniform01(rng), lo.y + (hi.y - lo.y) * uniform01(rng)};
  return out;
}

std::vector<Vector2c> sample_probes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Vector2c> out(n);
  for (auto& z : out) {
    z = {Complex{g(rng), g(rng)}, Complex{g(rng), g(rng)}};
    const double s = std::sqrt(std::norm(z[0]) + std::norm(z[1]));
    z[0] /= s;
    z[1] /= s;
  }
  return out;
}

}  // namespace perfhom
