#include "perfhom/core/theory.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "perfhom/core/error.hpp"

namespace perfhom {

namespace {

void require_dim(int dim) {
  if (dim < 2) throw invalid_argument("dimension must be at least 2, got " + std::to_string(dim));
}

void require_unit(double v, const char* name) {
  if (!(v > 0.0 && v <= 1.0)) throw invalid_argument(std::string(name) + " must lie in (0, 1]");
}

}  // namespace

double kappa(double eta, int dim) {
  require_dim(dim);
  require_unit(eta, "eta");
  if (dim <= 3) return 0.0;
  if (dim == 4) return std::sqrt(std::abs(std::log(eta)));
  return 1.0;
}

double varkappa(double eta, int dim) {
  require_dim(dim);
  require_unit(eta, "eta");
  return dim == 2 ? std::abs(std::log(eta)) : 1.0;
}

double RateBound::term(const std::string& label) const {
  for (const auto& [name, value] : terms) {
    if (name == label) return value;
  }
  throw invalid_argument("no bound term named '" + label + "'");
}

namespace {

RateBound finish(int dim, std::vector<std::pair<std::string, double>> terms) {
  RateBound b;
  b.dim = dim;
  b.terms = std::move(terms);
  for (const auto& t : b.terms) b.total += t.second;
  return b;
}

void require_rate_args(double epsilon, double eta, double mu) {
  require_unit(epsilon, "epsilon");
  require_unit(eta, "eta");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw invalid_argument("mu must be finite and nonnegative");
}

}  // namespace

RateBound bound_w1(double epsilon, double eta, double mu, int dim) {
  require_dim(dim);
  require_rate_args(epsilon, eta, mu);
  const double k = kappa(eta, dim);
  const double vk = varkappa(eta, dim);
  const double d = dim;
  const double ee = epsilon * eta;
  return finish(dim, {
                         {"t1", ee * ee * k * mu},
                         {"t2", std::pow(eta, d / 2.0) * std::sqrt(vk) * mu},
                         {"t3", std::pow(eta, d - 1.0) / epsilon * mu},
                         {"t4", ee * std::sqrt(vk)},
                         {"t5", std::pow(eta, d / 2.0)},
                     });
}

RateBound bound_l2(double epsilon, double eta, double mu, int dim, double f_norm_omega, double f_norm_theta) {
  require_dim(dim);
  require_rate_args(epsilon, eta, mu);
  if (!(f_norm_omega >= 0.0) || !(f_norm_theta >= 0.0)) throw invalid_argument("f norms must be nonnegative");
  const double k = kappa(eta, dim);
  const double vk = varkappa(eta, dim);
  const double d = dim;
  const double ee = epsilon * eta;
  const double fo = f_norm_omega;
  const double ft = f_norm_theta;
  return finish(dim, {
                         {"l1", ee * ee * k * mu * fo},
                         {"l2", std::pow(eta, d / 2.0) * std::sqrt(vk) * mu * fo},
                         {"l3", std::pow(eta, d - 1.0) / epsilon * mu * fo},
                         {"l4", ee * ee * vk * fo},
                         {"l5", std::pow(eta, d) * fo},
                         {"l6", ee * std::sqrt(vk) * ft},
                         {"l7", std::pow(eta, d / 2.0) * ft},
                     });
}

// ---------------------------------------------------------------------------
// Special functions

double radial_X(double r, int dim) {
  require_dim(dim);
  if (!(r > 0.0)) throw invalid_argument("radial_X needs r > 0");
  if (dim == 2) return std::cyl_bessel_k(0.0, r);
  if (dim == 3) return std::exp(-r) / r;
  // r^{-nu} K_nu(r) ~ Gamma(nu) 2^{nu-1} r^{-2 nu} near zero.
  const double nu = dim / 2.0 - 1.0;
  const double c = 1.0 / (std::tgamma(nu) * std::pow(2.0, nu - 1.0));
  return c * std::pow(r, -nu) * std::cyl_bessel_k(nu, r);
}

double radial_X_derivative(double r, int dim) {
  require_dim(dim);
  if (!(r > 0.0)) throw invalid_argument("radial_X needs r > 0");
  if (dim == 2) return -std::cyl_bessel_k(1.0, r);
  if (dim == 3) return -std::exp(-r) * (1.0 + r) / (r * r);
  const double nu = dim / 2.0 - 1.0;
  const double c = 1.0 / (std::tgamma(nu) * std::pow(2.0, nu - 1.0));
  return -c * std::pow(r, -nu) * std::cyl_bessel_k(nu + 1.0, r);
}

double auxiliary_X(double x_norm, double epsilon, double eta, int dim, double r3) {
  require_dim(dim);
  if (dim == 2) throw unsupported("auxiliary_X is only defined for dim >= 3");
  require_unit(epsilon, "epsilon");
  require_unit(eta, "eta");
  const double outer = r3 * epsilon;
  if (!(x_norm >= 0.0) || x_norm > outer * (1.0 + 1e-12)) {
    throw invalid_argument("auxiliary_X needs 0 <= |x| <= R3 eps");
  }
  const double n = dim;
  const double inner = outer * eta;
  const double shell = r3 * r3 * epsilon * epsilon * std::pow(eta, n) / (n * (2.0 - n));
  if (x_norm <= inner) {
    return (x_norm * x_norm - inner * inner) / (2.0 * n) + shell * (std::pow(eta, 2.0 - n) - 1.0);
  }
  return shell * (std::pow(outer / x_norm, n - 2.0) - 1.0);
}

CorrectorAlpha corrector_alpha(double epsilon, double eta, double mu, int dim) {
  require_dim(dim);
  require_rate_args(epsilon, eta, mu);
  const double n = dim;
  const double ee = epsilon * eta;
  CorrectorAlpha a;
  if (dim == 2) {
    const double ln = std::log(eta);
    a.alpha_0 = ee * mu / (1.0 - ee * mu * ln);
    a.alpha_j = (1.0 + a.alpha_0 * ln) / (1.0 + ee * mu) * epsilon * eta * eta;
    return a;
  }
  a.alpha_0 = epsilon * std::pow(eta, n - 1.0) * mu / (1.0 + ee * mu / (n - 2.0));
  a.alpha_j = (1.0 + a.alpha_0 / ((2.0 - n) * std::pow(eta, n - 2.0))) / (n - 1.0 + ee * mu) * epsilon * std::pow(eta, n);
  return a;
}

// ---------------------------------------------------------------------------
// Sharpness construction

namespace {

// Value with first and second derivative.
struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
Jet operator*(Jet a, Jet b) { return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2}; }
Jet reciprocal(Jet a) {
  const double inv = 1.0 / a.v;
  return {inv, -a.d1 * inv * inv, (2.0 * a.d1 * a.d1 * inv - a.d2) * inv * inv};
}
Jet operator/(Jet a, Jet b) { return a * reciprocal(b); }

// exp(-1/t) for t > 0, zero otherwise.
Jet bump_tail(Jet t) {
  if (t.v <= 0.0) return {};
  const double e = std::exp(-1.0 / t.v);
  const double g1 = 1.0 / (t.v * t.v);
  const double g2 = -2.0 / (t.v * t.v * t.v);
  // d/dx exp(-1/t(x)) = e g1 t', second derivative by the chain rule.
  return {e, e * g1 * t.d1, e * (g1 * g1 * t.d1 * t.d1 + g2 * t.d1 * t.d1 + g1 * t.d2)};
}

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
Jet smooth_step(Jet t) {
  if (t.v <= 0.0) return Jet{0.0, 0.0, 0.0};
  if (t.v >= 1.0) return Jet{1.0, 0.0, 0.0};
  const Jet a = bump_tail(t);
  const Jet b = bump_tail(Jet{1.0, 0.0, 0.0} - t);
  return a / (a + b);
}

Jet s_jet(double rho) {
  return Jet{1.0, 0.0, 0.0} - smooth_step(Jet{(rho - 1.02) / 0.07, 1.0 / 0.07, 0.0});
}

Jet chi1_jet(double t) { return Jet{1.0, 0.0, 0.0} - smooth_step(Jet{(t - 0.5) * 6.0, 6.0, 0.0}); }

template <class F>
double gauss_panels(F&& f, double a, double b, int panels) {
  using Rule = boost::math::quadrature::gauss<double, 10>;
  const double w = (b - a) / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i) s += Rule::integrate(f, a + i * w, a + (i + 1) * w);
  return s;
}

// ||(-Delta_xi + (eps eta)^2) U||^2 over 1 < |xi| < 1.1 for a radial U.
double data_norm_squared(double ee, bool neumann, int panels) {
  auto integrand = [&](double rho) {
    const Jet r{rho, 1.0, 0.0};
    const Jet s = s_jet(rho);
    const Jet u = neumann ? (r - Jet{1.0, 0.0, 0.0}) * s : s;
    const double g = -u.d2 - u.d1 / rho + ee * ee * u.v;
    return g * g * 2.0 * std::numbers::pi * rho;
  };
  return gauss_panels(integrand, 1.0, 1.1, panels);
}

// ||d/dr (X chi1)||^2 over eps eta < r < 2/3, in the variable ln r.
double corrector_gradient_squared(double ee, int panels) {
  auto integrand = [&](double lr) {
    const double r = std::exp(lr);
    const Jet c = chi1_jet(r);
    const double d = radial_X_derivative(r, 2) * c.v + radial_X(r, 2) * c.d1;
    return d * d * 2.0 * std::numbers::pi * r * r;
  };
  return gauss_panels(integrand, std::log(ee), std::log(2.0 / 3.0), panels);
}

SharpnessResult run_sharpness(double epsilon, double eta, double mu, int resolution, bool neumann) {
  require_unit(epsilon, "epsilon");
  require_unit(eta, "eta");
  if (resolution < 4) throw invalid_argument("quadrature resolution must be at least 4");
  const double ee = epsilon * eta;
  if (!(ee < 0.25)) throw invalid_argument("sharpness construction needs eps * eta < 1/4");
  const double amplitude =
      neumann ? 1.0 / (ee * radial_X_derivative(ee, 2)) : mu / (radial_X_derivative(ee, 2) + mu * radial_X(ee, 2));
  const double vk = varkappa(eta, 2);

  auto evaluate = [&](int panels, double& f_norm, double& grad) {
    f_norm = std::sqrt(data_norm_squared(ee, neumann, panels)) / ee;
    grad = std::abs(amplitude) * std::sqrt(corrector_gradient_squared(ee, panels));
  };
  SharpnessResult out;
  out.epsilon = epsilon;
  out.eta = eta;
  out.mu = mu;
  double f1 = 0.0;
  double g1 = 0.0;
  double f2 = 0.0;
  double g2 = 0.0;
  evaluate(resolution, f1, g1);
  evaluate(2 * resolution, f2, g2);
  out.self_difference = std::max(std::abs(f2 - f1) / std::abs(f2), std::abs(g2 - g1) / std::abs(g2));
  if (!(out.self_difference <= 0.01)) {
    throw invalid_argument("quadrature resolution " + std::to_string(resolution) +
                           " insufficient: self-difference " + std::to_string(out.self_difference));
  }
  out.f_norm_lower = f2;
  out.corrector_grad_norm = g2;
  const double weight = neumann ? ee * std::sqrt(vk) : ee * ee * std::sqrt(vk) * mu;
  out.ratio = g2 / (weight * f2);
  return out;
}

}  // namespace

double sharpness_cutoff_s(double rho) { return s_jet(rho).v; }
double sharpness_chi1(double t) { return chi1_jet(std::abs(t)).v; }

SharpnessResult sharpness_neumann(double epsilon, double eta, int quadrature_resolution) {
  return run_sharpness(epsilon, eta, 0.0, quadrature_resolution, true);
}

SharpnessResult sharpness_robin_vs_neumann(double epsilon, double eta, double mu, int quadrature_resolution) {
  if (!(mu > 0.0)) throw invalid_argument("robin_vs_neumann needs mu > 0");
  return run_sharpness(epsilon, eta, mu, quadrature_resolution, false);
}

}  // namespace perfhom
