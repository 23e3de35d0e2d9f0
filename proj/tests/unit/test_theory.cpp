#include <doctest.h>

#include <cmath>

#include "perfhom/core/theory.hpp"

using namespace perfhom;

namespace {

bool rel_close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-300); }

double ode_residual(double r, int dim, double h) {
  const double xm = radial_X(r - h, dim), x0 = radial_X(r, dim), xp = radial_X(r + h, dim);
  const double d2 = (xp - 2.0 * x0 + xm) / (h * h);
  const double d1 = (xp - xm) / (2.0 * h);
  return std::abs(d2 + (dim - 1.0) / r * d1 - x0) / std::max(1.0, std::abs(x0));
}

}  // namespace

TEST_CASE("kappa and varkappa") {
  CHECK(kappa(0.1, 2) == 0.0);
  CHECK(kappa(0.1, 3) == 0.0);
  CHECK(rel_close(kappa(0.1, 4), std::sqrt(std::log(10.0))));
  CHECK(kappa(0.1, 5) == 1.0);
  CHECK(varkappa(0.1, 3) == 1.0);
  CHECK(rel_close(varkappa(0.1, 2), std::log(10.0)));
}

TEST_CASE("bound_w1 monomials") {
  const auto b = bound_w1(0.1, 0.1, 0.0, 2);
  CHECK(rel_close(b.term("t4"), 0.01 * std::sqrt(std::log(10.0))));
  CHECK(rel_close(b.term("t5"), 0.1));
  CHECK(rel_close(b.total, 0.1 + 0.01 * std::sqrt(std::log(10.0))));
  for (int dim = 2; dim <= 6; ++dim) {
    const auto z = bound_w1(0.2, 0.3, 0.0, dim);
    CHECK(z.term("t1") == 0.0);
    CHECK(z.term("t2") == 0.0);
    CHECK(z.term("t3") == 0.0);
  }
  const auto d5 = bound_w1(0.1, 0.1, 1.0, 5);
  CHECK(rel_close(d5.term("t1"), 1e-4));
  CHECK(rel_close(d5.term("t2"), std::pow(10.0, -2.5)));
  CHECK(rel_close(d5.term("t3"), 1e-3));
}

TEST_CASE("bound_l2 groups") {
  const auto b = bound_l2(0.1, 0.1, 0.0, 2, 1.0, 0.0);
  CHECK(rel_close(b.total, 1e-4 * std::log(10.0) + 0.01));
  const auto b1 = bound_l2(0.1, 0.1, 0.3, 2, 1.0, 1.0);
  const auto b2 = bound_l2(0.1, 0.1, 0.3, 2, 1.0, 2.0);
  for (const auto& [label, v] : b1.terms) {
    const bool theta = label == "l6" || label == "l7";
    CHECK(rel_close(b2.term(label), theta ? 2.0 * v : v));
  }
  const auto d3 = bound_l2(0.1, 0.1, 0.0, 3, 1.0, 0.0);
  CHECK(rel_close(d3.total, 1e-4 + 1e-3));
}

TEST_CASE("bounds are monotone in mu and eta") {
  for (int dim : {2, 3, 4, 5}) {
    double prev = 0.0;
    for (double mu : {0.0, 0.1, 0.5, 1.0, 2.0}) {
      const double v = bound_w1(0.1, 0.2, mu, dim).total;
      CHECK(v >= prev);
      prev = v;
    }
    prev = 0.0;
    for (double eta : {0.01, 0.05, 0.1, 0.3, 0.6}) {
      const double v = bound_l2(0.1, eta, 0.5, dim, 1.0, 1.0).total;
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("radial_X closed forms and ODE residual") {
  CHECK(rel_close(radial_X(1.0, 3), std::exp(-1.0), 1e-12));
  CHECK(radial_X(0.5, 2) == doctest::Approx(0.9244190712).epsilon(1e-9));
  for (int dim : {2, 3, 4, 5}) CHECK(ode_residual(1.0, dim, 1e-4) <= 1e-6);
  // Leading term -ln r in dim 2.
  const double r = 1e-6;
  CHECK(radial_X(r, 2) / -std::log(r) == doctest::Approx(1.0).epsilon(0.01));
  double prev = radial_X(0.01, 2);
  for (double t = 0.02; t <= 10.0; t += 0.01) {
    const double v = radial_X(t, 2);
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(radial_X_derivative(1.0, 3) == doctest::Approx(-2.0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("auxiliary_X") {
  const double eps = 0.1, eta = 0.3, r3 = 1.5;
  for (int dim : {3, 4, 5}) {
    CHECK(std::abs(auxiliary_X(r3 * eps, eps, eta, dim, r3)) <= 1e-15);
    const double a = r3 * eps * eta;
    const double in = auxiliary_X(a * (1.0 - 1e-15), eps, eta, dim, r3);
    const double out = auxiliary_X(a * (1.0 + 1e-15), eps, eta, dim, r3);
    CHECK(std::abs(in - out) <= 1e-12);
    const double n = dim;
    const double expected = r3 * r3 * eps * eps * std::pow(eta, n) * (std::pow(eta, 2.0 - n) - 1.0) / (n * (2.0 - n));
    CHECK(rel_close(auxiliary_X(a, eps, eta, dim, r3), expected, 1e-12));
  }
}

TEST_CASE("corrector alpha") {
  auto a = corrector_alpha(0.1, 0.2, 0.0, 3);
  CHECK(a.alpha_0 == 0.0);
  CHECK(rel_close(a.alpha_j, 0.1 * 0.008 / 2.0));
  a = corrector_alpha(0.1, 0.1, 1.0, 3);
  CHECK(rel_close(a.alpha_0, 0.1 * 0.01 / 1.01));
  a = corrector_alpha(0.1, 0.2, 0.0, 2);
  CHECK(a.alpha_0 == 0.0);
  CHECK(rel_close(a.alpha_j, 0.1 * 0.04));
  const double small = corrector_alpha(0.1, 0.2, 1e-6, 3).alpha_0 / 1e-6;
  const double smaller = corrector_alpha(0.1, 0.2, 1e-8, 3).alpha_0 / 1e-8;
  CHECK(small == doctest::Approx(smaller).epsilon(1e-5));
  CHECK(smaller == doctest::Approx(0.1 * 0.04).epsilon(1e-6));
}

TEST_CASE("sharpness construction") {
  for (double t = 2.0 / 3.0; t < 2.0; t += 0.01) CHECK(sharpness_chi1(t) == 0.0);
  CHECK(sharpness_chi1(0.1) == 1.0);
  const auto a = sharpness_neumann(0.1, 0.1, 32);
  const auto b = sharpness_neumann(0.1, 0.05, 32);
  CHECK(a.ratio > 0.0);
  CHECK(a.self_difference <= 1e-2);
  CHECK(b.f_norm_lower / a.f_norm_lower == doctest::Approx(2.0).epsilon(0.1));
  CHECK_THROWS(sharpness_robin_vs_neumann(0.1, 0.1, 0.0));
}
