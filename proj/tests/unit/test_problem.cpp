#include <doctest.h>

#include <cmath>

#include "perfhom/core/error.hpp"
#include "perfhom/core/problem.hpp"

using namespace perfhom;

namespace {

Coefficients constant_matrix(Matrix2c a) {
  Coefficients c = coefficients_preset("laplacian");
  c.A = [a](Point) { return a; };
  c.bound_A = 10.0;
  return c;
}

std::vector<LipschitzSample> samples_up_to(double umax) {
  std::vector<LipschitzSample> out;
  const auto pts = sample_points(20, 5);
  for (int i = 0; i < 200; ++i) {
    const double t = umax * (i + 1) / 200.0;
    out.push_back({pts[static_cast<std::size_t>(i) % pts.size()], Complex{t, 0.1 * t}, Complex{0.5 * t, -0.2 * t}});
  }
  return out;
}

}  // namespace

TEST_CASE("ellipticity estimates") {
  const auto pts = sample_points(50, 1);
  const auto probes = sample_probes(200, 2);
  CHECK(check_ellipticity(coefficients_preset("laplacian"), pts, probes).c1_estimate == doctest::Approx(1.0).epsilon(1e-12));
  auto diag = check_ellipticity(constant_matrix({{{2.0, 0.0}, {0.0, 3.0}}}), pts, probes);
  CHECK(diag.c1_estimate >= 2.0 - 1e-12);
  CHECK(diag.c1_estimate <= 2.0 + 1e-3);
  CHECK(check_ellipticity(constant_matrix({{{1.0, 0.5}, {-0.5, 1.0}}}), pts, probes).c1_estimate ==
        doctest::Approx(1.0).epsilon(1e-12));
  auto bad = constant_matrix({{{1.0, 0.0}, {0.0, -0.5}}});
  CHECK(check_ellipticity(bad, pts, probes).violated);
}

TEST_CASE("presets satisfy their declared bounds") {
  const auto pts = sample_points(400, 3);
  const auto probes = sample_probes(100, 4);
  for (const char* key : {"laplacian", "variable", "convection"}) {
    const auto c = coefficients_preset(key);
    const auto r = check_ellipticity(c, pts, probes);
    CHECK_FALSE(r.violated);
    CHECK_FALSE(r.bound_exceeded);
  }
}

TEST_CASE("Lipschitz ratios") {
  const double mu = 0.7;
  const auto s = samples_up_to(10.0);
  const auto lin = check_lipschitz(nonlinearity_preset("linear", mu), s);
  CHECK(lin.ratio == doctest::Approx(mu).epsilon(1e-12));
  CHECK_FALSE(lin.flagged);
  CHECK(lin.at_zero == 0.0);
  const auto sat = check_lipschitz(nonlinearity_preset("saturating", mu), s);
  CHECK(sat.ratio <= mu * (1.0 + 1e-12));
  CHECK_FALSE(sat.flagged);
  CHECK(sat.at_zero == 0.0);
  const auto quad = check_lipschitz(nonlinearity_preset("quadratic", mu), s);
  CHECK(quad.flagged);
  CHECK(quad.ratio > 10.0 * mu);
}

TEST_CASE("scaling admissibility") {
  const auto r = check_scaling_admissible(ScalingLaw::power(1.0, 1.0, 1.0, 1.0), {0.1, 0.05, 0.025}, 2);
  CHECK(r.values[0] == doctest::Approx((0.01 * std::log(10.0) + 1.0) * 0.1).epsilon(1e-12));
  CHECK(r.admissible);
  CHECK(r.nonincreasing);

  const auto flat = check_scaling_admissible(ScalingLaw::power(1.0, 1.0, 1.0, 0.0), {0.1, 0.05, 0.025, 0.0125}, 2);
  CHECK_FALSE(flat.admissible);
  CHECK(flat.values.back() == doctest::Approx(1.0).epsilon(1e-3));

  for (int dim : {2, 3, 5}) {
    const auto zero = check_scaling_admissible(ScalingLaw::power(1.0, 1.0, 0.0, 1.0), {0.1, 0.05}, dim);
    CHECK(zero.admissible);
    CHECK(zero.values[0] == 0.0);
  }
  CHECK_THROWS(check_scaling_admissible(ScalingLaw::power(1.0, 1.0, 1.0, 1.0), {0.05, 0.1}, 2));
}

TEST_CASE("problem checks") {
  ProblemSpec s;
  s.lambda = {0.5, 0.0};
  s.lambda0 = -1.0;
  CHECK_THROWS_AS(check_problem(s), Error);
  s.lambda = {-2.0, 3.0};
  CHECK_NOTHROW(check_problem(s));
  CHECK_THROWS(coefficients_preset("nope"));
  CHECK_THROWS(nonlinearity_preset("linear", -1.0));
  CHECK_THROWS(forcing_preset("mode33"));
}

TEST_CASE("forcing presets are manufactured for -Delta + 1") {
  const auto f = forcing_preset("mode11");
  const double pi = 3.14159265358979323846;
  CHECK(f({0.5, 0.5}).real() == doctest::Approx(2.0 * pi * pi + 1.0));
  CHECK(std::abs(forcing_preset("mode22")({0.5, 0.3})) < 1e-12);
}

TEST_CASE("scaling law") {
  const auto law = ScalingLaw::power(0.5, 2.0, 3.0, 1.5);
  CHECK(law.eta(0.1) == doctest::Approx(0.005));
  CHECK(law.mu(0.04) == doctest::Approx(3.0 * 0.008));
  CHECK(std::isinf(ScalingLaw::power(1.0, 1.0, 0.0, 1.0).mu_exponent()));
  CHECK_THROWS(ScalingLaw::power(2.0, 1.0, 0.0, 1.0));
}
