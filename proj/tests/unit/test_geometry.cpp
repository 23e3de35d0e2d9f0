#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "perfhom/core/error.hpp"
#include "perfhom/core/geometry.hpp"
#include "perfhom/core/geometry_json.hpp"

using namespace perfhom;

namespace {

bool contains_text(const ValidationReport& r, const std::string& s) {
  for (const auto& v : r.violations) {
    if (v.find(s) != std::string::npos) return true;
  }
  return false;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST_CASE("fill respects guard balls and boundary clearance") {
  GenerationOptions o;
  o.seed = 7;
  const Perforation p = generate_perforation(DomainSpec::unit_square(), 0.1, 0.5, {0.5, 1.0, 1.5}, o);
  REQUIRE(p.cavities.size() > 3);
  for (std::size_t k = 0; k < p.cavities.size(); ++k) {
    CHECK(p.domain.boundary_distance(p.cavities[k].center) >= 0.15 - 1e-12);
    for (std::size_t j = k + 1; j < p.cavities.size(); ++j) {
      CHECK(distance(p.cavities[k].center, p.cavities[j].center) >= 0.3 - 1e-12);
    }
  }
  CHECK(validate_a1(p).ok());
}

TEST_CASE("packing bound rules out impossible requests") {
  CHECK(packing_bound(DomainSpec::unit_square(), 0.5, 1.5) == 0);
  GenerationOptions o;
  o.target_count = 10;
  CHECK(kind_of([&] { generate_perforation(DomainSpec::unit_square(), 0.5, 1.0, {0.5, 1.0, 1.5}, o); }) ==
        ErrorKind::infeasible);
}

TEST_CASE("generation is deterministic per seed") {
  GenerationOptions o;
  o.seed = 42;
  o.shape_preset = "mixed";
  const auto a = generate_perforation(DomainSpec::unit_disk(), 0.08, 0.3, {0.5, 1.0, 1.5}, o);
  const auto b = generate_perforation(DomainSpec::unit_disk(), 0.08, 0.3, {0.5, 1.0, 1.5}, o);
  CHECK(perforation_to_json(a) == perforation_to_json(b));
  o.seed = 43;
  const auto c = generate_perforation(DomainSpec::unit_disk(), 0.08, 0.3, {0.5, 1.0, 1.5}, o);
  CHECK(perforation_to_json(a) != perforation_to_json(c));
}

TEST_CASE("a requested count is honoured") {
  GenerationOptions o;
  o.seed = 3;
  o.target_count = 5;
  const auto p = generate_perforation(DomainSpec::unit_square(), 0.1, 0.5, {0.5, 1.0, 1.5}, o);
  CHECK(p.cavities.size() == 5);
}

TEST_CASE("validate_a1 names the broken relation") {
  Perforation p;
  p.domain = DomainSpec::unit_square();
  p.epsilon = 0.1;
  p.eta = 0.5;
  p.radii = {0.5, 1.0, 1.5};
  const double g = p.radii.r3 * p.epsilon;
  p.cavities = {{{0.5, 0.5}, CavityShape::unit_disk()}, {{0.5 + 1.9 * g, 0.5}, CavityShape::unit_disk()}};
  CHECK(contains_text(validate_a1(p), "guard-ball overlap (k=1,j=2)"));

  p.cavities = {{{0.5 * g, 0.5}, CavityShape::unit_disk()}};
  CHECK(contains_text(validate_a1(p), "boundary clearance"));

  p.cavities = {{{0.5, 0.5}, CavityShape::unit_disk()}};
  CHECK(validate_a1(p).ok());
}

TEST_CASE("validate_a1 rejects shapes outside the radii") {
  Perforation p;
  p.domain = DomainSpec::unit_square();
  p.epsilon = 0.1;
  p.eta = 0.5;
  p.radii = {0.5, 1.0, 1.5};
  p.cavities = {{{0.5, 0.5}, CavityShape::star(FourierProfile{1.0, {0.0, 0.0, 0.3}, {}})}};
  CHECK_FALSE(validate_a1(p).ok());
}

TEST_CASE("scaled cavity membership") {
  Perforation p;
  p.domain = DomainSpec::unit_square();
  p.epsilon = 0.1;
  p.eta = 0.5;
  p.cavities = {{{0.5, 0.5}, CavityShape::unit_disk()}};
  const ScaledCavity c = scaled_cavity(p, 0);
  CHECK(c.contains({0.52, 0.5}));
  CHECK_FALSE(c.contains({0.56, 0.5}));

  const ScaledCavity star({0.5, 0.5}, 0.05, CavityShape::star(FourierProfile{0.8, {0.0, 0.0, 0.1}, {}}));
  CHECK(star.shape().radius(0.0) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(star.contains({0.5 + 0.9 * 0.05 * (1.0 - 1e-9), 0.5}));
  CHECK_FALSE(star.contains({0.5 + 0.9 * 0.05 * (1.0 + 1e-6), 0.5}));
  for (const Point q : star.boundary_polygon(24)) {
    const double th = std::atan2(q.y - 0.5, q.x - 0.5);
    CHECK(distance(q, {0.5, 0.5}) == doctest::Approx(0.05 * star.shape().radius(th)).epsilon(1e-12));
  }
}

TEST_CASE("Fourier profile interpolates its samples") {
  std::vector<double> s(9);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / 9.0;
    s[i] = 0.8 + 0.1 * std::cos(2.0 * th) - 0.05 * std::sin(th);
  }
  const FourierProfile f = FourierProfile::from_samples(s);
  CHECK(f.value(0.3) == doctest::Approx(0.8 + 0.1 * std::cos(0.6) - 0.05 * std::sin(0.3)).epsilon(1e-12));
  CHECK(f.derivative(0.3) == doctest::Approx(-0.2 * std::sin(0.6) - 0.05 * std::cos(0.3)).epsilon(1e-12));
}

TEST_CASE("domain queries") {
  const auto sq = DomainSpec::unit_square();
  CHECK(sq.area() == doctest::Approx(1.0));
  CHECK(sq.boundary_distance({0.2, 0.5}) == doctest::Approx(0.2));
  CHECK(sq.boundary_distance({1.2, 0.5}) < 0.0);
  const auto d = DomainSpec::disk({1.0, 2.0}, 0.5);
  CHECK(d.area() == doctest::Approx(std::numbers::pi * 0.25));
  CHECK(d.contains({1.2, 2.1}));
  CHECK(kind_of([] { DomainSpec::rectangle({0.0, 0.0}, {0.0, 1.0}); }) == ErrorKind::invalid_argument);
}

TEST_CASE("perforation JSON round trip") {
  GenerationOptions o;
  o.seed = 11;
  o.shape_preset = "star3";
  const auto p = generate_perforation(DomainSpec::unit_square(), 0.1, 0.4, {0.5, 1.0, 1.5}, o);
  const auto q = perforation_from_json(perforation_to_json(p));
  CHECK(perforation_to_json(q) == perforation_to_json(p));
  CHECK(q.cavities.size() == p.cavities.size());
  CHECK(kind_of([] { perforation_from_json("{\"epsilon\": 1"); }) == ErrorKind::validation);
}

TEST_CASE("mix_seed separates indices") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(5, 3) == mix_seed(5, 3));
}
