#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "perfhom/core/error.hpp"
#include "perfhom/core/metrics.hpp"

using namespace perfhom;

namespace {

std::shared_ptr<const Mesh> square(double h) { return std::make_shared<Mesh>(mesh_unperforated(DomainSpec::unit_square(), h)); }

DiscreteFunction field(std::shared_ptr<const Mesh> m, std::function<Complex(Point)> f) { return DiscreteFunction::interpolate(m, f); }

// Largest eigenvalue of (lhs, rhs) on the mean-zero subspace, by dense linear algebra.
double dense_mean_zero_max(const LemmaPencil& p) {
  const Eigen::MatrixXd B = Eigen::MatrixXd(p.lhs);
  const Eigen::MatrixXd K = Eigen::MatrixXd(p.rhs);
  const Eigen::Index n = B.rows();
  Eigen::MatrixXd w(n, 1);
  w.col(0) = p.mean_weights;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  const Eigen::MatrixXd Q = Eigen::MatrixXd(qr.householderQ()).rightCols(n - 1);
  const Eigen::MatrixXd Bq = Q.transpose() * B * Q;
  const Eigen::MatrixXd Kq = Q.transpose() * K * Q;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Bq, Kq, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("error norms of simple differences") {
  const auto m = square(0.1);
  const auto zero = field(m, [](Point) { return Complex{}; });
  const auto same = field(m, [](Point x) { return Complex{x.x * x.y, 1.0}; });
  const auto e0 = error_norms(same, same, *m, forcing_preset("one"));
  CHECK(e0.l2 == 0.0);
  CHECK(e0.h1 == 0.0);

  const auto one = error_norms(field(m, [](Point) { return Complex{1.0}; }), zero, *m, forcing_preset("one"));
  CHECK(one.l2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.h1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.f_l2_omega == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.f_l2_theta == 0.0);

  const auto x = error_norms(field(m, [](Point p) { return Complex{p.x}; }), zero, *m, forcing_preset("zero"));
  CHECK(x.l2 == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(x.h1 == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("constant difference on a disk gives sqrt of the area") {
  auto m = std::make_shared<Mesh>(mesh_unperforated(DomainSpec::unit_disk(), 0.05));
  const auto e = error_norms(field(m, [](Point) { return Complex{1.0}; }), field(m, [](Point) { return Complex{}; }), *m,
                             forcing_preset("zero"));
  CHECK(e.l2 == doctest::Approx(std::sqrt(m->area())).epsilon(1e-12));
  CHECK(e.h1 == doctest::Approx(std::sqrt(m->area())).epsilon(1e-12));
}

TEST_CASE("u0 on another mesh is transferred") {
  Perforation p;
  p.domain = DomainSpec::unit_square();
  p.epsilon = 0.2;
  p.eta = 0.5;
  p.radii = {0.5, 1.0, 1.5};
  p.cavities = {{{0.5, 0.5}, CavityShape::unit_disk()}};
  auto perf = std::make_shared<Mesh>(mesh_perforated(p, 0.05));
  auto whole = square(0.05);
  auto lin = [](Point x) { return Complex{x.x + 2.0 * x.y}; };
  const auto e = error_norms(field(perf, lin), field(whole, lin), *perf, forcing_preset("one"), &p);
  CHECK(e.l2 <= 1e-12);
  CHECK(e.h1 <= 1e-12);
  const double cavity_area = std::numbers::pi * 0.1 * 0.1;
  CHECK(e.f_l2_theta == doctest::Approx(std::sqrt(cavity_area)).epsilon(1e-10));
  CHECK(e.f_l2_omega == doctest::Approx(1.0).epsilon(1e-3));
  CHECK_THROWS(error_norms(field(whole, lin), field(whole, lin), *perf, forcing_preset("one")));
}

TEST_CASE("trace constant matches a dense eigensolver at double resolution") {
  const auto shape = CavityShape::unit_disk();
  const auto c = lemma_constant("3.3", 0.1, 0.5, shape, 32);
  const auto fine = lemma_pencil("3.3", 0.1, 0.5, shape, 64);
  const double dense = dense_mean_zero_max(fine);
  CHECK(c.best_constant == doctest::Approx(dense).epsilon(0.05));
  CHECK(c.eigen_residual <= 1e-3);
}

TEST_CASE("mean-zero projection annihilates constants") {
  const auto p = lemma_pencil("3.3", 0.1, 0.5, CavityShape::unit_disk(), 16);
  const Eigen::VectorXd ones = Eigen::VectorXd::Constant(p.mean_weights.size(), 3.5);
  CHECK(project_mean_zero(ones, p.mean_weights).norm() <= 1e-12);
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(p.mean_weights.size(), -1.0, 2.0);
  CHECK(std::abs(p.mean_weights.dot(project_mean_zero(v, p.mean_weights))) <= 1e-12);
}

TEST_CASE("constant probes are admissible test functions") {
  for (double eta : {0.5, 0.25}) {
    const auto c = lemma_constant("3.1", 0.1, eta, CavityShape::unit_disk(), 24);
    CHECK(c.constant_probe > 0.0);
    CHECK(c.constant_probe <= c.best_constant * (1.0 + 1e-8));
    const auto d = lemma_constant("3.6", 0.1, eta, CavityShape::unit_disk(), 24);
    CHECK(d.constant_probe <= d.best_constant * (1.0 + 1e-8));
  }
}

TEST_CASE("lemma constants do not drift with epsilon") {
  for (const char* id : {"3.1", "3.3", "3.6"}) {
    const double a = lemma_constant(id, 0.2, 0.5, CavityShape::unit_disk(), 16).best_constant;
    const double b = lemma_constant(id, 0.05, 0.5, CavityShape::unit_disk(), 16).best_constant;
    CHECK(a == doctest::Approx(b).epsilon(1e-3));
  }
}

TEST_CASE("lemma errors") {
  try {
    lemma_constant("3.4", 0.1, 0.5, CavityShape::unit_disk(), 16);
    FAIL("3.4 should be unsupported");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unsupported);
  }
  CHECK_THROWS(lemma_constant("2.9", 0.1, 0.5, CavityShape::unit_disk(), 16));
  CHECK_THROWS(lemma_constant("3.1", 1.5, 0.5, CavityShape::unit_disk(), 16));
  CHECK_THROWS(lemma_constant("3.1", 0.1, 0.5, CavityShape::unit_disk(), 4));
}
