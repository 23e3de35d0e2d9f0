#include "perfhom/core/metrics.hpp"

#include <Eigen/SparseCholesky>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "perfhom/core/error.hpp"
#include "perfhom/core/theory.hpp"

namespace perfhom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double quadratic_form(const SparseMatrixR& a, const std::vector<Complex>& v) {
  const Eigen::Map<const VectorC> x(v.data(), static_cast<Eigen::Index>(v.size()));
  const VectorC ax = a.cast<Complex>() * x;
  return std::max(0.0, x.dot(ax).real());
}

void check_on_mesh(const Mesh& mesh, const std::vector<Complex>& v) {
  if (v.size() != mesh.vertex_count()) throw invalid_argument("nodal vector does not match the mesh");
}

}  // namespace

double l2_norm(const Mesh& mesh, const std::vector<Complex>& v) {
  check_on_mesh(mesh, v);
  return std::sqrt(quadratic_form(norm_matrices(mesh).mass, v));
}

double h1_seminorm(const Mesh& mesh, const std::vector<Complex>& v) {
  check_on_mesh(mesh, v);
  return std::sqrt(quadratic_form(norm_matrices(mesh).stiffness, v));
}

double h1_norm(const Mesh& mesh, const std::vector<Complex>& v) {
  check_on_mesh(mesh, v);
  const NormMatrices nm = norm_matrices(mesh);
  return std::sqrt(quadratic_form(nm.mass, v) + quadratic_form(nm.stiffness, v));
}

double forcing_l2_squared(const Mesh& mesh, const Forcing& f) {
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    for (std::size_t i = 0; i < 3; ++i) {
      const Point m = 0.5 * (mesh.vertices[static_cast<std::size_t>(tri[(i + 1) % 3])] +
                             mesh.vertices[static_cast<std::size_t>(tri[(i + 2) % 3])]);
      s += area / 3.0 * std::norm(f(m));
    }
  }
  return s;
}

double forcing_l2_theta(const Perforation& p, const Forcing& f) {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  constexpr int kAngles = 64;
  double s = 0.0;
  for (std::size_t k = 0; k < p.cavities.size(); ++k) {
    const ScaledCavity cav = scaled_cavity(p, k);
    const Point c = p.cavities[k].center;
    double sk = 0.0;
    for (int j = 0; j < kAngles; ++j) {
      const double phi = kTwoPi * j / kAngles;
      const Point edge = cav.boundary_point(phi);
      const double rmax = distance(edge, c);
      const Point dir{std::cos(phi), std::sin(phi)};
      const double radial = Rule::integrate(
          [&](double r) { return std::norm(f(c + r * dir)) * r; }, 0.0, rmax);
      sk += radial;
    }
    s += sk * kTwoPi / kAngles;
  }
  return std::sqrt(s);
}

ErrorNorms error_norms(const DiscreteFunction& u_eps, const DiscreteFunction& u_0, const Mesh& perf_mesh, const Forcing& f,
                       const Perforation* p) {
  if (u_eps.values.size() != perf_mesh.vertex_count()) throw invalid_argument("mesh mismatch: u_eps does not live on the perforated mesh");
  std::vector<Complex> u0_values;
  if (u_0.mesh.get() == &perf_mesh || (u_0.mesh && u_0.mesh->vertices == perf_mesh.vertices)) {
    u0_values = u_0.values;
  } else {
    auto target = std::make_shared<Mesh>(perf_mesh);
    u0_values = transfer(u_0, target).values;
  }
  std::vector<Complex> diff(u_eps.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u_eps.values[i] - u0_values[i];
  const NormMatrices nm = norm_matrices(perf_mesh);
  ErrorNorms e;
  const double m2 = quadratic_form(nm.mass, diff);
  e.l2 = std::sqrt(m2);
  e.h1 = std::sqrt(m2 + quadratic_form(nm.stiffness, diff));
  const double theta = p ? forcing_l2_theta(*p, f) : 0.0;
  e.f_l2_theta = theta;
  e.f_l2_omega = std::sqrt(forcing_l2_squared(perf_mesh, f) + theta * theta);
  return e;
}

ErrorNorms error_norms(const SolveResult& u_eps, const SolveResult& u_0, const Mesh& perf_mesh, const Forcing& f,
                       const Perforation* p) {
  return error_norms(u_eps.solution, u_0.solution, perf_mesh, f, p);
}

// ---------------------------------------------------------------------------
// Lemma constants

Eigen::VectorXd project_mean_zero(const Eigen::VectorXd& x, const Eigen::VectorXd& weights) {
  return x - Eigen::VectorXd::Constant(x.size(), weights.dot(x) / weights.sum());
}

LemmaPencil lemma_pencil(const std::string& id, double epsilon, double eta, const CavityShape& shape, int res,
                         const LemmaOptions& options) {
  if (id == "3.4") {
    throw unsupported("lemma id 3.4 involves second derivatives, which P1 elements cannot represent; its auxiliary function is checked in the theory module");
  }
  if (id != "3.1" && id != "3.3" && id != "3.6") throw invalid_argument("unknown lemma id '" + id + "' (3.1, 3.3, 3.6)");
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(eta > 0.0 && eta < 1.0)) throw invalid_argument("epsilon and eta must lie in (0, 1)");
  if (res < 8) throw invalid_argument("mesh_resolution must be at least 8");
  const Radii& R = options.radii;
  if (!(0.0 < R.r1 && R.r1 < R.r2 && R.r2 < R.r3)) throw invalid_argument("radii ordering (need 0 < R1 < R2 < R3)");
  if (shape.max_radius() > R.r2 || shape.min_radius() < R.r1) throw invalid_argument("cavity shape does not fit between R1 and R2");

  const double s = epsilon * eta;
  const ScaledCavity cav({0.0, 0.0}, s, shape);
  const double outer = id == "3.3" ? s * R.r3 : epsilon * R.r3;
  const double fine = kTwoPi * s / res;
  const double coarse = kTwoPi * outer / res;
  const double rim = cav.outer_radius();
  const double g = options.grading;
  SizeField size = [=](Point x) { return std::min(coarse, fine + g * std::max(0.0, norm(x) - rim)); };

  const auto n_cav = static_cast<std::size_t>(res);
  std::vector<CurveLoop> loops;
  // Region 1 holds the ball or ring carrying the left side for 3.6 and the right side ring for 3.1.
  if (id == "3.3") {
    loops = {circle_loop({0.0, 0.0}, outer, 0, kVoidRegion, 0, n_cav), cavity_loop(cav, kVoidRegion, 0, 1, n_cav)};
  } else if (id == "3.1") {
    loops = {circle_loop({0.0, 0.0}, outer, 1, kVoidRegion, 0, n_cav),
             circle_loop({0.0, 0.0}, epsilon * R.r2, 0, 1, -1, n_cav), cavity_loop(cav, kVoidRegion, 0, 1, n_cav)};
  } else {
    loops = {circle_loop({0.0, 0.0}, outer, 0, kVoidRegion, 0, n_cav),
             circle_loop({0.0, 0.0}, s * R.r3, 1, 0, -1, n_cav), cavity_loop(cav, kVoidRegion, 1, 1, n_cav)};
  }
  auto mesh = std::make_shared<Mesh>(triangulate(loops, size));
  const NormMatrices nm = norm_matrices(*mesh);
  const double kappa2 = varkappa(eta, 2);

  LemmaPencil pencil;
  pencil.mesh = mesh;
  if (id == "3.1") {
    pencil.lhs = boundary_mass(*mesh, 1);
    pencil.rhs = (s * kappa2) * nm.stiffness + (eta / epsilon) * region_mass(*mesh, 1);
  } else if (id == "3.6") {
    pencil.lhs = region_mass(*mesh, 1);
    pencil.rhs = (s * s * kappa2) * nm.stiffness + (eta * eta) * nm.mass;
  } else {
    pencil.lhs = boundary_mass(*mesh, 1);
    pencil.rhs = s * nm.stiffness;
    pencil.mean_weights = nm.mass * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh->vertex_count()));
  }
  return pencil;
}

LemmaConstant lemma_constant(const std::string& id, double epsilon, double eta, const CavityShape& shape, int res,
                             const LemmaOptions& options) {
  const LemmaPencil pencil = lemma_pencil(id, epsilon, eta, shape, res, options);
  const auto n = static_cast<Eigen::Index>(pencil.mesh->vertex_count());
  const bool constrained = pencil.mean_weights.size() > 0;

  SparseMatrixR rhs = pencil.rhs;
  if (constrained) {
    // Pin vertex 0: the mean-zero correction restores the dropped constant.
    rhs.prune([](Eigen::Index r, Eigen::Index c, double) { return r != 0 && c != 0; });
    rhs.coeffRef(0, 0) = 1.0;
  }
  Eigen::SimplicialLDLT<SparseMatrixR> ldlt(rhs);
  if (ldlt.info() != Eigen::Success) throw solver_error("factorization of the lemma right-hand form failed");

  auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd z = pencil.lhs * x;
    if (constrained) {
      z = z - pencil.mean_weights * (z.sum() / pencil.mean_weights.sum());
      z[0] = 0.0;
    }
    Eigen::VectorXd y = ldlt.solve(z);
    if (constrained) y = project_mean_zero(y, pencil.mean_weights);
    return y;
  };

  LemmaConstant out;
  out.lemma_id = id;
  out.epsilon = epsilon;
  out.eta = eta;
  out.vertices = static_cast<std::size_t>(n);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  if (!constrained) out.constant_probe = ones.dot(pencil.lhs * ones) / ones.dot(pencil.rhs * ones);

  // Deterministic start with every angular mode present.
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point p = pencil.mesh->vertices[static_cast<std::size_t>(i)];
    x[i] = 1.0 + 0.5 * std::sin(37.0 * p.x / epsilon + 1.0) + 0.25 * std::cos(53.0 * p.y / epsilon + 2.0) + p.x / epsilon;
  }
  if (constrained) x = project_mean_zero(x, pencil.mean_weights);
  double lambda = 0.0;
  bool converged = false;
  for (int it = 1; it <= options.max_iter; ++it) {
    Eigen::VectorXd y = apply(x);
    const double ry = y.dot(pencil.rhs * y);
    if (!(ry > 0.0)) throw solver_error("power iteration collapsed to the null space");
    y /= std::sqrt(ry);
    const double next = y.dot(pencil.lhs * y);
    x = std::move(y);
    out.iterations = it;
    if (it > 1 && std::abs(next - lambda) <= options.tol * std::abs(next)) {
      lambda = next;
      converged = true;
      break;
    }
    lambda = next;
  }
  if (!converged) throw solver_error("lemma power iteration did not converge in " + std::to_string(options.max_iter) + " iterations");
  const Eigen::VectorXd bx = pencil.lhs * x;
  Eigen::VectorXd r = bx - lambda * (pencil.rhs * x);
  if (constrained) {
    r = r - pencil.mean_weights * (r.sum() / pencil.mean_weights.sum());
  }
  out.best_constant = lambda;
  out.eigen_residual = r.norm() / bx.norm();
  return out;
}

}  // namespace perfhom
