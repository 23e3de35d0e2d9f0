#include "perfhom/core/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "perfhom/core/error.hpp"

namespace perfhom {

namespace {

using TripletC = Eigen::Triplet<Complex>;
using TripletR = Eigen::Triplet<double>;

struct ElementGeometry {
  std::array<Point, 3> x;
  std::array<Point, 3> grad;  // gradients of the barycentric hats
  double area = 0.0;
};

ElementGeometry element_geometry(Point a, Point b, Point c) {
  ElementGeometry g;
  g.x = {a, b, c};
  const double det = cross(b - a, c - a);
  if (!(det > 0.0)) throw mesh_error("degenerate or clockwise triangle in assembly");
  g.area = 0.5 * det;
  for (int i = 0; i < 3; ++i) {
    const Point p = g.x[static_cast<std::size_t>((i + 1) % 3)];
    const Point q = g.x[static_cast<std::size_t>((i + 2) % 3)];
    g.grad[static_cast<std::size_t>(i)] = {(p.y - q.y) / det, (q.x - p.x) / det};
  }
  return g;
}

ElementGeometry element_geometry(const Mesh& m, std::size_t t) {
  const auto& tri = m.triangles[t];
  return element_geometry(m.vertices[static_cast<std::size_t>(tri[0])], m.vertices[static_cast<std::size_t>(tri[1])],
                          m.vertices[static_cast<std::size_t>(tri[2])]);
}

double gauss_offset() { return 0.5 / std::sqrt(3.0); }

}  // namespace

std::array<std::array<Complex, 3>, 3> element_matrix(Point a, Point b, Point c, const Coefficients& coeffs, Complex lambda) {
  const ElementGeometry g = element_geometry(a, b, c);
  const Point mid = (1.0 / 3.0) * (a + b + c);
  const Matrix2c A = coeffs.A(mid);
  const Vector2c bv = coeffs.b(mid);
  const Complex shift = coeffs.c(mid) - lambda;
  std::array<std::array<Complex, 3>, 3> k{};
  for (std::size_t q = 0; q < 3; ++q) {
    for (std::size_t p = 0; p < 3; ++p) {
      const double gp[2] = {g.grad[p].x, g.grad[p].y};
      const double gq[2] = {g.grad[q].x, g.grad[q].y};
      Complex diff{};
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) diff += A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * gp[j] * gq[i];
      }
      const Complex conv = bv[0] * gp[0] + bv[1] * gp[1];
      const double mass = g.area / 12.0 * (p == q ? 2.0 : 1.0);
      k[q][p] = g.area * diff + g.area / 3.0 * conv + shift * mass;
    }
  }
  return k;
}

RobinQuadrature robin_quadrature(const Mesh& mesh) {
  RobinQuadrature r;
  const double off = gauss_offset();
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag <= 0) continue;
    const Point a = mesh.vertices[static_cast<std::size_t>(e.a)];
    const Point b = mesh.vertices[static_cast<std::size_t>(e.b)];
    r.edge_vertices.push_back({e.a, e.b});
    r.points.push_back({a + (0.5 - off) * (b - a), a + (0.5 + off) * (b - a)});
    r.weights.push_back(0.5 * distance(a, b));
    r.tags.push_back(e.tag);
  }
  return r;
}

VectorC AssembledSystem::restrict_to_dofs(const VectorC& full) const {
  VectorC out(static_cast<Eigen::Index>(dofs()));
  for (std::size_t d = 0; d < dofs(); ++d) out[static_cast<Eigen::Index>(d)] = full[vertex_of_dof[d]];
  return out;
}

VectorC AssembledSystem::extend_from_dofs(const VectorC& free) const {
  VectorC out = VectorC::Zero(static_cast<Eigen::Index>(dof_of_vertex.size()));
  for (std::size_t d = 0; d < dofs(); ++d) out[vertex_of_dof[d]] = free[static_cast<Eigen::Index>(d)];
  return out;
}

AssembledSystem assemble_volume(std::shared_ptr<const Mesh> mesh, const Coefficients& coeffs, Complex lambda, bool keep_all) {
  if (!mesh) throw invalid_argument("assembly needs a mesh");
  const Mesh& m = *mesh;
  AssembledSystem sys;
  sys.mesh = mesh;
  sys.dof_of_vertex.assign(m.vertex_count(), 0);
  if (!keep_all) {
    for (const auto& e : m.boundary_edges) {
      if (e.tag == 0) {
        sys.dof_of_vertex[static_cast<std::size_t>(e.a)] = -1;
        sys.dof_of_vertex[static_cast<std::size_t>(e.b)] = -1;
      }
    }
  }
  for (std::size_t v = 0; v < m.vertex_count(); ++v) {
    if (sys.dof_of_vertex[v] < 0) continue;
    sys.dof_of_vertex[v] = static_cast<int>(sys.vertex_of_dof.size());
    sys.vertex_of_dof.push_back(static_cast<int>(v));
  }
  std::vector<TripletC> trips;
  trips.reserve(9 * m.triangle_count());
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles[t];
    const auto k = element_matrix(m.vertices[static_cast<std::size_t>(tri[0])], m.vertices[static_cast<std::size_t>(tri[1])],
                                  m.vertices[static_cast<std::size_t>(tri[2])], coeffs, lambda);
    for (std::size_t q = 0; q < 3; ++q) {
      const int dq = sys.dof_of_vertex[static_cast<std::size_t>(tri[q])];
      if (dq < 0) continue;
      for (std::size_t p = 0; p < 3; ++p) {
        const int dp = sys.dof_of_vertex[static_cast<std::size_t>(tri[p])];
        if (dp < 0) continue;
        trips.emplace_back(dq, dp, k[q][p]);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(sys.dofs());
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  sys.matrix.makeCompressed();
  sys.robin = robin_quadrature(m);
  return sys;
}

VectorC assemble_load(const Mesh& mesh, const Forcing& f) {
  VectorC load = VectorC::Zero(static_cast<Eigen::Index>(mesh.vertex_count()));
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const ElementGeometry g = element_geometry(mesh, t);
    std::array<Complex, 3> fm;  // fm[i] at the midpoint of the edge opposite vertex i
    for (std::size_t i = 0; i < 3; ++i) fm[i] = f(0.5 * (g.x[(i + 1) % 3] + g.x[(i + 2) % 3]));
    for (std::size_t q = 0; q < 3; ++q) {
      load[tri[q]] += g.area / 6.0 * (fm[(q + 1) % 3] + fm[(q + 2) % 3]);
    }
  }
  return load;
}

VectorC robin_residual(const RobinQuadrature& quad, std::size_t vertex_count, const VectorC& u, const RobinNonlinearity& nl) {
  VectorC r = VectorC::Zero(static_cast<Eigen::Index>(vertex_count));
  if (nl.mu == 0.0) return r;
  const double off = gauss_offset();
  const double ts[2] = {0.5 - off, 0.5 + off};
  for (std::size_t e = 0; e < quad.edge_count(); ++e) {
    const int a = quad.edge_vertices[e][0];
    const int b = quad.edge_vertices[e][1];
    for (int g = 0; g < 2; ++g) {
      const double t = ts[g];
      const Complex ug = (1.0 - t) * u[a] + t * u[b];
      const Complex val = quad.weights[e] * nl.a(quad.points[e][static_cast<std::size_t>(g)], ug);
      r[a] += (1.0 - t) * val;
      r[b] += t * val;
    }
  }
  return r;
}

VectorC robin_residual(const Mesh& mesh, const DiscreteFunction& u, const RobinNonlinearity& nl) {
  if (u.values.size() != mesh.vertex_count()) throw invalid_argument("function does not live on this mesh");
  const VectorC uv = Eigen::Map<const VectorC>(u.values.data(), static_cast<Eigen::Index>(u.values.size()));
  return robin_residual(robin_quadrature(mesh), mesh.vertex_count(), uv, nl);
}

NormMatrices norm_matrices(const Mesh& mesh) {
  std::vector<TripletR> ks;
  std::vector<TripletR> ms;
  ks.reserve(9 * mesh.triangle_count());
  ms.reserve(9 * mesh.triangle_count());
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const ElementGeometry g = element_geometry(mesh, t);
    for (std::size_t q = 0; q < 3; ++q) {
      for (std::size_t p = 0; p < 3; ++p) {
        ks.emplace_back(tri[q], tri[p], g.area * dot(g.grad[p], g.grad[q]));
        ms.emplace_back(tri[q], tri[p], g.area / 12.0 * (p == q ? 2.0 : 1.0));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  NormMatrices out;
  out.stiffness.resize(n, n);
  out.mass.resize(n, n);
  out.stiffness.setFromTriplets(ks.begin(), ks.end());
  out.mass.setFromTriplets(ms.begin(), ms.end());
  return out;
}

SparseMatrixR boundary_mass(const Mesh& mesh, int tag) {
  std::vector<TripletR> trips;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != tag) continue;
    const double len = distance(mesh.vertices[static_cast<std::size_t>(e.a)], mesh.vertices[static_cast<std::size_t>(e.b)]);
    trips.emplace_back(e.a, e.a, len / 3.0);
    trips.emplace_back(e.b, e.b, len / 3.0);
    trips.emplace_back(e.a, e.b, len / 6.0);
    trips.emplace_back(e.b, e.a, len / 6.0);
  }
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  SparseMatrixR b(n, n);
  b.setFromTriplets(trips.begin(), trips.end());
  return b;
}

SparseMatrixR region_mass(const Mesh& mesh, int region) {
  std::vector<TripletR> ms;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    if (mesh.triangle_region[t] != region) continue;
    const auto& tri = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    for (std::size_t q = 0; q < 3; ++q) {
      for (std::size_t p = 0; p < 3; ++p) ms.emplace_back(tri[q], tri[p], area / 12.0 * (p == q ? 2.0 : 1.0));
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  SparseMatrixR m(n, n);
  m.setFromTriplets(ms.begin(), ms.end());
  return m;
}

// ---------------------------------------------------------------------------
// Linear solver

struct LinearSolver::Impl {
  Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>> lu;
  Eigen::BiCGSTAB<SparseMatrixC, Eigen::IncompleteLUT<Complex>> krylov;
  const SparseMatrixC* matrix = nullptr;
  SparseMatrixC owned;
  bool direct = true;
};

LinearSolver::LinearSolver(LinearSolverOptions options) : impl_(std::make_unique<Impl>()), options_(options) {}
LinearSolver::~LinearSolver() = default;

void LinearSolver::compute(const SparseMatrixC& a) {
  const auto start = std::chrono::steady_clock::now();
  impl_->owned = a;
  impl_->owned.makeCompressed();
  impl_->matrix = &impl_->owned;
  stats_ = {};
  stats_.dofs = static_cast<std::size_t>(a.rows());
  stats_.nonzeros = static_cast<std::size_t>(a.nonZeros());
  impl_->direct = stats_.dofs <= options_.iterative_threshold;
  if (impl_->direct) {
    impl_->lu.analyzePattern(impl_->owned);
    impl_->lu.factorize(impl_->owned);
    if (impl_->lu.info() != Eigen::Success) impl_->direct = false;
  }
  if (impl_->direct) {
    stats_.backend = "sparse-lu";
  } else {
    stats_.backend = "bicgstab-ilut";
    impl_->krylov.setTolerance(options_.iterative_tolerance);
    impl_->krylov.setMaxIterations(options_.iterative_max_iterations);
    impl_->krylov.compute(impl_->owned);
    if (impl_->krylov.info() != Eigen::Success) throw solver_error("incomplete LU preconditioner failed");
  }
  stats_.factor_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

VectorC LinearSolver::solve(const VectorC& rhs) {
  if (!impl_->matrix) throw solver_error("linear solver used before compute()");
  VectorC x;
  if (impl_->direct) {
    x = impl_->lu.solve(rhs);
    if (impl_->lu.info() != Eigen::Success) throw solver_error("sparse LU solve failed");
  } else {
    x = impl_->krylov.solve(rhs);
    stats_.iterative_iterations += static_cast<int>(impl_->krylov.iterations());
    if (impl_->krylov.info() != Eigen::Success) throw solver_error("iterative solver did not reach the residual tolerance");
  }
  const double bn = rhs.norm();
  const double res = bn > 0.0 ? ((*impl_->matrix) * x - rhs).norm() / bn : 0.0;
  stats_.relative_residual = std::max(stats_.relative_residual, res);
  if (!std::isfinite(res) || res > 1e-6) throw solver_error("linear solve residual too large");
  ++stats_.solves;
  return x;
}

// ---------------------------------------------------------------------------
// Nonlinear solves

namespace {

double h1_norm(const SparseMatrixR& h1, const VectorC& v) {
  const VectorC w = h1 * v;
  return std::sqrt(std::max(0.0, v.dot(w).real()));
}

SparseMatrixR free_h1_matrix(const AssembledSystem& sys) {
  const NormMatrices nm = norm_matrices(*sys.mesh);
  const SparseMatrixR full = nm.stiffness + nm.mass;
  std::vector<TripletR> trips;
  for (int k = 0; k < full.outerSize(); ++k) {
    for (SparseMatrixR::InnerIterator it(full, k); it; ++it) {
      const int r = sys.dof_of_vertex[static_cast<std::size_t>(it.row())];
      const int c = sys.dof_of_vertex[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  }
  const auto n = static_cast<Eigen::Index>(sys.dofs());
  SparseMatrixR out(n, n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

std::vector<Complex> to_values(const VectorC& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

SolveResult solve_perturbed(const ProblemSpec& spec, std::shared_ptr<const Mesh> mesh, const SolveOptions& options) {
  check_problem(spec);
  if (!(options.tol > 0.0) || options.max_iter < 1) throw invalid_argument("solver needs tol > 0 and max_iter >= 1");
  const AssembledSystem sys = assemble_volume(mesh, spec.coefficients, spec.lambda);
  const std::size_t nv = mesh->vertex_count();
  const VectorC load = sys.restrict_to_dofs(assemble_load(*mesh, spec.f));
  LinearSolver solver(options.linear);
  solver.compute(sys.matrix);

  SolveResult result;
  VectorC u = solver.solve(load);
  result.picard_iterations = 1;
  const bool linear_only = spec.nonlinearity.mu == 0.0 || sys.robin.edge_count() == 0;
  if (linear_only) {
    result.converged = true;
  } else {
    const SparseMatrixR h1 = free_h1_matrix(sys);
    double prev_diff = -1.0;
    int growing = 0;
    while (result.picard_iterations < options.max_iter) {
      const VectorC r = sys.restrict_to_dofs(robin_residual(sys.robin, nv, sys.extend_from_dofs(u), spec.nonlinearity));
      VectorC next = solver.solve(load - r);
      ++result.picard_iterations;
      const double diff = h1_norm(h1, next - u);
      result.picard_residual_history.push_back(diff);
      u = std::move(next);
      if (prev_diff > 0.0) {
        const double ratio = diff / prev_diff;
        result.contraction_estimate = std::max(result.contraction_estimate, ratio);
        growing = ratio >= 1.0 ? growing + 1 : 0;
        if (growing >= 3) {
          std::ostringstream msg;
          msg << "Picard iteration is not contracting (ratio " << ratio
              << " for 3 consecutive iterations); use a smaller mu or a more negative Re(lambda)";
          throw solver_error(msg.str());
        }
      }
      if (diff <= options.tol) {
        result.converged = true;
        break;
      }
      prev_diff = diff;
    }
    if (!result.converged) {
      throw solver_error("Picard iteration did not reach tol " + std::to_string(options.tol) + " in " +
                         std::to_string(options.max_iter) + " iterations");
    }
  }
  result.solution = DiscreteFunction(mesh, to_values(sys.extend_from_dofs(u)));
  result.linear_solver_stats = solver.stats();
  return result;
}

SolveResult solve_homogenized(const Coefficients& coeffs, Complex lambda, const Forcing& f, std::shared_ptr<const Mesh> mesh,
                              const SolveOptions& options) {
  const AssembledSystem sys = assemble_volume(mesh, coeffs, lambda);
  LinearSolver solver(options.linear);
  solver.compute(sys.matrix);
  const VectorC u = solver.solve(sys.restrict_to_dofs(assemble_load(*mesh, f)));
  SolveResult result;
  result.picard_iterations = 1;
  result.converged = true;
  result.solution = DiscreteFunction(mesh, to_values(sys.extend_from_dofs(u)));
  result.linear_solver_stats = solver.stats();
  return result;
}

double estimate_lambda0(const Coefficients& coeffs, std::shared_ptr<const Mesh> mesh, double lo, double hi, double tol) {
  const AssembledSystem sys = assemble_volume(mesh, coeffs, Complex{});
  const SparseMatrixC herm = 0.5 * (sys.matrix + SparseMatrixC(sys.matrix.adjoint()));
  const SparseMatrixR h1 = free_h1_matrix(sys);
  // Free-dof mass: H1 minus the stiffness restricted the same way.
  AssembledSystem lap = assemble_volume(mesh, coefficients_preset("laplacian"), Complex{});
  const SparseMatrixC mass_c = SparseMatrixC(h1.cast<Complex>()) - lap.matrix;
  const SparseMatrixC base = herm - SparseMatrixC((0.5 * coeffs.c1) * h1.cast<Complex>());
  auto positive_definite = [&](double lambda) {
    const SparseMatrixC h = base - SparseMatrixC(lambda * mass_c);
    Eigen::SimplicialLDLT<SparseMatrixC> ldlt(h);
    if (ldlt.info() != Eigen::Success) return false;
    const auto d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (!(d[i].real() > 0.0)) return false;
    }
    return true;
  };
  if (!positive_definite(lo)) throw solver_error("no coercive shift found: the form fails at lambda = " + std::to_string(lo));
  if (positive_definite(hi)) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (positive_definite(mid) ? lo : hi) = mid;
  }
  return lo;
}

// ---------------------------------------------------------------------------
// Serialization

std::string solve_result_to_json(const SolveResult& r, int indent) {
  nlohmann::json j;
  j["picard_iterations"] = r.picard_iterations;
  j["picard_residual_history"] = r.picard_residual_history;
  j["contraction_estimate"] = r.contraction_estimate;
  j["converged"] = r.converged;
  j["vertex_count"] = r.solution.mesh ? r.solution.mesh->vertex_count() : 0;
  j["triangle_count"] = r.solution.mesh ? r.solution.mesh->triangle_count() : 0;
  const auto& s = r.linear_solver_stats;
  j["linear_solver_stats"] = {{"backend", s.backend},
                              {"dofs", s.dofs},
                              {"nonzeros", s.nonzeros},
                              {"solves", s.solves},
                              {"iterative_iterations", s.iterative_iterations},
                              {"relative_residual", s.relative_residual},
                              {"factor_seconds", s.factor_seconds}};
  return j.dump(indent);
}

void write_solution_binary(const SolveResult& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  for (const Complex& z : r.solution.values) {
    for (double v : {z.real(), z.imag()}) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw io_error("write failed for " + path);
}

std::vector<Complex> read_solution_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::vector<Complex> out;
  std::uint64_t bits[2];
  while (in.read(reinterpret_cast<char*>(bits), sizeof bits)) {
    if constexpr (std::endian::native == std::endian::big) {
      bits[0] = __builtin_bswap64(bits[0]);
      bits[1] = __builtin_bswap64(bits[1]);
    }
    out.emplace_back(std::bit_cast<double>(bits[0]), std::bit_cast<double>(bits[1]));
  }
  if (in.gcount() != 0) throw io_error("truncated solution file " + path);
  return out;
}

}  // namespace perfhom
