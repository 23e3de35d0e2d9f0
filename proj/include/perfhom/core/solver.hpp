#pragma once

#include <Eigen/Sparse>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "perfhom/core/mesh.hpp"
#include "perfhom/core/problem.hpp"

namespace perfhom {

using SparseMatrixC = Eigen::SparseMatrix<Complex>;
using SparseMatrixR = Eigen::SparseMatrix<double>;
using VectorC = Eigen::VectorXcd;

/// Local matrix of h(phi_p, phi_q) - lambda (phi_p, phi_q) on one triangle, entry (q, p).
std::array<std::array<Complex, 3>, 3> element_matrix(Point a, Point b, Point c, const Coefficients& coeffs, Complex lambda);

/// Two-point Gauss rule on every cavity-tagged boundary edge.
struct RobinQuadrature {
  std::vector<std::array<int, 2>> edge_vertices;
  std::vector<std::array<Point, 2>> points;
  std::vector<double> weights;  // per point, half the edge length
  std::vector<int> tags;

  std::size_t edge_count() const { return edge_vertices.size(); }
};

RobinQuadrature robin_quadrature(const Mesh& mesh);

struct AssembledSystem {
  std::shared_ptr<const Mesh> mesh;
  /// Free-by-free when Dirichlet rows are eliminated, vertex-by-vertex otherwise.
  SparseMatrixC matrix;
  /// -1 on constrained (outer boundary) vertices.
  std::vector<int> dof_of_vertex;
  std::vector<int> vertex_of_dof;
  RobinQuadrature robin;

  std::size_t dofs() const { return vertex_of_dof.size(); }
  VectorC restrict_to_dofs(const VectorC& full) const;
  VectorC extend_from_dofs(const VectorC& free) const;
};

/// Volume form minus lambda mass; outer-boundary (tag 0) vertices are eliminated unless keep_all is set.
AssembledSystem assemble_volume(std::shared_ptr<const Mesh> mesh, const Coefficients& coeffs, Complex lambda,
                                bool keep_all = false);

/// (f, phi_q) for every vertex, with the edge-midpoint rule.
VectorC assemble_load(const Mesh& mesh, const Forcing& f);

/// (a(., u), phi_q) over all cavity-tagged edges, for every vertex.
VectorC robin_residual(const Mesh& mesh, const DiscreteFunction& u, const RobinNonlinearity& nl);
VectorC robin_residual(const RobinQuadrature& quad, std::size_t vertex_count, const VectorC& u, const RobinNonlinearity& nl);

/// P1 stiffness (identity diffusion) and mass matrices over all vertices.
struct NormMatrices {
  SparseMatrixR stiffness;
  SparseMatrixR mass;
};
NormMatrices norm_matrices(const Mesh& mesh);
/// Boundary mass on edges carrying one tag, over all vertices.
SparseMatrixR boundary_mass(const Mesh& mesh, int tag);
/// Mass matrix restricted to triangles of one region.
SparseMatrixR region_mass(const Mesh& mesh, int region);

struct LinearSolverOptions {
  /// Systems with more unknowns than this go straight to the iterative solver.
  std::size_t iterative_threshold = 4'000'000;
  double iterative_tolerance = 1e-12;
  int iterative_max_iterations = 20000;
};

struct LinearSolverStats {
  std::string backend;
  std::size_t dofs = 0;
  std::size_t nonzeros = 0;
  std::size_t solves = 0;
  int iterative_iterations = 0;
  double relative_residual = 0.0;
  double factor_seconds = 0.0;
};

/// Sparse direct LU on complex matrices with an iterative fallback.
class LinearSolver {
 public:
  explicit LinearSolver(LinearSolverOptions options = {});
  ~LinearSolver();
  LinearSolver(const LinearSolver&) = delete;
  LinearSolver& operator=(const LinearSolver&) = delete;

  void compute(const SparseMatrixC& a);
  VectorC solve(const VectorC& rhs);
  const LinearSolverStats& stats() const { return stats_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  LinearSolverOptions options_;
  LinearSolverStats stats_;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 100;
  LinearSolverOptions linear;
};

struct SolveResult {
  DiscreteFunction solution;
  int picard_iterations = 0;
  /// H1 norms of successive differences, one entry per iteration after the first.
  std::vector<double> picard_residual_history;
  /// Largest ratio of successive differences; 0 when fewer than two differences exist.
  double contraction_estimate = 0.0;
  bool converged = false;
  LinearSolverStats linear_solver_stats;
};

/// Picard iteration u <- K^{-1}(F - R(u)) for the perforated problem.
SolveResult solve_perturbed(const ProblemSpec& spec, std::shared_ptr<const Mesh> mesh, const SolveOptions& options = {});

/// Single linear solve with Dirichlet data on the outer boundary and no Robin term.
SolveResult solve_homogenized(const Coefficients& coeffs, Complex lambda, const Forcing& f,
                              std::shared_ptr<const Mesh> mesh, const SolveOptions& options = {});

/// Largest real lambda keeping Herm(K_0) - lambda M - (c1/2)(S + M) positive definite, by bisection.
double estimate_lambda0(const Coefficients& coeffs, std::shared_ptr<const Mesh> mesh, double lo = -1000.0,
                        double hi = 1000.0, double tol = 1e-3);

std::string solve_result_to_json(const SolveResult& r, int indent = 2);
/// Little-endian float64 (re, im) pairs, one per vertex.
void write_solution_binary(const SolveResult& r, const std::string& path);
std::vector<Complex> read_solution_binary(const std::string& path);

}  // namespace perfhom
