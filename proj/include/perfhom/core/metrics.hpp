#pragma once

#include <string>
#include <vector>

#include "perfhom/core/geometry.hpp"
#include "perfhom/core/mesh.hpp"
#include "perfhom/core/problem.hpp"
#include "perfhom/core/solver.hpp"

namespace perfhom {

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;
  double f_l2_omega = 0.0;
  double f_l2_theta = 0.0;
};

/// Exact P1 norms of a nodal field.
double l2_norm(const Mesh& mesh, const std::vector<Complex>& v);
double h1_seminorm(const Mesh& mesh, const std::vector<Complex>& v);
double h1_norm(const Mesh& mesh, const std::vector<Complex>& v);

/// Edge-midpoint quadrature of |f|^2 over the mesh.
double forcing_l2_squared(const Mesh& mesh, const Forcing& f);
/// Polar Gauss quadrature of |f|^2 over the cavity interiors.
double forcing_l2_theta(const Perforation& p, const Forcing& f);

/// Norms of u_eps - u_0 over the perforated mesh. u_0 is transferred when it lives on another mesh.
/// Without a perforation the theta norm is zero.
ErrorNorms error_norms(const DiscreteFunction& u_eps, const DiscreteFunction& u_0, const Mesh& perf_mesh,
                       const Forcing& f, const Perforation* p = nullptr);
ErrorNorms error_norms(const SolveResult& u_eps, const SolveResult& u_0, const Mesh& perf_mesh, const Forcing& f,
                       const Perforation* p = nullptr);

struct LemmaConstant {
  std::string lemma_id;
  double epsilon = 0.0;
  double eta = 0.0;
  double best_constant = 0.0;
  double eigen_residual = 0.0;
  int iterations = 0;
  std::size_t vertices = 0;
  /// Rayleigh quotient of the constant function (zero for 3.3, where constants are excluded).
  double constant_probe = 0.0;
};

struct LemmaOptions {
  Radii radii{0.5, 1.0, 1.5};
  double tol = 1e-8;
  int max_iter = 20000;
  /// Outward mesh grading away from the cavity.
  double grading = 0.25;
};

/// Geometry of one lemma: the mesh plus the matrices of its generalized pencil.
struct LemmaPencil {
  std::shared_ptr<const Mesh> mesh;
  SparseMatrixR lhs;
  SparseMatrixR rhs;
  /// Mean weights (mass times ones) for the mean-zero constraint; empty when unconstrained.
  Eigen::VectorXd mean_weights;
};

LemmaPencil lemma_pencil(const std::string& lemma_id, double epsilon, double eta, const CavityShape& shape,
                         int mesh_resolution, const LemmaOptions& options = {});

/// Largest generalized eigenvalue of (boundary or ball form, weighted right-hand form) by power iteration.
LemmaConstant lemma_constant(const std::string& lemma_id, double epsilon, double eta, const CavityShape& shape,
                             int mesh_resolution, const LemmaOptions& options = {});

/// Projection onto the discretely mean-zero subspace.
Eigen::VectorXd project_mean_zero(const Eigen::VectorXd& x, const Eigen::VectorXd& weights);

}  // namespace perfhom
