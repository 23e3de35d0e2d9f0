#pragma once

#include <string>
#include <utility>
#include <vector>

namespace perfhom {

/// 0 for dim 2 and 3, |ln eta|^{1/2} for dim 4, 1 for dim >= 5.
double kappa(double eta, int dim);
/// |ln eta| for dim 2, 1 for dim >= 3.
double varkappa(double eta, int dim);

struct RateBound {
  int dim = 2;
  std::vector<std::pair<std::string, double>> terms;
  double total = 0.0;

  double term(const std::string& label) const;
};

/// W^1_2 bound without its constant: t1..t5.
RateBound bound_w1(double epsilon, double eta, double mu, int dim);
/// L_2 bound: mu group, eps^2 eta^2 varkappa and eta^dim against ||f||_Omega, the theta group against ||f||_theta.
RateBound bound_l2(double epsilon, double eta, double mu, int dim, double f_norm_omega, double f_norm_theta);

/// Decaying radial solution of -r^{1-n}(r^{n-1}X')' + X = 0 with X ~ r^{2-n} (dim >= 3) or -ln r (dim 2).
double radial_X(double r, int dim);
double radial_X_derivative(double r, int dim);

/// Piecewise auxiliary function: Delta X = 1 in B_{R3 eps eta}, harmonic in the shell, zero at |x| = R3 eps.
double auxiliary_X(double x_norm, double epsilon, double eta, int dim, double r3 = 1.5);

struct CorrectorAlpha {
  double alpha_0 = 0.0;
  double alpha_j = 0.0;
};
CorrectorAlpha corrector_alpha(double epsilon, double eta, double mu, int dim);

struct SharpnessResult {
  double epsilon = 0.0;
  double eta = 0.0;
  double mu = 0.0;
  double f_norm_lower = 0.0;
  double corrector_grad_norm = 0.0;
  double ratio = 0.0;
  /// Relative difference between the resolution and the doubled-resolution quadratures.
  double self_difference = 0.0;
};

/// First sharpness construction in dim 2: U0 = (rho - 1) s(rho), f0 = (-Delta + 1) u0, corrector
/// X(|x|) chi1(|x|) / (eps eta X'(eps eta)).
SharpnessResult sharpness_neumann(double epsilon, double eta, int quadrature_resolution = 64);
/// Same geometry with a linear Robin law of strength mu; the corrector amplitude becomes mu / (X' + mu X).
SharpnessResult sharpness_robin_vs_neumann(double epsilon, double eta, double mu, int quadrature_resolution = 64);

/// Smooth cutoffs of the construction.
double sharpness_cutoff_s(double rho);
double sharpness_chi1(double t);

}  // namespace perfhom
