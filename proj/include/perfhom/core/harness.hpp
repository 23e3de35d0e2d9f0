#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perfhom/core/geometry.hpp"
#include "perfhom/core/metrics.hpp"
#include "perfhom/core/problem.hpp"
#include "perfhom/core/solver.hpp"

namespace perfhom {

struct ExperimentConfig {
  std::string name = "sweep";
  DomainSpec domain = DomainSpec::unit_square();
  int dim = 2;
  std::uint64_t seed = 1;
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  std::string output_dir = "out";

  Radii radii{0.5, 1.0, 1.1};
  std::string shape_preset = "disk";
  /// Empty means fill to the packing bound.
  std::optional<std::size_t> target_count;
  /// When set, row eps places round(density |Omega| / eps^2) cavities.
  std::optional<double> density;

  ScalingLaw law = ScalingLaw::power(1.0, 1.0, 0.0, 1.0);

  std::string coefficients = "laplacian";
  std::string nonlinearity = "none";
  Complex lambda{-1.0, 0.0};
  /// Declared shift bound; estimated by bisection on the coarsest mesh when absent.
  std::optional<double> lambda0 = -1.0;
  std::string forcing = "mode22";

  /// Global edge length; cavities get min(h0, near_factor eps eta).
  double h0 = 0.05;
  double near_factor = 0.25;
  double grading = 0.3;
  std::size_t segments_per_cavity = 32;

  double tol = 1e-10;
  int max_iter = 100;

  bool compare_mu0 = false;
  bool lemma_constants = false;
  int lemma_resolution = 32;
  bool h_refinement_check = false;
};

ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::string& path);
/// Throws a validation error when the config breaks an invariant.
void validate_config(const ExperimentConfig& config);
/// Near-cavity mesh size used for row eps.
double mesh_size_for(const ExperimentConfig& config, double eps);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

/// Least squares on (ln eps, ln value).
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct MonomialExponent {
  std::string label;
  double exponent = 0.0;
  bool log_flag = false;
  bool active = true;
};

struct PredictedSlope {
  double slope = 0.0;
  std::string dominant;
  bool log_flag = false;
  std::vector<MonomialExponent> monomials;
};

/// Smallest eps-exponent among the active monomials of the bound under a power law.
PredictedSlope predicted_dominant_slope(const ScalingLaw& law, int dim, const std::string& which);

struct SweepRow {
  double epsilon = 0.0;
  double eta = 0.0;
  double mu = 0.0;
  double h = 0.0;
  std::size_t cavities = 0;
  std::size_t vertices = 0;
  double error_l2 = 0.0;
  double error_h1 = 0.0;
  double bound_w1 = 0.0;
  double bound_l2 = 0.0;
  /// NaN marks a degenerate ratio (zero error and bound).
  double ratio_h1 = 0.0;
  double ratio_l2 = 0.0;
  int picard_iters = 0;
  double contraction = 0.0;
  double f_l2_omega = 0.0;
  double f_l2_theta = 0.0;
  std::optional<double> robin_vs_mu0_h1;
  double seconds = 0.0;
  bool ok = true;
  std::string failed_stage;
  std::string message;
};

struct HRefinementCheck {
  double epsilon = 0.0;
  double h_coarse = 0.0;
  double h_fine = 0.0;
  double error_h1_coarse = 0.0;
  double error_h1_fine = 0.0;
  double relative_change = 0.0;
};

struct SweepReport {
  std::string name;
  int dim = 2;
  std::uint64_t seed = 0;
  std::string law;
  double gamma = 0.0;
  double delta = 0.0;
  bool mu_vanishes = true;
  std::string coefficients;
  std::string nonlinearity;
  std::string forcing;
  double lambda_re = 0.0;
  double lambda_im = 0.0;
  double lambda0 = 0.0;
  std::string lambda0_source;

  std::vector<SweepRow> rows;
  std::vector<LemmaConstant> lemma_rows;

  std::optional<RateFit> h1_fit;
  std::optional<RateFit> l2_fit;
  std::optional<RateFit> mu_fit;
  PredictedSlope predicted_w1;
  PredictedSlope predicted_l2;

  bool admissible = false;
  std::string admissibility_verdict;
  std::vector<double> admissibility_values;

  std::optional<HRefinementCheck> h_check;
};

/// Everything one row computes, kept for inspection and output.
struct SolveCase {
  std::shared_ptr<const Perforation> perforation;
  std::shared_ptr<const Mesh> filled_mesh;
  std::shared_ptr<const Mesh> perforated_mesh;
  SolveResult homogenized;  // on the filled mesh
  SolveResult perturbed;    // on the perforated mesh
  std::optional<SolveResult> perturbed_mu0;
  ErrorNorms norms;
  SweepRow row;
};

/// Lambda0 of the config: the declared value, or a bisection estimate on a coarse mesh of the domain.
double resolve_lambda0(const ExperimentConfig& config, std::string* source = nullptr);

/// Perforation of row index, seeded with mix_seed(seed, index).
Perforation generate_for_row(const ExperimentConfig& config, std::size_t index);

/// Runs row index of the config. Throws on failure; stage receives the name of the failing stage.
SolveCase solve_case(const ExperimentConfig& config, std::size_t index, double lambda0, std::string* stage = nullptr);

/// One row of a sweep on its own geometry. Stage failures are recorded in the row.
SweepRow run_row(const ExperimentConfig& config, std::size_t index, double lambda0);

SweepReport run_sweep(const ExperimentConfig& config, unsigned threads = 1);

std::string report_to_json(const SweepReport& report, int indent = 2);
SweepReport report_from_json(const std::string& text);
bool reports_equal(const SweepReport& a, const SweepReport& b);

std::string report_csv(const SweepReport& report);
std::string lemma_csv(const SweepReport& report);
std::string report_svg(const SweepReport& report);

/// Writes sweep.csv, report.json, the .dat series, chart.svg and lemma_constants.csv into dir.
/// formats selects a subset of {csv, json, dat, svg}; empty means all. Returns the written paths.
std::vector<std::string> emit_report(const SweepReport& report, const std::string& dir,
                                     const std::vector<std::string>& formats = {});

}  // namespace perfhom
