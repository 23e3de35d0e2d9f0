#include "perfhom/core/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <toml.hpp>

#include "perfhom/core/error.hpp"
#include "perfhom/core/theory.hpp"

namespace perfhom {

namespace {

using json = nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// TOML helpers

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"name", "domain", "dim", "seed", "eps_list", "output"}},
      {"geometry", {"radii", "shape", "fill", "target_count", "density"}},
      {"scaling", {"eta0", "gamma", "mu0", "delta"}},
      {"problem", {"coefficients", "nonlinearity", "lambda", "lambda0", "forcing"}},
      {"mesh", {"h0", "near_factor", "grading", "segments_per_cavity"}},
      {"solver", {"tol", "max_iter"}},
      {"report", {"compare_mu0", "lemma_constants", "lemma_resolution", "h_refinement_check"}},
  };
  return keys;
}

double number(const toml::node& n, const std::string& where) {
  if (auto v = n.value<double>()) return *v;
  throw validation_error("config: " + where + " must be a number");
}

std::vector<double> numbers(const toml::node& n, const std::string& where) {
  const auto* arr = n.as_array();
  if (!arr) throw validation_error("config: " + where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : *arr) out.push_back(number(e, where));
  return out;
}

std::string text(const toml::node& n, const std::string& where) {
  if (auto v = n.value<std::string>()) return *v;
  throw validation_error("config: " + where + " must be a string");
}

bool flag(const toml::node& n, const std::string& where) {
  if (auto v = n.value<bool>()) return *v;
  throw validation_error("config: " + where + " must be true or false");
}

std::int64_t integer(const toml::node& n, const std::string& where) {
  if (auto v = n.value<std::int64_t>()) return *v;
  throw validation_error("config: " + where + " must be an integer");
}

Point point(const toml::node& n, const std::string& where) {
  const auto v = numbers(n, where);
  if (v.size() != 2) throw validation_error("config: " + where + " must have two entries");
  return {v[0], v[1]};
}

DomainSpec parse_domain(const toml::node& n) {
  if (n.is_string()) {
    const std::string k = text(n, "experiment.domain");
    if (k == "unit_square") return DomainSpec::unit_square();
    if (k == "unit_disk") return DomainSpec::unit_disk();
    throw validation_error("config: unknown domain preset '" + k + "' (unit_square, unit_disk)");
  }
  const auto* t = n.as_table();
  if (!t) throw validation_error("config: experiment.domain must be a preset name or a table");
  auto req = [&](const char* key) -> const toml::node& {
    const toml::node* n = t->get(key);
    if (!n) throw validation_error(std::string("config: experiment.domain.") + key + " is missing");
    return *n;
  };
  const std::string kind = text(req("kind"), "experiment.domain.kind");
  if (kind == "disk") return DomainSpec::disk(point(req("center"), "experiment.domain.center"), number(req("radius"), "experiment.domain.radius"));
  if (kind == "rectangle") return DomainSpec::rectangle(point(req("lo"), "experiment.domain.lo"), point(req("hi"), "experiment.domain.hi"));
  throw validation_error("config: unknown domain kind '" + kind + "' (disk, rectangle)");
}

// ---------------------------------------------------------------------------
// Numbers and formatting

std::string fmt(double v) {
  if (std::isnan(v)) return "degenerate";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json num(double v) { return std::isnan(v) ? json("degenerate") : json(v); }
double num_from(const json& j) {
  if (j.is_string()) return kNaN;
  return j.get<double>();
}

double safe_ratio(double a, double b) {
  if (a == 0.0 && b == 0.0) return kNaN;
  if (b == 0.0) return std::numeric_limits<double>::infinity();
  return a / b;
}

std::optional<RateFit> fit_if_possible(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3) return std::nullopt;
  for (const auto& p : pts) {
    if (!(p.second > 0.0) || !std::isfinite(p.second)) return std::nullopt;
  }
  return fit_rate(pts);
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ExperimentConfig parse_config(const std::string& toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw validation_error(msg.str());
  }
  for (const auto& [section, node] : root) {
    const std::string s(section.str());
    const auto it = known_keys().find(s);
    if (it == known_keys().end()) throw validation_error("config: unknown section [" + s + "]");
    const auto* t = node.as_table();
    if (!t) throw validation_error("config: [" + s + "] must be a table");
    for (const auto& [key, value] : *t) {
      (void)value;
      if (!it->second.count(std::string(key.str()))) {
        throw validation_error("config: unknown key '" + std::string(key.str()) + "' in [" + s + "]");
      }
    }
  }

  ExperimentConfig c;
  auto get = [&](const char* section, const char* key) -> const toml::node* { return root[section][key].node(); };
  auto where = [](const char* section, const char* key) { return std::string(section) + "." + key; };

  if (auto n = get("experiment", "name")) c.name = text(*n, "experiment.name");
  if (auto n = get("experiment", "domain")) c.domain = parse_domain(*n);
  if (auto n = get("experiment", "dim")) c.dim = static_cast<int>(integer(*n, "experiment.dim"));
  if (auto n = get("experiment", "seed")) {
    const auto s = integer(*n, "experiment.seed");
    if (s < 0) throw validation_error("config: experiment.seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto n = get("experiment", "eps_list")) c.eps_list = numbers(*n, "experiment.eps_list");
  if (auto n = get("experiment", "output")) c.output_dir = text(*n, "experiment.output");

  if (auto n = get("geometry", "radii")) {
    const auto r = numbers(*n, "geometry.radii");
    if (r.size() != 3) throw validation_error("config: geometry.radii needs three entries");
    c.radii = {r[0], r[1], r[2]};
  }
  if (auto n = get("geometry", "shape")) c.shape_preset = text(*n, "geometry.shape");
  if (auto n = get("geometry", "target_count")) {
    const auto t = integer(*n, "geometry.target_count");
    if (t < 0) throw validation_error("config: geometry.target_count must be nonnegative");
    c.target_count = static_cast<std::size_t>(t);
  }
  if (auto n = get("geometry", "density")) {
    if (c.target_count) throw validation_error("config: geometry.density and geometry.target_count are exclusive");
    c.density = number(*n, "geometry.density");
  }
  if (auto n = get("geometry", "fill")) {
    if (flag(*n, "geometry.fill")) {
      if (c.target_count || c.density) throw validation_error("config: geometry.fill excludes target_count and density");
    } else if (!c.target_count && !c.density) {
      throw validation_error("config: geometry.fill = false needs geometry.target_count");
    }
  }

  double eta0 = 1.0, gamma = 1.0, mu0 = 0.0, delta = 1.0;
  if (auto n = get("scaling", "eta0")) eta0 = number(*n, where("scaling", "eta0"));
  if (auto n = get("scaling", "gamma")) gamma = number(*n, where("scaling", "gamma"));
  if (auto n = get("scaling", "mu0")) mu0 = number(*n, where("scaling", "mu0"));
  if (auto n = get("scaling", "delta")) delta = number(*n, where("scaling", "delta"));
  try {
    c.law = ScalingLaw::power(eta0, gamma, mu0, delta);
  } catch (const Error& e) {
    throw validation_error(std::string("config: ") + e.what());
  }

  if (auto n = get("problem", "coefficients")) c.coefficients = text(*n, "problem.coefficients");
  if (auto n = get("problem", "nonlinearity")) c.nonlinearity = text(*n, "problem.nonlinearity");
  if (auto n = get("problem", "forcing")) c.forcing = text(*n, "problem.forcing");
  if (auto n = get("problem", "lambda")) {
    if (n->is_array()) {
      const auto v = numbers(*n, "problem.lambda");
      if (v.size() != 2) throw validation_error("config: problem.lambda as an array needs [re, im]");
      c.lambda = {v[0], v[1]};
    } else {
      c.lambda = {number(*n, "problem.lambda"), 0.0};
    }
  }
  if (auto n = get("problem", "lambda0")) {
    if (n->is_string()) {
      if (text(*n, "problem.lambda0") != "estimate") throw validation_error("config: problem.lambda0 must be a number or \"estimate\"");
      c.lambda0.reset();
    } else {
      c.lambda0 = number(*n, "problem.lambda0");
    }
  }

  if (auto n = get("mesh", "h0")) c.h0 = number(*n, "mesh.h0");
  if (auto n = get("mesh", "near_factor")) c.near_factor = number(*n, "mesh.near_factor");
  if (auto n = get("mesh", "grading")) c.grading = number(*n, "mesh.grading");
  if (auto n = get("mesh", "segments_per_cavity")) {
    const auto s = integer(*n, "mesh.segments_per_cavity");
    if (s < 3) throw validation_error("config: mesh.segments_per_cavity must be at least 3");
    c.segments_per_cavity = static_cast<std::size_t>(s);
  }

  if (auto n = get("solver", "tol")) c.tol = number(*n, "solver.tol");
  if (auto n = get("solver", "max_iter")) c.max_iter = static_cast<int>(integer(*n, "solver.max_iter"));

  if (auto n = get("report", "compare_mu0")) c.compare_mu0 = flag(*n, "report.compare_mu0");
  if (auto n = get("report", "lemma_constants")) c.lemma_constants = flag(*n, "report.lemma_constants");
  if (auto n = get("report", "lemma_resolution")) c.lemma_resolution = static_cast<int>(integer(*n, "report.lemma_resolution"));
  if (auto n = get("report", "h_refinement_check")) c.h_refinement_check = flag(*n, "report.h_refinement_check");

  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw validation_error("config: " + m); };
  if (c.dim != 2) fail("only dim = 2 is solved numerically");
  if (c.eps_list.empty()) fail("eps_list is empty");
  for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
    const double e = c.eps_list[i];
    if (!(e > 0.0 && e < 1.0)) fail("eps_list entries must lie in (0, 1)");
    if (i > 0 && !(e < c.eps_list[i - 1])) fail("eps_list must be strictly decreasing");
    const double eta = c.law.eta(e);
    if (!(eta > 0.0 && eta < 1.0)) fail("scaling law gives eta outside (0, 1) at eps = " + fmt(e));
  }
  if (!(c.radii.r1 > 0.0 && c.radii.r1 < c.radii.r2 && c.radii.r2 < c.radii.r3)) fail("radii ordering (need 0 < R1 < R2 < R3)");
  if (!(c.h0 > 0.0)) fail("mesh.h0 must be positive");
  if (!(c.near_factor > 0.0 && c.near_factor <= 0.5)) fail("mesh.near_factor must lie in (0, 0.5] so that h <= eps eta / 2");
  if (!(c.grading > 0.0)) fail("mesh.grading must be positive");
  if (!(c.tol > 0.0)) fail("solver.tol must be positive");
  if (c.max_iter < 1) fail("solver.max_iter must be at least 1");
  if (c.density && !(*c.density > 0.0)) fail("geometry.density must be positive");
  if (c.lemma_resolution < 8) fail("report.lemma_resolution must be at least 8");
  if (c.lambda0 && c.lambda.real() > *c.lambda0) fail("Re(lambda) exceeds the declared lambda0");
  try {
    coefficients_preset(c.coefficients);
    nonlinearity_preset(c.nonlinearity, 1.0);
    forcing_preset(c.forcing);
    shape_from_preset(c.shape_preset, c.radii, 0);
  } catch (const Error& e) {
    fail(e.what());
  }
}

double mesh_size_for(const ExperimentConfig& c, double eps) { return std::min(c.h0, c.near_factor * eps * c.law.eta(eps)); }

// ---------------------------------------------------------------------------
// Rates

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw invalid_argument("fit_rate needs at least 3 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [e, v] : points) {
    if (!(e > 0.0)) throw invalid_argument("fit_rate needs positive eps");
    if (!(v > 0.0)) throw invalid_argument("fit_rate needs positive values");
    const double x = std::log(e);
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw invalid_argument("fit_rate needs distinct eps values");
  RateFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double rss = 0.0;
  for (const auto& [e, v] : points) {
    const double d = std::log(v) - (f.intercept + f.slope * std::log(e));
    rss += d * d;
  }
  f.residual = std::sqrt(rss / n);
  return f;
}

PredictedSlope predicted_dominant_slope(const ScalingLaw& law, int dim, const std::string& which) {
  if (dim < 2) throw invalid_argument("dimension must be at least 2");
  if (which != "w1" && which != "l2") throw invalid_argument("which must be w1 or l2");
  const double d = dim;
  const double g = law.gamma;
  const bool has_mu = !law.mu_vanishes();
  const double m = has_mu ? law.delta : 0.0;
  // Logs only matter when eta actually shrinks with eps.
  const bool eta_moves = g > 0.0;
  const bool log_vk = dim == 2 && eta_moves;
  const bool kappa_on = dim >= 4;
  const bool log_k = dim == 4 && eta_moves;
  PredictedSlope p;
  if (which == "w1") {
    p.monomials = {
        {"t1", 2.0 + 2.0 * g + m, log_k, has_mu && kappa_on},
        {"t2", g * d / 2.0 + m, log_vk, has_mu},
        {"t3", -1.0 + g * (d - 1.0) + m, false, has_mu},
        {"t4", 1.0 + g, log_vk, true},
        {"t5", g * d / 2.0, false, true},
    };
  } else {
    // ||f||_theta scales like the square root of the cavity volume fraction, eta^{d/2}.
    p.monomials = {
        {"l1", 2.0 + 2.0 * g + m, log_k, has_mu && kappa_on},
        {"l2", g * d / 2.0 + m, log_vk, has_mu},
        {"l3", -1.0 + g * (d - 1.0) + m, false, has_mu},
        {"l4", 2.0 + 2.0 * g, log_vk, true},
        {"l5", g * d, false, true},
        {"l6", 1.0 + g + g * d / 2.0, log_vk, true},
        {"l7", g * d, false, true},
    };
  }
  p.slope = std::numeric_limits<double>::infinity();
  for (const auto& mono : p.monomials) {
    if (!mono.active) continue;
    if (mono.exponent < p.slope || (mono.exponent == p.slope && mono.log_flag && !p.log_flag)) {
      p.slope = mono.exponent;
      p.dominant = mono.label;
      p.log_flag = mono.log_flag;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Sweep

Perforation generate_for_row(const ExperimentConfig& c, std::size_t index) {
  const double eps = c.eps_list.at(index);
  GenerationOptions gen;
  gen.target_count = c.target_count;
  if (c.density) gen.target_count = static_cast<std::size_t>(std::lround(*c.density * c.domain.area() / (eps * eps)));
  gen.seed = mix_seed(c.seed, index);
  gen.shape_preset = c.shape_preset;
  return generate_perforation(c.domain, eps, c.law.eta(eps), c.radii, gen);
}

SolveCase solve_case(const ExperimentConfig& c, std::size_t index, double lambda0, std::string* stage_out) {
  std::string local;
  std::string& stage = stage_out ? *stage_out : local;
  SolveCase out;
  SweepRow& row = out.row;
  row.epsilon = c.eps_list.at(index);
  row.eta = c.law.eta(row.epsilon);
  row.mu = c.law.mu(row.epsilon);
  row.h = mesh_size_for(c, row.epsilon);

  stage = "generate";
  auto perf = std::make_shared<Perforation>(generate_for_row(c, index));
  out.perforation = perf;
  row.cavities = perf->cavities.size();

  stage = "mesh";
  PerforatedMeshOptions mo;
  mo.segments_per_cavity = c.segments_per_cavity;
  mo.near_factor = c.near_factor;
  mo.grading = c.grading;
  auto filled = std::make_shared<Mesh>(mesh_filled(*perf, c.h0, mo));
  std::vector<int> map;
  auto perforated = std::make_shared<Mesh>(extract_region(*filled, 0, &map));
  out.filled_mesh = filled;
  out.perforated_mesh = perforated;
  row.vertices = perforated->vertex_count();

  const Coefficients coeffs = coefficients_preset(c.coefficients);
  const Forcing f = forcing_preset(c.forcing);
  SolveOptions so;
  so.tol = c.tol;
  so.max_iter = c.max_iter;

  stage = "solve_homogenized";
  out.homogenized = solve_homogenized(coeffs, c.lambda, f, filled, so);

  stage = "solve_perturbed";
  ProblemSpec spec;
  spec.coefficients = coeffs;
  spec.nonlinearity = nonlinearity_preset(c.nonlinearity, row.mu);
  spec.lambda = c.lambda;
  spec.lambda0 = lambda0;
  spec.f = f;
  spec.perforation = perf;
  out.perturbed = solve_perturbed(spec, perforated, so);
  row.picard_iters = out.perturbed.picard_iterations;
  row.contraction = out.perturbed.contraction_estimate;

  stage = "transfer";
  // The perforated mesh is a sub-mesh of the filled one, so u0 restricts exactly.
  std::vector<Complex> restricted(perforated->vertex_count());
  for (std::size_t v = 0; v < map.size(); ++v) {
    if (map[v] >= 0) restricted[static_cast<std::size_t>(map[v])] = out.homogenized.solution.values[v];
  }
  const DiscreteFunction u0_on_perf(perforated, std::move(restricted));

  stage = "norms";
  out.norms = error_norms(out.perturbed.solution, u0_on_perf, *perforated, f, perf.get());
  const ErrorNorms& en = out.norms;
  row.error_l2 = en.l2;
  row.error_h1 = en.h1;
  row.f_l2_omega = en.f_l2_omega;
  row.f_l2_theta = en.f_l2_theta;
  row.bound_w1 = bound_w1(row.epsilon, row.eta, row.mu, c.dim).total * en.f_l2_omega;
  row.bound_l2 = bound_l2(row.epsilon, row.eta, row.mu, c.dim, en.f_l2_omega, en.f_l2_theta).total;
  row.ratio_h1 = safe_ratio(row.error_h1, row.bound_w1);
  row.ratio_l2 = safe_ratio(row.error_l2, row.bound_l2);

  if (c.compare_mu0) {
    stage = "compare_mu0";
    ProblemSpec plain = spec;
    plain.nonlinearity = nonlinearity_preset("none", 0.0);
    out.perturbed_mu0 = solve_perturbed(plain, perforated, so);
    std::vector<Complex> d(out.perturbed_mu0->solution.values.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = out.perturbed.solution.values[i] - out.perturbed_mu0->solution.values[i];
    row.robin_vs_mu0_h1 = h1_norm(*perforated, d);
  }
  return out;
}

SweepRow run_row(const ExperimentConfig& c, std::size_t index, double lambda0) {
  const auto start = std::chrono::steady_clock::now();
  SweepRow row;
  std::string stage;
  try {
    row = solve_case(c, index, lambda0, &stage).row;
  } catch (const std::exception& e) {
    row.epsilon = c.eps_list.at(index);
    row.eta = c.law.eta(row.epsilon);
    row.mu = c.law.mu(row.epsilon);
    row.h = mesh_size_for(c, row.epsilon);
    row.ok = false;
    row.failed_stage = stage;
    row.message = e.what();
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

double resolve_lambda0(const ExperimentConfig& c, std::string* source) {
  if (c.lambda0) {
    if (source) *source = "declared";
    return *c.lambda0;
  }
  auto coarse = std::make_shared<Mesh>(mesh_unperforated(c.domain, c.h0));
  const double l0 = estimate_lambda0(coefficients_preset(c.coefficients), coarse);
  if (source) *source = "estimated";
  if (c.lambda.real() > l0) {
    throw validation_error("Re(lambda) = " + fmt(c.lambda.real()) + " exceeds the estimated lambda0 = " + fmt(l0));
  }
  return l0;
}

SweepReport run_sweep(const ExperimentConfig& c, unsigned threads) {
  validate_config(c);
  SweepReport r;
  r.name = c.name;
  r.dim = c.dim;
  r.seed = c.seed;
  r.law = c.law.description;
  r.gamma = c.law.gamma;
  r.delta = c.law.delta;
  r.mu_vanishes = c.law.mu_vanishes();
  r.coefficients = c.coefficients;
  r.nonlinearity = c.nonlinearity;
  r.forcing = c.forcing;
  r.lambda_re = c.lambda.real();
  r.lambda_im = c.lambda.imag();

  r.lambda0 = resolve_lambda0(c, &r.lambda0_source);

  // Advisory only.
  const AdmissibilityReport adm = check_scaling_admissible(c.law, c.eps_list, c.dim);
  r.admissible = adm.admissible;
  r.admissibility_verdict = adm.verdict;
  r.admissibility_values = adm.values;

  const std::size_t n = c.eps_list.size();
  r.rows.resize(n);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) r.rows[i] = run_row(c, i, r.lambda0);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  if (c.lemma_constants) {
    const CavityShape shape = shape_from_preset(c.shape_preset, c.radii, 0);
    LemmaOptions lo;
    lo.radii = c.radii;
    for (std::size_t i = 0; i < n; ++i) {
      for (const char* id : {"3.1", "3.3", "3.6"}) {
        const double eps = c.eps_list[i];
        r.lemma_rows.push_back(lemma_constant(id, eps, c.law.eta(eps), shape, c.lemma_resolution, lo));
      }
    }
  }

  std::vector<std::pair<double, double>> h1, l2, mu;
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    h1.emplace_back(row.epsilon, row.error_h1);
    l2.emplace_back(row.epsilon, row.error_l2);
    if (row.robin_vs_mu0_h1) mu.emplace_back(row.epsilon, *row.robin_vs_mu0_h1);
  }
  r.h1_fit = fit_if_possible(h1);
  r.l2_fit = fit_if_possible(l2);
  r.mu_fit = fit_if_possible(mu);
  r.predicted_w1 = predicted_dominant_slope(c.law, c.dim, "w1");
  r.predicted_l2 = predicted_dominant_slope(c.law, c.dim, "l2");

  if (c.h_refinement_check && r.rows.front().ok) {
    ExperimentConfig fine = c;
    fine.h0 = c.h0 / 2.0;
    fine.near_factor = c.near_factor / 2.0;
    const SweepRow fr = run_row(fine, 0, r.lambda0);
    if (fr.ok) {
      HRefinementCheck hc;
      hc.epsilon = c.eps_list.front();
      hc.h_coarse = r.rows.front().h;
      hc.h_fine = fr.h;
      hc.error_h1_coarse = r.rows.front().error_h1;
      hc.error_h1_fine = fr.error_h1;
      hc.relative_change = fr.error_h1 > 0.0 ? std::abs(hc.error_h1_coarse - fr.error_h1) / fr.error_h1 : 0.0;
      r.h_check = hc;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json fit_json(const std::optional<RateFit>& f) {
  if (!f) return nullptr;
  return {{"slope", f->slope}, {"intercept", f->intercept}, {"residual", f->residual}};
}

std::optional<RateFit> fit_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return RateFit{j.at("slope").get<double>(), j.at("intercept").get<double>(), j.at("residual").get<double>()};
}

json predicted_json(const PredictedSlope& p) {
  json mono = json::array();
  for (const auto& m : p.monomials) {
    mono.push_back({{"label", m.label}, {"exponent", m.exponent}, {"log_flag", m.log_flag}, {"active", m.active}});
  }
  return {{"slope", p.slope}, {"dominant", p.dominant}, {"log_flag", p.log_flag}, {"monomials", mono}};
}

PredictedSlope predicted_from(const json& j) {
  PredictedSlope p;
  p.slope = j.at("slope").get<double>();
  p.dominant = j.at("dominant").get<std::string>();
  p.log_flag = j.at("log_flag").get<bool>();
  for (const auto& m : j.at("monomials")) {
    p.monomials.push_back({m.at("label").get<std::string>(), m.at("exponent").get<double>(), m.at("log_flag").get<bool>(),
                           m.at("active").get<bool>()});
  }
  return p;
}

}  // namespace

std::string report_to_json(const SweepReport& r, int indent) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"epsilon", row.epsilon},
                    {"eta", row.eta},
                    {"mu", row.mu},
                    {"h", row.h},
                    {"cavities", row.cavities},
                    {"vertices", row.vertices},
                    {"error_l2", row.error_l2},
                    {"error_h1", row.error_h1},
                    {"bound_w1", row.bound_w1},
                    {"bound_l2", row.bound_l2},
                    {"ratio_h1", num(row.ratio_h1)},
                    {"ratio_l2", num(row.ratio_l2)},
                    {"picard_iters", row.picard_iters},
                    {"contraction", row.contraction},
                    {"f_l2_omega", row.f_l2_omega},
                    {"f_l2_theta", row.f_l2_theta},
                    {"robin_vs_mu0_h1", row.robin_vs_mu0_h1 ? json(*row.robin_vs_mu0_h1) : json(nullptr)},
                    {"seconds", row.seconds},
                    {"ok", row.ok},
                    {"failed_stage", row.failed_stage},
                    {"message", row.message}});
  }
  json lemmas = json::array();
  for (const auto& l : r.lemma_rows) {
    lemmas.push_back({{"lemma_id", l.lemma_id},
                      {"epsilon", l.epsilon},
                      {"eta", l.eta},
                      {"best_constant", l.best_constant},
                      {"residual", l.eigen_residual},
                      {"iterations", l.iterations},
                      {"vertices", l.vertices},
                      {"constant_probe", l.constant_probe}});
  }
  json j = {{"name", r.name},
            {"dim", r.dim},
            {"seed", r.seed},
            {"law", r.law},
            {"gamma", r.gamma},
            {"delta", r.delta},
            {"mu_vanishes", r.mu_vanishes},
            {"coefficients", r.coefficients},
            {"nonlinearity", r.nonlinearity},
            {"forcing", r.forcing},
            {"lambda", {r.lambda_re, r.lambda_im}},
            {"lambda0", r.lambda0},
            {"lambda0_source", r.lambda0_source},
            {"rows", rows},
            {"lemma_constants", lemmas},
            {"fits", {{"h1", fit_json(r.h1_fit)}, {"l2", fit_json(r.l2_fit)}, {"robin_vs_mu0", fit_json(r.mu_fit)}}},
            {"predicted", {{"w1", predicted_json(r.predicted_w1)}, {"l2", predicted_json(r.predicted_l2)}}},
            {"admissibility",
             {{"admissible", r.admissible}, {"verdict", r.admissibility_verdict}, {"values", r.admissibility_values}}}};
  if (r.h_check) {
    const auto& h = *r.h_check;
    j["h_refinement"] = {{"epsilon", h.epsilon},
                         {"h_coarse", h.h_coarse},
                         {"h_fine", h.h_fine},
                         {"error_h1_coarse", h.error_h1_coarse},
                         {"error_h1_fine", h.error_h1_fine},
                         {"relative_change", h.relative_change}};
  } else {
    j["h_refinement"] = nullptr;
  }
  return j.dump(indent);
}

SweepReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    SweepReport r;
    r.name = j.at("name").get<std::string>();
    r.dim = j.at("dim").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.law = j.at("law").get<std::string>();
    r.gamma = j.at("gamma").get<double>();
    r.delta = j.at("delta").get<double>();
    r.mu_vanishes = j.at("mu_vanishes").get<bool>();
    r.coefficients = j.at("coefficients").get<std::string>();
    r.nonlinearity = j.at("nonlinearity").get<std::string>();
    r.forcing = j.at("forcing").get<std::string>();
    r.lambda_re = j.at("lambda").at(0).get<double>();
    r.lambda_im = j.at("lambda").at(1).get<double>();
    r.lambda0 = j.at("lambda0").get<double>();
    r.lambda0_source = j.at("lambda0_source").get<std::string>();
    for (const auto& x : j.at("rows")) {
      SweepRow row;
      row.epsilon = x.at("epsilon").get<double>();
      row.eta = x.at("eta").get<double>();
      row.mu = x.at("mu").get<double>();
      row.h = x.at("h").get<double>();
      row.cavities = x.at("cavities").get<std::size_t>();
      row.vertices = x.at("vertices").get<std::size_t>();
      row.error_l2 = x.at("error_l2").get<double>();
      row.error_h1 = x.at("error_h1").get<double>();
      row.bound_w1 = x.at("bound_w1").get<double>();
      row.bound_l2 = x.at("bound_l2").get<double>();
      row.ratio_h1 = num_from(x.at("ratio_h1"));
      row.ratio_l2 = num_from(x.at("ratio_l2"));
      row.picard_iters = x.at("picard_iters").get<int>();
      row.contraction = x.at("contraction").get<double>();
      row.f_l2_omega = x.at("f_l2_omega").get<double>();
      row.f_l2_theta = x.at("f_l2_theta").get<double>();
      if (!x.at("robin_vs_mu0_h1").is_null()) row.robin_vs_mu0_h1 = x.at("robin_vs_mu0_h1").get<double>();
      row.seconds = x.at("seconds").get<double>();
      row.ok = x.at("ok").get<bool>();
      row.failed_stage = x.at("failed_stage").get<std::string>();
      row.message = x.at("message").get<std::string>();
      r.rows.push_back(row);
    }
    for (const auto& x : j.at("lemma_constants")) {
      LemmaConstant l;
      l.lemma_id = x.at("lemma_id").get<std::string>();
      l.epsilon = x.at("epsilon").get<double>();
      l.eta = x.at("eta").get<double>();
      l.best_constant = x.at("best_constant").get<double>();
      l.eigen_residual = x.at("residual").get<double>();
      l.iterations = x.at("iterations").get<int>();
      l.vertices = x.at("vertices").get<std::size_t>();
      l.constant_probe = x.at("constant_probe").get<double>();
      r.lemma_rows.push_back(l);
    }
    r.h1_fit = fit_from(j.at("fits").at("h1"));
    r.l2_fit = fit_from(j.at("fits").at("l2"));
    r.mu_fit = fit_from(j.at("fits").at("robin_vs_mu0"));
    r.predicted_w1 = predicted_from(j.at("predicted").at("w1"));
    r.predicted_l2 = predicted_from(j.at("predicted").at("l2"));
    r.admissible = j.at("admissibility").at("admissible").get<bool>();
    r.admissibility_verdict = j.at("admissibility").at("verdict").get<std::string>();
    r.admissibility_values = j.at("admissibility").at("values").get<std::vector<double>>();
    if (!j.at("h_refinement").is_null()) {
      const auto& h = j.at("h_refinement");
      r.h_check = HRefinementCheck{h.at("epsilon").get<double>(),         h.at("h_coarse").get<double>(),
                                   h.at("h_fine").get<double>(),          h.at("error_h1_coarse").get<double>(),
                                   h.at("error_h1_fine").get<double>(),   h.at("relative_change").get<double>()};
    }
    return r;
  } catch (const json::exception& e) {
    throw validation_error(std::string("malformed report JSON: ") + e.what());
  }
}

bool reports_equal(const SweepReport& a, const SweepReport& b) { return report_to_json(a, -1) == report_to_json(b, -1); }

std::string report_csv(const SweepReport& r) {
  std::ostringstream out;
  out << "epsilon,eta,mu,h,error_l2,error_h1,bound_w1,bound_l2,ratio_h1,picard_iters\n";
  for (const auto& row : r.rows) {
    out << fmt(row.epsilon) << ',' << fmt(row.eta) << ',' << fmt(row.mu) << ',' << fmt(row.h) << ',';
    if (row.ok) {
      out << fmt(row.error_l2) << ',' << fmt(row.error_h1) << ',' << fmt(row.bound_w1) << ',' << fmt(row.bound_l2) << ','
          << fmt(row.ratio_h1) << ',' << row.picard_iters << '\n';
    } else {
      out << "failed:" << row.failed_stage << ",,,,,\n";
    }
  }
  return out.str();
}

std::string lemma_csv(const SweepReport& r) {
  std::ostringstream out;
  out << "lemma_id,epsilon,eta,best_constant,residual\n";
  for (const auto& l : r.lemma_rows) {
    out << l.lemma_id << ',' << fmt(l.epsilon) << ',' << fmt(l.eta) << ',' << fmt(l.best_constant) << ','
        << fmt(l.eigen_residual) << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::pair<double, double>> positive_series(const SweepReport& r, double SweepRow::*field) {
  std::vector<std::pair<double, double>> s;
  for (const auto& row : r.rows) {
    if (row.ok && row.*field > 0.0 && std::isfinite(row.*field)) s.emplace_back(row.epsilon, row.*field);
  }
  std::sort(s.begin(), s.end());
  return s;
}

std::string dat(const std::vector<std::pair<double, double>>& s, const std::string& what) {
  std::ostringstream out;
  out << "# epsilon " << what << '\n';
  for (const auto& [e, v] : s) out << fmt(e) << ' ' << fmt(v) << '\n';
  return out.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw io_error("cannot write " + p.string());
  out << content;
  if (!out) throw io_error("write failed for " + p.string());
}

}  // namespace

std::string report_svg(const SweepReport& r) {
  const auto err = positive_series(r, &SweepRow::error_h1);
  const auto bnd = positive_series(r, &SweepRow::bound_w1);
  constexpr double W = 640.0, H = 480.0, M = 60.0;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  bool first = true;
  for (const auto* s : {&err, &bnd}) {
    for (const auto& [e, v] : *s) {
      const double lx = std::log10(e), ly = std::log10(v);
      if (first) {
        x0 = x1 = lx;
        y0 = y1 = ly;
        first = false;
      }
      x0 = std::min(x0, lx);
      x1 = std::max(x1, lx);
      y0 = std::min(y0, ly);
      y1 = std::max(y1, ly);
    }
  }
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  auto sx = [&](double e) { return M + (std::log10(e) - x0) / (x1 - x0) * (W - 2 * M); };
  auto sy = [&](double v) { return H - M - (std::log10(v) - y0) / (y1 - y0) * (H - 2 * M); };
  auto polyline = [&](const std::vector<std::pair<double, double>>& s, const char* color, const char* id) {
    std::ostringstream o;
    o << "  <polyline id=\"" << id << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", sx(s[i].first), sy(s[i].second));
      o << buf;
    }
    o << "\"/>\n";
    return o.str();
  };
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' '
      << H << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "  <line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n";
  out << "  <text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">log10 epsilon</text>\n";
  out << "  <text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2 << ")\" text-anchor=\"middle\">log10 value</text>\n";
  out << "  <text x=\"" << W / 2 << "\" y=\"30\" text-anchor=\"middle\">" << r.name << ": H1 error and W1 bound</text>\n";
  out << polyline(err, "#c0392b", "error_h1");
  out << polyline(bnd, "#2c3e50", "bound_w1");
  out << "</svg>\n";
  return out.str();
}

std::vector<std::string> emit_report(const SweepReport& r, const std::string& dir, const std::vector<std::string>& formats) {
  static const std::set<std::string> known{"csv", "json", "dat", "svg"};
  for (const auto& f : formats) {
    if (!known.count(f)) throw invalid_argument("unknown report format '" + f + "' (csv, json, dat, svg)");
  }
  auto wants = [&](const char* f) { return formats.empty() || std::find(formats.begin(), formats.end(), f) != formats.end(); };
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);
  std::vector<std::string> written;
  auto put = [&](const char* name, const std::string& content) {
    write_file(base / name, content);
    written.push_back((base / name).string());
  };
  if (wants("csv")) {
    put("sweep.csv", report_csv(r));
    if (!r.lemma_rows.empty()) put("lemma_constants.csv", lemma_csv(r));
  }
  if (wants("json")) put("report.json", report_to_json(r));
  if (wants("dat")) {
    put("error_h1.dat", dat(positive_series(r, &SweepRow::error_h1), "error_h1"));
    put("bound_w1.dat", dat(positive_series(r, &SweepRow::bound_w1), "bound_w1"));
    put("error_l2.dat", dat(positive_series(r, &SweepRow::error_l2), "error_l2"));
    put("bound_l2.dat", dat(positive_series(r, &SweepRow::bound_l2), "bound_l2"));
  }
  if (wants("svg")) put("chart.svg", report_svg(r));
  return written;
}

}  // namespace perfhom
