// perfhom command line front end. Talks to the library only through perfhom.h.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "perfhom/perfhom.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct Failure {
  int code;
};

int exit_code_for(perfhom_status s) {
  switch (s) {
    case PERFHOM_OK: return kExitOk;
    case PERFHOM_ERR_INVALID_ARGUMENT:
    case PERFHOM_ERR_INFEASIBLE:
    case PERFHOM_ERR_VALIDATION:
    case PERFHOM_ERR_UNSUPPORTED: return kExitValidation;
    case PERFHOM_ERR_MESH:
    case PERFHOM_ERR_SOLVER: return kExitSolver;
    default: return kExitOther;
  }
}

void check(perfhom_status s, const char* what) {
  if (s == PERFHOM_OK) return;
  std::fprintf(stderr, "perfhom: %s failed (%s): %s\n", what, perfhom_status_name(s), perfhom_last_error());
  throw Failure{exit_code_for(s)};
}

struct CString {
  char* p = nullptr;
  ~CString() { perfhom_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct PerfDel { void operator()(perfhom_perforation* p) const { perfhom_perforation_free(p); } };
struct MeshDel { void operator()(perfhom_mesh* p) const { perfhom_mesh_free(p); } };
struct SolDel { void operator()(perfhom_solution* p) const { perfhom_solution_free(p); } };
struct SweepDel { void operator()(perfhom_sweep* p) const { perfhom_sweep_free(p); } };
using PerfPtr = std::unique_ptr<perfhom_perforation, PerfDel>;
using MeshPtr = std::unique_ptr<perfhom_mesh, MeshDel>;
using SolPtr = std::unique_ptr<perfhom_solution, SolDel>;
using SweepPtr = std::unique_ptr<perfhom_sweep, SweepDel>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "perfhom: cannot read %s\n", path.c_str());
    throw Failure{kExitOther};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::fprintf(stderr, "perfhom: cannot write %s\n", path.c_str());
    throw Failure{kExitOther};
  }
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "TOML experiment file")->check(CLI::ExistingFile);
  if (config_required) opt->required();
  app->add_option("--seed", c.seed, "override the config seed");
  app->add_option("--out", c.out, "output file or directory");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::Range(1u, 1024u));
}

std::string fmt(double v) {
  if (std::isnan(v)) return "degenerate";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---- generate ----

struct GenerateArgs {
  Common common;
  double eps = 0.1;
  std::optional<double> eta;
  std::vector<double> radii{0.5, 1.0, 1.1};
  long long count = -1;
  std::string shape = "disk";
  std::string domain = "unit_square";
  bool mesh = false;
  double h = 0.0;
};

int run_generate(const GenerateArgs& a) {
  perfhom_perforation* raw = nullptr;
  if (!a.common.config.empty()) {
    const std::string toml = read_file(a.common.config);
    check(perfhom_perforation_generate_config(toml.c_str(), a.common.seed.value_or(0), a.common.seed.has_value(), &raw),
          "generate");
  } else {
    if (a.radii.size() != 3) {
      std::fprintf(stderr, "perfhom: --radii needs three values\n");
      return kExitValidation;
    }
    const perfhom_domain d = a.domain == "unit_disk" ? perfhom_domain_unit_disk() : perfhom_domain_unit_square();
    if (a.domain != "unit_disk" && a.domain != "unit_square") {
      std::fprintf(stderr, "perfhom: unknown domain '%s'\n", a.domain.c_str());
      return kExitValidation;
    }
    perfhom_generation g{};
    g.epsilon = a.eps;
    g.eta = a.eta.value_or(a.eps);
    for (int i = 0; i < 3; ++i) g.radii[i] = a.radii[static_cast<std::size_t>(i)];
    g.target_count = a.count;
    g.seed = a.common.seed.value_or(1);
    g.shape_preset = a.shape.c_str();
    check(perfhom_perforation_generate(&d, &g, &raw), "generate");
  }
  PerfPtr perf(raw);
  std::printf("cavities: %zu\n", perfhom_perforation_cavity_count(perf.get()));
  const std::string path = a.common.out.empty() ? "perforation.json" : a.common.out;
  check(perfhom_perforation_write(perf.get(), path.c_str()), "write");
  std::printf("wrote %s\n", path.c_str());
  if (a.mesh) {
    perfhom_mesh* m = nullptr;
    check(perfhom_mesh_perforated(perf.get(), a.h, 32, &m), "mesh");
    MeshPtr mesh(m);
    perfhom_mesh_info info{};
    check(perfhom_mesh_info_get(mesh.get(), &info), "mesh info");
    const std::string mpath = path + ".mesh.txt";
    check(perfhom_mesh_write(mesh.get(), mpath.c_str()), "mesh write");
    std::printf("mesh: %zu vertices, %zu triangles, h_max %s -> %s\n", info.vertices, info.triangles,
                fmt(info.h_max).c_str(), mpath.c_str());
  }
  return kExitOk;
}

// ---- validate ----

int run_validate(const Common& c, const std::string& perforation) {
  if (c.config.empty() && perforation.empty()) {
    std::fprintf(stderr, "perfhom: validate needs --config or --perforation\n");
    return kExitValidation;
  }
  if (!c.config.empty()) {
    const std::string toml = read_file(c.config);
    CString dir;
    check(perfhom_config_validate(toml.c_str(), &dir.p), "config validation");
    std::printf("config ok (output %s)\n", dir.str().c_str());
  }
  if (!perforation.empty()) {
    perfhom_perforation* raw = nullptr;
    check(perfhom_perforation_read(perforation.c_str(), &raw), "read perforation");
    PerfPtr perf(raw);
    std::size_t n = 0;
    CString report;
    check(perfhom_perforation_validate(perf.get(), &n, &report.p), "validate");
    if (n > 0) {
      std::printf("%zu violation(s):\n%s\n", n, report.str().c_str());
      return kExitValidation;
    }
    std::printf("perforation ok (%zu cavities)\n", perfhom_perforation_cavity_count(perf.get()));
  }
  return kExitOk;
}

// ---- solve ----

int run_solve(const Common& c) {
  const std::string toml = read_file(c.config);
  perfhom_solution* raw = nullptr;
  check(perfhom_solve_config(toml.c_str(), c.seed.value_or(0), c.seed.has_value(), &raw), "solve");
  SolPtr sol(raw);
  perfhom_solution_info info{};
  check(perfhom_solution_info_get(sol.get(), &info), "solution info");
  std::printf("epsilon %s eta %s mu %s: %zu cavities, %zu vertices, %d Picard iteration(s)\n", fmt(info.epsilon).c_str(),
              fmt(info.eta).c_str(), fmt(info.mu).c_str(), info.cavities, info.vertices, info.picard_iterations);
  std::printf("error_l2 %s error_h1 %s bound_w1 %s bound_l2 %s\n", fmt(info.error_l2).c_str(), fmt(info.error_h1).c_str(),
              fmt(info.bound_w1).c_str(), fmt(info.bound_l2).c_str());
  const std::string dir = c.out.empty() ? "solve_out" : c.out;
  check(perfhom_solution_write(sol.get(), dir.c_str()), "write solution");
  std::printf("wrote %s\n", dir.c_str());
  return kExitOk;
}

// ---- sweep / report ----

void print_summary(const perfhom_sweep* s) {
  perfhom_sweep_summary sum{};
  check(perfhom_sweep_summary_get(s, &sum), "summary");
  CString csv;
  check(perfhom_sweep_csv(s, &csv.p), "csv");
  std::fputs(csv.str().c_str(), stdout);
  std::printf("rows %zu, failed %zu\n", sum.rows, sum.failed_rows);
  if (sum.has_h1_fit) std::printf("h1 slope %.4f (predicted %.4g)\n", sum.h1_slope, sum.predicted_w1);
  if (sum.has_l2_fit) std::printf("l2 slope %.4f (predicted %.4g)\n", sum.l2_slope, sum.predicted_l2);
  if (sum.has_mu_fit) std::printf("robin vs mu=0 slope %.4f\n", sum.mu_slope);
  if (sum.ratio_spread > 0.0) std::printf("ratio_h1 spread %.4f\n", sum.ratio_spread);
  if (sum.has_h_check) std::printf("h-refinement relative change %.4g\n", sum.h_check_relative_change);
  std::printf("admissible: %s\n", sum.admissible ? "yes" : "no (advisory)");
}

int run_sweep(const Common& c, const std::string& formats) {
  const std::string toml = read_file(c.config);
  CString dir;
  check(perfhom_config_validate(toml.c_str(), &dir.p), "config validation");
  perfhom_sweep* raw = nullptr;
  check(perfhom_sweep_run(toml.c_str(), c.seed.value_or(0), c.seed.has_value(), c.threads, &raw), "sweep");
  SweepPtr sweep(raw);
  const std::string out = c.out.empty() ? dir.str() : c.out;
  check(perfhom_sweep_emit(sweep.get(), out.c_str(), formats.c_str()), "emit");
  print_summary(sweep.get());
  std::printf("wrote %s\n", out.c_str());
  perfhom_sweep_summary sum{};
  check(perfhom_sweep_summary_get(sweep.get(), &sum), "summary");
  return sum.failed_rows > 0 ? kExitSolver : kExitOk;
}

int run_report(const std::string& input, const Common& c, const std::string& formats) {
  const std::string json = read_file(input);
  perfhom_sweep* raw = nullptr;
  check(perfhom_sweep_from_json(json.c_str(), &raw), "parse report");
  SweepPtr sweep(raw);
  print_summary(sweep.get());
  if (!c.out.empty()) {
    check(perfhom_sweep_emit(sweep.get(), c.out.c_str(), formats.c_str()), "emit");
    std::printf("wrote %s\n", c.out.c_str());
  }
  return kExitOk;
}

// ---- theory ----

struct BoundArgs {
  int dim = 2;
  double eps = 0.1;
  double eta = 0.1;
  double mu = 0.0;
  bool l2 = false;
  double f_omega = 1.0;
  double f_theta = 0.0;
};

void print_bound(const char* title, const perfhom_rate_bound& b) {
  std::printf("%s\n", title);
  for (std::size_t i = 0; i < b.count; ++i) std::printf("  %-4s %.12g\n", b.labels[i], b.values[i]);
  std::printf("  sum  %.12g\n", b.total);
}

int run_bound(const BoundArgs& a) {
  double k = 0.0, vk = 0.0;
  check(perfhom_kappa(a.eta, a.dim, &k), "kappa");
  check(perfhom_varkappa(a.eta, a.dim, &vk), "varkappa");
  std::printf("dim %d eps %.6g eta %.6g mu %.6g\n", a.dim, a.eps, a.eta, a.mu);
  std::printf("kappa %.12g varkappa %.12g\n", k, vk);
  perfhom_rate_bound b{};
  check(perfhom_bound_w1(a.eps, a.eta, a.mu, a.dim, &b), "bound_w1");
  print_bound("bound_w1", b);
  if (a.l2) {
    check(perfhom_bound_l2(a.eps, a.eta, a.mu, a.dim, a.f_omega, a.f_theta, &b), "bound_l2");
    print_bound("bound_l2", b);
  }
  return kExitOk;
}

struct LemmaArgs {
  std::vector<std::string> ids{"3.1", "3.3", "3.6"};
  std::vector<double> eps{0.2, 0.1, 0.05};
  std::vector<double> eta{0.5, 0.25};
  std::vector<double> radii{0.5, 1.0, 1.5};
  std::string shape = "disk";
  int resolution = 32;
};

int run_lemma(const LemmaArgs& a, const Common& c) {
  if (a.radii.size() != 3) {
    std::fprintf(stderr, "perfhom: --radii needs three values\n");
    return kExitValidation;
  }
  std::ostringstream csv;
  csv << "lemma_id,epsilon,eta,best_constant,residual\n";
  std::printf("%-6s %-8s %-8s %-14s %-10s %s\n", "lemma", "epsilon", "eta", "constant", "residual", "vertices");
  for (const auto& id : a.ids) {
    for (double e : a.eps) {
      for (double h : a.eta) {
        perfhom_lemma_result r{};
        check(perfhom_lemma_constant(id.c_str(), e, h, a.shape.c_str(), a.radii.data(), a.resolution, &r),
              ("lemma " + id).c_str());
        std::printf("%-6s %-8.4g %-8.4g %-14.8g %-10.2e %zu\n", id.c_str(), e, h, r.best_constant, r.eigen_residual,
                    r.vertices);
        char line[160];
        std::snprintf(line, sizeof line, "%s,%.12g,%.12g,%.12g,%.12g\n", id.c_str(), e, h, r.best_constant,
                      r.eigen_residual);
        csv << line;
      }
    }
  }
  if (!c.out.empty()) {
    write_file(c.out, csv.str());
    std::printf("wrote %s\n", c.out.c_str());
  }
  return kExitOk;
}

int run_sharpness(const std::vector<double>& eps, std::optional<double> eta, int resolution) {
  std::printf("%-8s %-8s %-14s %-14s %-14s %s\n", "epsilon", "eta", "f_norm", "corrector", "ratio", "self_diff");
  for (double e : eps) {
    perfhom_sharpness s{};
    const double h = eta.value_or(e);
    check(perfhom_sharpness_neumann(e, h, resolution, &s), "sharpness");
    std::printf("%-8.4g %-8.4g %-14.8g %-14.8g %-14.8g %.2e\n", e, h, s.f_norm_lower, s.corrector_grad_norm, s.ratio,
                s.self_difference);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for homogenization in perforated domains"};
  app.set_version_flag("--version", std::string(perfhom_version()));
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "sample an admissible perforation and write it as JSON");
  add_common(generate, gen.common, false);
  generate->add_option("--eps", gen.eps, "period epsilon");
  generate->add_option("--eta", gen.eta, "cavity scale eta (default eps)");
  generate->add_option("--radii", gen.radii, "R1 R2 R3")->expected(3);
  generate->add_option("--count", gen.count, "number of cavities (default fills)");
  generate->add_option("--shape", gen.shape, "disk, star3 or mixed");
  generate->add_option("--domain", gen.domain, "unit_square or unit_disk");
  auto* mesh_h = generate->add_option("--mesh", gen.h, "also mesh the perforated domain with this h");

  Common val_common;
  std::string val_perforation;
  auto* validate = app.add_subcommand("validate", "check a config or a perforation file");
  add_common(validate, val_common, false);
  validate->add_option("--perforation", val_perforation, "perforation JSON")->check(CLI::ExistingFile);

  Common solve_common;
  auto* solve = app.add_subcommand("solve", "solve the first eps of a config, perturbed and homogenized");
  add_common(solve, solve_common, true);

  Common sweep_common;
  std::string sweep_formats;
  auto* sweep = app.add_subcommand("sweep", "run an eps sweep and emit the report");
  add_common(sweep, sweep_common, true);
  sweep->add_option("--formats", sweep_formats, "subset of csv,json,dat,svg");

  BoundArgs bound_args;
  auto* bound = app.add_subcommand("bound", "print the rate bound monomials");
  bound->add_option("--dim", bound_args.dim)->required();
  bound->add_option("--eps", bound_args.eps)->required();
  bound->add_option("--eta", bound_args.eta)->required();
  bound->add_option("--mu", bound_args.mu)->required();
  bound->add_flag("--l2", bound_args.l2, "also print the L2 bound");
  bound->add_option("--f-omega", bound_args.f_omega, "|f| over Omega");
  bound->add_option("--f-theta", bound_args.f_theta, "|f| over the cavities");

  LemmaArgs lemma_args;
  Common lemma_common;
  auto* lemma = app.add_subcommand("lemma-constants", "best constants of the trace and Poincare inequalities");
  lemma->add_option("--out", lemma_common.out, "CSV output file");
  lemma->add_option("--lemma", lemma_args.ids, "3.1 3.3 3.6 (3.4 is unsupported)");
  lemma->add_option("--eps", lemma_args.eps);
  lemma->add_option("--eta", lemma_args.eta);
  lemma->add_option("--radii", lemma_args.radii)->expected(3);
  lemma->add_option("--shape", lemma_args.shape);
  lemma->add_option("--resolution", lemma_args.resolution, "segments on the cavity");

  std::vector<double> sharp_eps{0.1, 0.05, 0.025};
  std::optional<double> sharp_eta;
  int sharp_res = 64;
  auto* sharp = app.add_subcommand("sharpness", "Neumann sharpness construction in dim 2");
  sharp->add_option("--eps", sharp_eps);
  sharp->add_option("--eta", sharp_eta, "default eta = eps");
  sharp->add_option("--resolution", sharp_res, "quadrature resolution");

  std::string report_in;
  Common report_common;
  std::string report_formats;
  auto* report = app.add_subcommand("report", "re-emit a saved report.json");
  report->add_option("input", report_in, "report.json")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_common.out, "output directory");
  report->add_option("--formats", report_formats, "subset of csv,json,dat,svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*generate) {
      gen.mesh = mesh_h->count() > 0;
      return run_generate(gen);
    }
    if (*validate) return run_validate(val_common, val_perforation);
    if (*solve) return run_solve(solve_common);
    if (*sweep) return run_sweep(sweep_common, sweep_formats);
    if (*bound) return run_bound(bound_args);
    if (*lemma) return run_lemma(lemma_args, lemma_common);
    if (*sharp) return run_sharpness(sharp_eps, sharp_eta, sharp_res);
    if (*report) return run_report(report_in, report_common, report_formats);
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitOther;
}
