#include "perfhom/perfhom.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include <json.hpp>

#include "perfhom/core/error.hpp"
#include "perfhom/core/geometry.hpp"
#include "perfhom/core/geometry_json.hpp"
#include "perfhom/core/harness.hpp"
#include "perfhom/core/mesh.hpp"
#include "perfhom/core/metrics.hpp"
#include "perfhom/core/theory.hpp"

struct perfhom_perforation {
  perfhom::Perforation value;
};

struct perfhom_mesh {
  perfhom::Mesh value;
};

struct perfhom_solution {
  perfhom::SolveCase value;
  perfhom::ExperimentConfig config;
};

struct perfhom_sweep {
  perfhom::SweepReport value;
};

namespace {

thread_local std::string g_last_error;

perfhom_status status_of(perfhom::ErrorKind k) {
  switch (k) {
    case perfhom::ErrorKind::invalid_argument: return PERFHOM_ERR_INVALID_ARGUMENT;
    case perfhom::ErrorKind::infeasible: return PERFHOM_ERR_INFEASIBLE;
    case perfhom::ErrorKind::validation: return PERFHOM_ERR_VALIDATION;
    case perfhom::ErrorKind::mesh: return PERFHOM_ERR_MESH;
    case perfhom::ErrorKind::solver: return PERFHOM_ERR_SOLVER;
    case perfhom::ErrorKind::io: return PERFHOM_ERR_IO;
    case perfhom::ErrorKind::unsupported: return PERFHOM_ERR_UNSUPPORTED;
  }
  return PERFHOM_ERR_INTERNAL;
}

template <class F>
perfhom_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return PERFHOM_OK;
  } catch (const perfhom::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PERFHOM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PERFHOM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return PERFHOM_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw perfhom::invalid_argument(std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

perfhom::DomainSpec domain_of(const perfhom_domain* d) {
  need(d, "domain");
  if (d->kind == 0) return perfhom::DomainSpec::disk({d->center[0], d->center[1]}, d->radius);
  if (d->kind == 1) return perfhom::DomainSpec::rectangle({d->lo[0], d->lo[1]}, {d->hi[0], d->hi[1]});
  throw perfhom::invalid_argument("domain kind must be 0 (disk) or 1 (rectangle)");
}

perfhom_domain domain_to_c(const perfhom::DomainSpec& d) {
  perfhom_domain out{};
  if (d.kind() == perfhom::DomainKind::disk) {
    out.kind = 0;
    out.center[0] = d.center().x;
    out.center[1] = d.center().y;
    out.radius = d.radius();
  } else {
    out.kind = 1;
    out.lo[0] = d.lo().x;
    out.lo[1] = d.lo().y;
    out.hi[0] = d.hi().x;
    out.hi[1] = d.hi().y;
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "\n" : "") + v[i];
  return out;
}

void fill_bound(const perfhom::RateBound& b, perfhom_rate_bound* out) {
  *out = {};
  out->count = b.terms.size();
  for (std::size_t i = 0; i < b.terms.size() && i < 8; ++i) {
    std::snprintf(out->labels[i], sizeof out->labels[i], "%s", b.terms[i].first.c_str());
    out->values[i] = b.terms[i].second;
  }
  out->total = b.total;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw perfhom::io_error("cannot write " + p.string());
  f << text;
  if (!f) throw perfhom::io_error("write failed for " + p.string());
}

std::string solution_json(const perfhom_solution& s) {
  const auto& c = s.value;
  const auto& r = c.row;
  nlohmann::json j;
  j["epsilon"] = r.epsilon;
  j["eta"] = r.eta;
  j["mu"] = r.mu;
  j["h"] = r.h;
  j["cavities"] = r.cavities;
  j["error_l2"] = r.error_l2;
  j["error_h1"] = r.error_h1;
  j["bound_w1"] = r.bound_w1;
  j["bound_l2"] = r.bound_l2;
  j["f_l2_omega"] = r.f_l2_omega;
  j["f_l2_theta"] = r.f_l2_theta;
  j["perturbed"] = nlohmann::json::parse(perfhom::solve_result_to_json(c.perturbed));
  j["homogenized"] = nlohmann::json::parse(perfhom::solve_result_to_json(c.homogenized));
  return j.dump(2);
}

}  // namespace

extern "C" {

const char* perfhom_last_error(void) { return g_last_error.c_str(); }

const char* perfhom_version(void) { return "1.0.0"; }

const char* perfhom_status_name(perfhom_status s) {
  switch (s) {
    case PERFHOM_OK: return "ok";
    case PERFHOM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PERFHOM_ERR_INFEASIBLE: return "infeasible";
    case PERFHOM_ERR_VALIDATION: return "validation failure";
    case PERFHOM_ERR_MESH: return "mesh failure";
    case PERFHOM_ERR_SOLVER: return "solver failure";
    case PERFHOM_ERR_IO: return "i/o failure";
    case PERFHOM_ERR_UNSUPPORTED: return "unsupported";
    case PERFHOM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void perfhom_string_free(char* s) { std::free(s); }

perfhom_domain perfhom_domain_unit_square(void) { return domain_to_c(perfhom::DomainSpec::unit_square()); }
perfhom_domain perfhom_domain_unit_disk(void) { return domain_to_c(perfhom::DomainSpec::unit_disk()); }

// ---- geometry ----

perfhom_status perfhom_perforation_generate(const perfhom_domain* domain, const perfhom_generation* o, perfhom_perforation** out) {
  return guard([&] {
    need(o, "options");
    need(out, "out");
    *out = nullptr;
    perfhom::GenerationOptions g;
    if (o->target_count >= 0) g.target_count = static_cast<std::size_t>(o->target_count);
    g.seed = o->seed;
    g.shape_preset = o->shape_preset ? o->shape_preset : "disk";
    auto p = std::make_unique<perfhom_perforation>();
    p->value = perfhom::generate_perforation(domain_of(domain), o->epsilon, o->eta, {o->radii[0], o->radii[1], o->radii[2]}, g);
    *out = p.release();
  });
}

perfhom_status perfhom_perforation_generate_config(const char* toml, uint64_t seed, int override_seed, perfhom_perforation** out) {
  return guard([&] {
    need(toml, "toml");
    need(out, "out");
    *out = nullptr;
    auto c = perfhom::parse_config(toml);
    if (override_seed) c.seed = seed;
    auto p = std::make_unique<perfhom_perforation>();
    p->value = perfhom::generate_for_row(c, 0);
    *out = p.release();
  });
}

perfhom_status perfhom_perforation_from_json(const char* json, perfhom_perforation** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    auto p = std::make_unique<perfhom_perforation>();
    p->value = perfhom::perforation_from_json(json);
    *out = p.release();
  });
}

perfhom_status perfhom_perforation_read(const char* path, perfhom_perforation** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto p = std::make_unique<perfhom_perforation>();
    p->value = perfhom::read_perforation(path);
    *out = p.release();
  });
}

perfhom_status perfhom_perforation_to_json(const perfhom_perforation* p, char** out_json) {
  return guard([&] {
    need(p, "perforation");
    need(out_json, "out_json");
    *out_json = dup(perfhom::perforation_to_json(p->value));
  });
}

perfhom_status perfhom_perforation_write(const perfhom_perforation* p, const char* path) {
  return guard([&] {
    need(p, "perforation");
    need(path, "path");
    perfhom::write_perforation(p->value, path);
  });
}

size_t perfhom_perforation_cavity_count(const perfhom_perforation* p) { return p ? p->value.cavities.size() : 0; }

size_t perfhom_packing_bound(const perfhom_domain* domain, double epsilon, double r3) {
  size_t n = 0;
  const perfhom_status s = guard([&] { n = perfhom::packing_bound(domain_of(domain), epsilon, r3); });
  return s == PERFHOM_OK ? n : 0;
}

perfhom_status perfhom_perforation_validate(const perfhom_perforation* p, size_t* out_count, char** out_report) {
  return guard([&] {
    need(p, "perforation");
    const auto report = perfhom::validate_a1(p->value);
    if (out_count) *out_count = report.violations.size();
    if (out_report) *out_report = dup(join(report.violations));
  });
}

void perfhom_perforation_free(perfhom_perforation* p) { delete p; }

// ---- mesh ----

perfhom_status perfhom_mesh_perforated(const perfhom_perforation* p, double h, size_t segments_per_cavity, perfhom_mesh** out) {
  return guard([&] {
    need(p, "perforation");
    need(out, "out");
    *out = nullptr;
    perfhom::PerforatedMeshOptions o;
    if (segments_per_cavity > 0) o.segments_per_cavity = segments_per_cavity;
    auto m = std::make_unique<perfhom_mesh>();
    m->value = perfhom::mesh_perforated(p->value, h, o);
    *out = m.release();
  });
}

perfhom_status perfhom_mesh_unperforated(const perfhom_domain* domain, double h, perfhom_mesh** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    auto m = std::make_unique<perfhom_mesh>();
    m->value = perfhom::mesh_unperforated(domain_of(domain), h);
    *out = m.release();
  });
}

perfhom_status perfhom_mesh_info_get(const perfhom_mesh* m, perfhom_mesh_info* out) {
  return guard([&] {
    need(m, "mesh");
    need(out, "out");
    const auto& v = m->value;
    out->vertices = v.vertex_count();
    out->triangles = v.triangle_count();
    out->boundary_edges = v.boundary_edges.size();
    std::size_t cav = 0;
    for (const auto& e : v.boundary_edges) cav += e.tag > 0 ? 1 : 0;
    out->cavity_edges = cav;
    out->h_max = v.h_max;
    out->area = v.area();
  });
}

perfhom_status perfhom_mesh_check(const perfhom_mesh* m, const perfhom_perforation* p, size_t* out_count, char** out_report) {
  return guard([&] {
    need(m, "mesh");
    const auto issues = perfhom::check_mesh(m->value, p ? &p->value : nullptr);
    if (out_count) *out_count = issues.size();
    if (out_report) *out_report = dup(join(issues));
  });
}

perfhom_status perfhom_mesh_to_text(const perfhom_mesh* m, char** out_text) {
  return guard([&] {
    need(m, "mesh");
    need(out_text, "out_text");
    *out_text = dup(perfhom::mesh_to_text(m->value));
  });
}

perfhom_status perfhom_mesh_write(const perfhom_mesh* m, const char* path) {
  return guard([&] {
    need(m, "mesh");
    need(path, "path");
    write_text(path, perfhom::mesh_to_text(m->value));
  });
}

void perfhom_mesh_free(perfhom_mesh* m) { delete m; }

// ---- solve ----

perfhom_status perfhom_solve_config(const char* toml, uint64_t seed, int override_seed, perfhom_solution** out) {
  return guard([&] {
    need(toml, "toml");
    need(out, "out");
    *out = nullptr;
    auto s = std::make_unique<perfhom_solution>();
    s->config = perfhom::parse_config(toml);
    if (override_seed) s->config.seed = seed;
    const double lambda0 = perfhom::resolve_lambda0(s->config);
    s->value = perfhom::solve_case(s->config, 0, lambda0);
    *out = s.release();
  });
}

perfhom_status perfhom_solution_info_get(const perfhom_solution* s, perfhom_solution_info* out) {
  return guard([&] {
    need(s, "solution");
    need(out, "out");
    const auto& r = s->value.row;
    out->epsilon = r.epsilon;
    out->eta = r.eta;
    out->mu = r.mu;
    out->vertices = r.vertices;
    out->cavities = r.cavities;
    out->picard_iterations = r.picard_iters;
    out->contraction_estimate = r.contraction;
    out->error_l2 = r.error_l2;
    out->error_h1 = r.error_h1;
    out->bound_w1 = r.bound_w1;
    out->bound_l2 = r.bound_l2;
  });
}

perfhom_status perfhom_solution_to_json(const perfhom_solution* s, char** out_json) {
  return guard([&] {
    need(s, "solution");
    need(out_json, "out_json");
    *out_json = dup(solution_json(*s));
  });
}

perfhom_status perfhom_solution_write(const perfhom_solution* s, const char* dir) {
  return guard([&] {
    need(s, "solution");
    need(dir, "dir");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw perfhom::io_error(std::string("cannot create ") + dir + ": " + ec.message());
    const std::filesystem::path base(dir);
    write_text(base / "solution.json", solution_json(*s));
    perfhom::write_solution_binary(s->value.perturbed, (base / "solution.bin").string());
    perfhom::write_solution_binary(s->value.homogenized, (base / "homogenized.bin").string());
    write_text(base / "mesh.txt", perfhom::mesh_to_text(*s->value.perforated_mesh));
    write_text(base / "homogenized_mesh.txt", perfhom::mesh_to_text(*s->value.filled_mesh));
    perfhom::write_perforation(*s->value.perforation, (base / "perforation.json").string());
  });
}

void perfhom_solution_free(perfhom_solution* s) { delete s; }

// ---- sweep ----

perfhom_status perfhom_config_validate(const char* toml, char** out_output_dir) {
  return guard([&] {
    need(toml, "toml");
    const auto c = perfhom::parse_config(toml);
    if (out_output_dir) *out_output_dir = dup(c.output_dir);
  });
}

perfhom_status perfhom_sweep_run(const char* toml, uint64_t seed, int override_seed, unsigned threads, perfhom_sweep** out) {
  return guard([&] {
    need(toml, "toml");
    need(out, "out");
    *out = nullptr;
    auto c = perfhom::parse_config(toml);
    if (override_seed) c.seed = seed;
    auto s = std::make_unique<perfhom_sweep>();
    s->value = perfhom::run_sweep(c, threads == 0 ? 1 : threads);
    *out = s.release();
  });
}

perfhom_status perfhom_sweep_from_json(const char* json, perfhom_sweep** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    auto s = std::make_unique<perfhom_sweep>();
    s->value = perfhom::report_from_json(json);
    *out = s.release();
  });
}

perfhom_status perfhom_sweep_to_json(const perfhom_sweep* s, char** out_json) {
  return guard([&] {
    need(s, "sweep");
    need(out_json, "out_json");
    *out_json = dup(perfhom::report_to_json(s->value));
  });
}

perfhom_status perfhom_sweep_csv(const perfhom_sweep* s, char** out_csv) {
  return guard([&] {
    need(s, "sweep");
    need(out_csv, "out_csv");
    *out_csv = dup(perfhom::report_csv(s->value));
  });
}

perfhom_status perfhom_sweep_emit(const perfhom_sweep* s, const char* dir, const char* formats) {
  return guard([&] {
    need(s, "sweep");
    need(dir, "dir");
    std::vector<std::string> list;
    if (formats) {
      std::stringstream ss(formats);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) list.push_back(item);
      }
    }
    perfhom::emit_report(s->value, dir, list);
  });
}

perfhom_status perfhom_sweep_summary_get(const perfhom_sweep* s, perfhom_sweep_summary* out) {
  return guard([&] {
    need(s, "sweep");
    need(out, "out");
    const auto& r = s->value;
    *out = {};
    out->rows = r.rows.size();
    double lo = 0.0, hi = 0.0;
    std::size_t finite = 0;
    for (const auto& row : r.rows) {
      if (!row.ok) {
        ++out->failed_rows;
        continue;
      }
      if (std::isfinite(row.ratio_h1) && row.ratio_h1 > 0.0) {
        lo = finite ? std::min(lo, row.ratio_h1) : row.ratio_h1;
        hi = finite ? std::max(hi, row.ratio_h1) : row.ratio_h1;
        ++finite;
      }
    }
    out->ratio_spread = finite >= 2 ? hi / lo : 0.0;
    out->has_h1_fit = r.h1_fit.has_value();
    out->h1_slope = r.h1_fit ? r.h1_fit->slope : 0.0;
    out->has_l2_fit = r.l2_fit.has_value();
    out->l2_slope = r.l2_fit ? r.l2_fit->slope : 0.0;
    out->has_mu_fit = r.mu_fit.has_value();
    out->mu_slope = r.mu_fit ? r.mu_fit->slope : 0.0;
    out->predicted_w1 = r.predicted_w1.slope;
    out->predicted_l2 = r.predicted_l2.slope;
    out->admissible = r.admissible;
    out->has_h_check = r.h_check.has_value();
    out->h_check_relative_change = r.h_check ? r.h_check->relative_change : 0.0;
  });
}

void perfhom_sweep_free(perfhom_sweep* s) { delete s; }

// ---- theory ----

perfhom_status perfhom_kappa(double eta, int dim, double* out) {
  return guard([&] {
    need(out, "out");
    *out = perfhom::kappa(eta, dim);
  });
}

perfhom_status perfhom_varkappa(double eta, int dim, double* out) {
  return guard([&] {
    need(out, "out");
    *out = perfhom::varkappa(eta, dim);
  });
}

perfhom_status perfhom_bound_w1(double epsilon, double eta, double mu, int dim, perfhom_rate_bound* out) {
  return guard([&] {
    need(out, "out");
    fill_bound(perfhom::bound_w1(epsilon, eta, mu, dim), out);
  });
}

perfhom_status perfhom_bound_l2(double epsilon, double eta, double mu, int dim, double f_norm_omega, double f_norm_theta,
                                perfhom_rate_bound* out) {
  return guard([&] {
    need(out, "out");
    fill_bound(perfhom::bound_l2(epsilon, eta, mu, dim, f_norm_omega, f_norm_theta), out);
  });
}

perfhom_status perfhom_radial_x(double r, int dim, double* out) {
  return guard([&] {
    need(out, "out");
    *out = perfhom::radial_X(r, dim);
  });
}

perfhom_status perfhom_auxiliary_x(double x_norm, double epsilon, double eta, int dim, double r3, double* out) {
  return guard([&] {
    need(out, "out");
    *out = perfhom::auxiliary_X(x_norm, epsilon, eta, dim, r3);
  });
}

perfhom_status perfhom_corrector_alpha(double epsilon, double eta, double mu, int dim, double* alpha_0, double* alpha_j) {
  return guard([&] {
    need(alpha_0, "alpha_0");
    need(alpha_j, "alpha_j");
    const auto a = perfhom::corrector_alpha(epsilon, eta, mu, dim);
    *alpha_0 = a.alpha_0;
    *alpha_j = a.alpha_j;
  });
}

perfhom_status perfhom_sharpness_neumann(double epsilon, double eta, int resolution, perfhom_sharpness* out) {
  return guard([&] {
    need(out, "out");
    const auto s = perfhom::sharpness_neumann(epsilon, eta, resolution);
    out->f_norm_lower = s.f_norm_lower;
    out->corrector_grad_norm = s.corrector_grad_norm;
    out->ratio = s.ratio;
    out->self_difference = s.self_difference;
  });
}

perfhom_status perfhom_lemma_constant(const char* lemma_id, double epsilon, double eta, const char* shape_preset,
                                      const double radii[3], int mesh_resolution, perfhom_lemma_result* out) {
  return guard([&] {
    need(lemma_id, "lemma_id");
    need(out, "out");
    perfhom::LemmaOptions o;
    if (radii) o.radii = {radii[0], radii[1], radii[2]};
    const auto shape = perfhom::shape_from_preset(shape_preset ? shape_preset : "disk", o.radii, 0);
    const auto c = perfhom::lemma_constant(lemma_id, epsilon, eta, shape, mesh_resolution, o);
    out->best_constant = c.best_constant;
    out->eigen_residual = c.eigen_residual;
    out->iterations = c.iterations;
    out->vertices = c.vertices;
  });
}

perfhom_status perfhom_predicted_dominant_slope(double eta0, double gamma, double mu0, double delta, int dim, const char* which,
                                                perfhom_predicted_slope* out) {
  return guard([&] {
    need(which, "which");
    need(out, "out");
    const auto p = perfhom::predicted_dominant_slope(perfhom::ScalingLaw::power(eta0, gamma, mu0, delta), dim, which);
    *out = {};
    out->slope = p.slope;
    std::snprintf(out->dominant, sizeof out->dominant, "%s", p.dominant.c_str());
    out->log_flag = p.log_flag;
  });
}

perfhom_status perfhom_fit_rate(const double* eps, const double* values, size_t n, double* slope, double* intercept,
                                double* residual) {
  return guard([&] {
    need(eps, "eps");
    need(values, "values");
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < n; ++i) pts.emplace_back(eps[i], values[i]);
    const auto f = perfhom::fit_rate(pts);
    if (slope) *slope = f.slope;
    if (intercept) *intercept = f.intercept;
    if (residual) *residual = f.residual;
  });
}

}  // extern "C"
