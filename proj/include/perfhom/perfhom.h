#ifndef PERFHOM_H
#define PERFHOM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PERFHOM_API __declspec(dllexport)
#else
#define PERFHOM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum perfhom_status {
  PERFHOM_OK = 0,
  PERFHOM_ERR_INVALID_ARGUMENT = 1,
  PERFHOM_ERR_INFEASIBLE = 2,
  PERFHOM_ERR_VALIDATION = 3,
  PERFHOM_ERR_MESH = 4,
  PERFHOM_ERR_SOLVER = 5,
  PERFHOM_ERR_IO = 6,
  PERFHOM_ERR_UNSUPPORTED = 7,
  PERFHOM_ERR_INTERNAL = 8
} perfhom_status;

typedef struct perfhom_perforation perfhom_perforation;
typedef struct perfhom_mesh perfhom_mesh;
typedef struct perfhom_solution perfhom_solution;
typedef struct perfhom_sweep perfhom_sweep;

/* Message of the last failed call on this thread; empty after a success. */
PERFHOM_API const char* perfhom_last_error(void);
PERFHOM_API const char* perfhom_version(void);
PERFHOM_API const char* perfhom_status_name(perfhom_status status);
/* Frees strings returned through char** out-parameters. */
PERFHOM_API void perfhom_string_free(char* s);

/* ---- geometry ---- */

typedef struct perfhom_domain {
  int kind; /* 0 disk, 1 rectangle */
  double center[2];
  double radius;
  double lo[2];
  double hi[2];
} perfhom_domain;

PERFHOM_API perfhom_domain perfhom_domain_unit_square(void);
PERFHOM_API perfhom_domain perfhom_domain_unit_disk(void);

typedef struct perfhom_generation {
  double epsilon;
  double eta;
  double radii[3];
  /* Negative means fill to the packing bound. */
  int64_t target_count;
  uint64_t seed;
  /* "disk", "star3" or "mixed"; NULL selects "disk". */
  const char* shape_preset;
} perfhom_generation;

PERFHOM_API perfhom_status perfhom_perforation_generate(const perfhom_domain* domain, const perfhom_generation* options,
                                                        perfhom_perforation** out);
/* Geometry of the first eps of a TOML config. */
PERFHOM_API perfhom_status perfhom_perforation_generate_config(const char* toml, uint64_t seed, int override_seed,
                                                               perfhom_perforation** out);
PERFHOM_API perfhom_status perfhom_perforation_from_json(const char* json, perfhom_perforation** out);
PERFHOM_API perfhom_status perfhom_perforation_read(const char* path, perfhom_perforation** out);
PERFHOM_API perfhom_status perfhom_perforation_to_json(const perfhom_perforation* p, char** out_json);
PERFHOM_API perfhom_status perfhom_perforation_write(const perfhom_perforation* p, const char* path);
PERFHOM_API size_t perfhom_perforation_cavity_count(const perfhom_perforation* p);
PERFHOM_API size_t perfhom_packing_bound(const perfhom_domain* domain, double epsilon, double r3);
/* Violations joined by newlines into *out_report (empty when valid); *out_count receives their number. */
PERFHOM_API perfhom_status perfhom_perforation_validate(const perfhom_perforation* p, size_t* out_count, char** out_report);
PERFHOM_API void perfhom_perforation_free(perfhom_perforation* p);

/* ---- mesh ---- */

typedef struct perfhom_mesh_info {
  size_t vertices;
  size_t triangles;
  size_t boundary_edges;
  size_t cavity_edges;
  double h_max;
  double area;
} perfhom_mesh_info;

PERFHOM_API perfhom_status perfhom_mesh_perforated(const perfhom_perforation* p, double h, size_t segments_per_cavity,
                                                   perfhom_mesh** out);
PERFHOM_API perfhom_status perfhom_mesh_unperforated(const perfhom_domain* domain, double h, perfhom_mesh** out);
PERFHOM_API perfhom_status perfhom_mesh_info_get(const perfhom_mesh* m, perfhom_mesh_info* out);
/* Invariant issues joined by newlines; empty when the mesh is valid. */
PERFHOM_API perfhom_status perfhom_mesh_check(const perfhom_mesh* m, const perfhom_perforation* p, size_t* out_count,
                                              char** out_report);
PERFHOM_API perfhom_status perfhom_mesh_to_text(const perfhom_mesh* m, char** out_text);
PERFHOM_API perfhom_status perfhom_mesh_write(const perfhom_mesh* m, const char* path);
PERFHOM_API void perfhom_mesh_free(perfhom_mesh* m);

/* ---- solve ---- */

/* Solves one perforated problem described by a TOML config (first eps of the list) and its homogenized
   counterpart on the same mesh. */
PERFHOM_API perfhom_status perfhom_solve_config(const char* toml, uint64_t seed, int override_seed, perfhom_solution** out);

typedef struct perfhom_solution_info {
  double epsilon;
  double eta;
  double mu;
  size_t vertices;
  size_t cavities;
  int picard_iterations;
  double contraction_estimate;
  double error_l2;
  double error_h1;
  double bound_w1;
  double bound_l2;
} perfhom_solution_info;

PERFHOM_API perfhom_status perfhom_solution_info_get(const perfhom_solution* s, perfhom_solution_info* out);
PERFHOM_API perfhom_status perfhom_solution_to_json(const perfhom_solution* s, char** out_json);
/* Writes solution.json, solution.bin (little-endian float64 re/im pairs) and mesh.txt into dir. */
PERFHOM_API perfhom_status perfhom_solution_write(const perfhom_solution* s, const char* dir);
PERFHOM_API void perfhom_solution_free(perfhom_solution* s);

/* ---- sweep ---- */

typedef struct perfhom_sweep_summary {
  size_t rows;
  size_t failed_rows;
  int has_h1_fit;
  double h1_slope;
  int has_l2_fit;
  double l2_slope;
  int has_mu_fit;
  double mu_slope;
  double predicted_w1;
  double predicted_l2;
  /* max/min of ratio_h1 over rows with a finite positive ratio; 0 when fewer than two. */
  double ratio_spread;
  int admissible;
  int has_h_check;
  double h_check_relative_change;
} perfhom_sweep_summary;

PERFHOM_API perfhom_status perfhom_config_validate(const char* toml, char** out_output_dir);
PERFHOM_API perfhom_status perfhom_sweep_run(const char* toml, uint64_t seed, int override_seed, unsigned threads,
                                             perfhom_sweep** out);
PERFHOM_API perfhom_status perfhom_sweep_from_json(const char* json, perfhom_sweep** out);
PERFHOM_API perfhom_status perfhom_sweep_to_json(const perfhom_sweep* s, char** out_json);
PERFHOM_API perfhom_status perfhom_sweep_csv(const perfhom_sweep* s, char** out_csv);
/* formats: comma separated subset of csv,json,dat,svg; NULL or "" for all. */
PERFHOM_API perfhom_status perfhom_sweep_emit(const perfhom_sweep* s, const char* dir, const char* formats);
PERFHOM_API perfhom_status perfhom_sweep_summary_get(const perfhom_sweep* s, perfhom_sweep_summary* out);
PERFHOM_API void perfhom_sweep_free(perfhom_sweep* s);

/* ---- theory ---- */

typedef struct perfhom_rate_bound {
  size_t count;
  char labels[8][8];
  double values[8];
  double total;
} perfhom_rate_bound;

PERFHOM_API perfhom_status perfhom_kappa(double eta, int dim, double* out);
PERFHOM_API perfhom_status perfhom_varkappa(double eta, int dim, double* out);
PERFHOM_API perfhom_status perfhom_bound_w1(double epsilon, double eta, double mu, int dim, perfhom_rate_bound* out);
PERFHOM_API perfhom_status perfhom_bound_l2(double epsilon, double eta, double mu, int dim, double f_norm_omega,
                                            double f_norm_theta, perfhom_rate_bound* out);
PERFHOM_API perfhom_status perfhom_radial_x(double r, int dim, double* out);
PERFHOM_API perfhom_status perfhom_auxiliary_x(double x_norm, double epsilon, double eta, int dim, double r3, double* out);
PERFHOM_API perfhom_status perfhom_corrector_alpha(double epsilon, double eta, double mu, int dim, double* alpha_0,
                                                   double* alpha_j);

typedef struct perfhom_sharpness {
  double f_norm_lower;
  double corrector_grad_norm;
  double ratio;
  double self_difference;
} perfhom_sharpness;

PERFHOM_API perfhom_status perfhom_sharpness_neumann(double epsilon, double eta, int resolution, perfhom_sharpness* out);

typedef struct perfhom_lemma_result {
  double best_constant;
  double eigen_residual;
  int iterations;
  size_t vertices;
} perfhom_lemma_result;

/* lemma_id is "3.1", "3.3", "3.6" ("3.4" reports PERFHOM_ERR_UNSUPPORTED). shape_preset as for generation. */
PERFHOM_API perfhom_status perfhom_lemma_constant(const char* lemma_id, double epsilon, double eta, const char* shape_preset,
                                                  const double radii[3], int mesh_resolution, perfhom_lemma_result* out);

typedef struct perfhom_predicted_slope {
  double slope;
  char dominant[8];
  int log_flag;
} perfhom_predicted_slope;

/* which is "w1" or "l2"; mu0 == 0 means mu vanishes. */
PERFHOM_API perfhom_status perfhom_predicted_dominant_slope(double eta0, double gamma, double mu0, double delta, int dim,
                                                            const char* which, perfhom_predicted_slope* out);
PERFHOM_API perfhom_status perfhom_fit_rate(const double* eps, const double* values, size_t n, double* slope,
                                            double* intercept, double* residual);

#ifdef __cplusplus
}
#endif

#endif
