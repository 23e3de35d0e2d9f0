#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "perfhom/perfhom.h"

namespace {

const char* kQuick = R"(
[experiment]
name = "capi"
seed = 2
eps_list = [0.4, 0.3, 0.2]
[geometry]
radii = [0.5, 1.0, 1.1]
[mesh]
h0 = 0.1
)";

perfhom_generation generation(double eps, double eta, uint64_t seed) {
  perfhom_generation g{};
  g.epsilon = eps;
  g.eta = eta;
  g.radii[0] = 0.5;
  g.radii[1] = 1.0;
  g.radii[2] = 1.5;
  g.target_count = -1;
  g.seed = seed;
  return g;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::strlen(perfhom_version()) > 0);
  CHECK(std::string(perfhom_status_name(PERFHOM_ERR_SOLVER)).size() > 0);
}

TEST_CASE("perforation lifecycle through the C API") {
  const perfhom_domain d = perfhom_domain_unit_square();
  const perfhom_generation g = generation(0.1, 0.5, 7);
  perfhom_perforation* p = nullptr;
  REQUIRE(perfhom_perforation_generate(&d, &g, &p) == PERFHOM_OK);
  CHECK(perfhom_perforation_cavity_count(p) > 0);
  CHECK(std::string(perfhom_last_error()).empty());

  size_t violations = 99;
  char* report = nullptr;
  CHECK(perfhom_perforation_validate(p, &violations, &report) == PERFHOM_OK);
  CHECK(violations == 0);
  perfhom_string_free(report);

  char* json = nullptr;
  REQUIRE(perfhom_perforation_to_json(p, &json) == PERFHOM_OK);
  perfhom_perforation* q = nullptr;
  REQUIRE(perfhom_perforation_from_json(json, &q) == PERFHOM_OK);
  CHECK(perfhom_perforation_cavity_count(q) == perfhom_perforation_cavity_count(p));
  perfhom_string_free(json);

  perfhom_mesh* m = nullptr;
  REQUIRE(perfhom_mesh_perforated(q, 0.05, 32, &m) == PERFHOM_OK);
  perfhom_mesh_info info{};
  CHECK(perfhom_mesh_info_get(m, &info) == PERFHOM_OK);
  CHECK(info.cavity_edges >= 32 * perfhom_perforation_cavity_count(q));
  size_t issues = 99;
  char* mr = nullptr;
  CHECK(perfhom_mesh_check(m, q, &issues, &mr) == PERFHOM_OK);
  CHECK(issues == 0);
  perfhom_string_free(mr);
  perfhom_mesh_free(m);
  perfhom_perforation_free(q);
  perfhom_perforation_free(p);
}

TEST_CASE("error codes") {
  const perfhom_domain d = perfhom_domain_unit_square();
  perfhom_generation g = generation(0.5, 1.0, 1);
  g.target_count = 10;
  perfhom_perforation* p = nullptr;
  CHECK(perfhom_perforation_generate(&d, &g, &p) == PERFHOM_ERR_INFEASIBLE);
  CHECK(p == nullptr);
  CHECK(std::string(perfhom_last_error()).find("packing") != std::string::npos);
  CHECK(perfhom_perforation_generate(nullptr, &g, &p) == PERFHOM_ERR_INVALID_ARGUMENT);
  CHECK(perfhom_perforation_from_json("{", &p) == PERFHOM_ERR_VALIDATION);
  CHECK(perfhom_packing_bound(&d, 0.5, 1.5) == 0);
  perfhom_lemma_result lr{};
  const double radii[3] = {0.5, 1.0, 1.5};
  CHECK(perfhom_lemma_constant("3.4", 0.1, 0.5, "disk", radii, 16, &lr) == PERFHOM_ERR_UNSUPPORTED);
  char* dir = nullptr;
  CHECK(perfhom_config_validate("[experiment]\neps_list = [0.1, 0.2]\n", &dir) == PERFHOM_ERR_VALIDATION);
  CHECK(dir == nullptr);
  double v = 0.0;
  CHECK(perfhom_kappa(0.1, 1, &v) == PERFHOM_ERR_INVALID_ARGUMENT);
  perfhom_perforation_free(nullptr);
  perfhom_string_free(nullptr);
}

TEST_CASE("theory entry points") {
  perfhom_rate_bound b{};
  REQUIRE(perfhom_bound_w1(0.1, 0.1, 0.0, 2, &b) == PERFHOM_OK);
  CHECK(b.count == 5);
  CHECK(std::string(b.labels[4]) == "t5");
  CHECK(b.total == doctest::Approx(0.1 + 0.01 * std::sqrt(std::log(10.0))).epsilon(1e-12));
  REQUIRE(perfhom_bound_l2(0.1, 0.1, 0.0, 2, 1.0, 0.0, &b) == PERFHOM_OK);
  CHECK(b.total == doctest::Approx(1e-4 * std::log(10.0) + 0.01).epsilon(1e-12));
  double x = 0.0;
  REQUIRE(perfhom_radial_x(1.0, 3, &x) == PERFHOM_OK);
  CHECK(x == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  double a0 = 0.0, aj = 0.0;
  REQUIRE(perfhom_corrector_alpha(0.1, 0.1, 1.0, 3, &a0, &aj) == PERFHOM_OK);
  CHECK(a0 == doctest::Approx(0.1 * 0.01 / 1.01).epsilon(1e-12));
  perfhom_predicted_slope s{};
  REQUIRE(perfhom_predicted_dominant_slope(1.0, 1.0, 1.0, 1.0, 3, "w1", &s) == PERFHOM_OK);
  CHECK(s.slope == doctest::Approx(1.5));
  const double eps[3] = {1.0, 0.5, 0.25};
  const double vals[3] = {1.0, 0.25, 0.0625};
  double slope = 0.0, icpt = 0.0, res = 1.0;
  REQUIRE(perfhom_fit_rate(eps, vals, 3, &slope, &icpt, &res) == PERFHOM_OK);
  CHECK(slope == doctest::Approx(2.0));
  perfhom_lemma_result lr{};
  REQUIRE(perfhom_lemma_constant("3.3", 0.1, 0.5, nullptr, nullptr, 16, &lr) == PERFHOM_OK);
  CHECK(lr.best_constant > 0.0);
}

TEST_CASE("solve and sweep through the C API") {
  perfhom_solution* sol = nullptr;
  REQUIRE(perfhom_solve_config(kQuick, 0, 0, &sol) == PERFHOM_OK);
  perfhom_solution_info si{};
  REQUIRE(perfhom_solution_info_get(sol, &si) == PERFHOM_OK);
  CHECK(si.epsilon == 0.4);
  CHECK(si.picard_iterations == 1);
  CHECK(si.error_h1 > 0.0);
  const auto dir = std::filesystem::temp_directory_path() / "perfhom_capi_solve";
  std::filesystem::remove_all(dir);
  REQUIRE(perfhom_solution_write(sol, dir.string().c_str()) == PERFHOM_OK);
  CHECK(std::filesystem::file_size(dir / "solution.bin") == 16 * si.vertices);
  std::filesystem::remove_all(dir);
  perfhom_solution_free(sol);

  perfhom_sweep* a = nullptr;
  perfhom_sweep* b = nullptr;
  REQUIRE(perfhom_sweep_run(kQuick, 9, 1, 1, &a) == PERFHOM_OK);
  REQUIRE(perfhom_sweep_run(kQuick, 9, 1, 3, &b) == PERFHOM_OK);
  char* ca = nullptr;
  char* cb = nullptr;
  REQUIRE(perfhom_sweep_csv(a, &ca) == PERFHOM_OK);
  REQUIRE(perfhom_sweep_csv(b, &cb) == PERFHOM_OK);
  CHECK(std::string(ca) == std::string(cb));
  perfhom_sweep_summary sum{};
  REQUIRE(perfhom_sweep_summary_get(a, &sum) == PERFHOM_OK);
  CHECK(sum.rows == 3);
  CHECK(sum.failed_rows == 0);
  CHECK(sum.has_h1_fit);
  CHECK(sum.predicted_w1 == doctest::Approx(1.0));

  char* json = nullptr;
  REQUIRE(perfhom_sweep_to_json(a, &json) == PERFHOM_OK);
  perfhom_sweep* c = nullptr;
  REQUIRE(perfhom_sweep_from_json(json, &c) == PERFHOM_OK);
  char* cc = nullptr;
  REQUIRE(perfhom_sweep_csv(c, &cc) == PERFHOM_OK);
  CHECK(std::string(cc) == std::string(ca));

  const auto out = std::filesystem::temp_directory_path() / "perfhom_capi_sweep";
  std::filesystem::remove_all(out);
  REQUIRE(perfhom_sweep_emit(c, out.string().c_str(), "csv,svg") == PERFHOM_OK);
  CHECK(std::filesystem::exists(out / "sweep.csv"));
  CHECK(std::filesystem::exists(out / "chart.svg"));
  CHECK_FALSE(std::filesystem::exists(out / "report.json"));
  std::filesystem::remove_all(out);

  for (char* s : {ca, cb, cc, json}) perfhom_string_free(s);
  perfhom_sweep_free(a);
  perfhom_sweep_free(b);
  perfhom_sweep_free(c);
}
