#include <doctest.h>

#include <cmath>
#include <functional>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "perfhom/core/error.hpp"
#include "perfhom/core/harness.hpp"

using namespace perfhom;

namespace {

const char* kQuick = R"(
[experiment]
name = "unit"
seed = 5
eps_list = [0.4, 0.3, 0.2]
[geometry]
radii = [0.5, 1.0, 1.1]
[mesh]
h0 = 0.1
)";

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::invalid_argument;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

std::vector<double> polyline_x(const std::string& svg, const std::string& id) {
  const std::regex re("<polyline[^>]*id=\"" + id + "\"[^>]*points=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, re));
  std::vector<double> xs;
  std::istringstream in(m[1].str());
  std::string pair;
  while (in >> pair) xs.push_back(std::stod(pair.substr(0, pair.find(','))));
  return xs;
}

}  // namespace

TEST_CASE("config parsing and defaults") {
  const auto c = parse_config(kQuick);
  CHECK(c.name == "unit");
  CHECK(c.seed == 5);
  CHECK(c.eps_list.size() == 3);
  CHECK(c.coefficients == "laplacian");
  CHECK(c.law.mu_vanishes());
  for (double e : c.eps_list) CHECK(mesh_size_for(c, e) <= 0.5 * e * c.law.eta(e));
}

TEST_CASE("config validation failures") {
  auto bad = [](const std::string& extra) { return kind_of([&] { parse_config(std::string(kQuick) + extra); }); };
  CHECK(bad("[nonsense]\nx = 1\n") == ErrorKind::validation);
  CHECK(bad("[solver]\ntoll = 1e-3\n") == ErrorKind::validation);
  CHECK(kind_of([] { parse_config("[experiment]\neps_list = [0.1, 0.2]\n"); }) == ErrorKind::validation);
  CHECK(kind_of([] { parse_config("[experiment]\neps_list = [1.5, 0.2]\n"); }) == ErrorKind::validation);
  CHECK(kind_of([] { parse_config("[mesh]\nnear_factor = 0.8\n"); }) == ErrorKind::validation);
  CHECK(kind_of([] { parse_config("[problem]\nlambda = 0.5\n"); }) == ErrorKind::validation);
  CHECK(kind_of([] { parse_config("[problem]\nforcing = \"mode99\"\n"); }) == ErrorKind::validation);
  CHECK(kind_of([] { parse_config("[experiment\n"); }) == ErrorKind::validation);
  CHECK(kind_of([] { load_config("/nonexistent/perfhom.toml"); }) == ErrorKind::io);
}

TEST_CASE("domain tables and complex lambda") {
  const auto c = parse_config(R"(
[experiment]
domain = { kind = "disk", center = [0.0, 0.0], radius = 1.0 }
[problem]
lambda = [-2.0, 0.5]
lambda0 = "estimate"
)");
  CHECK(c.domain.kind() == DomainKind::disk);
  CHECK(c.lambda == Complex{-2.0, 0.5});
  CHECK_FALSE(c.lambda0.has_value());
}

TEST_CASE("fit_rate") {
  auto f = fit_rate({{1.0, 1.0}, {0.5, 0.25}, {0.25, 0.0625}});
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.residual <= 1e-12);
  f = fit_rate({{1.0, 3.0}, {0.5, 3.0}, {0.25, 3.0}});
  CHECK(std::abs(f.slope) <= 1e-12);
  std::vector<std::pair<double, double>> pts;
  for (double e : {0.1, 0.05, 0.025}) pts.emplace_back(e, e * std::sqrt(std::abs(std::log(e))));
  f = fit_rate(pts);
  CHECK(f.slope >= 0.8);
  CHECK(f.slope <= 1.0);
  CHECK_THROWS(fit_rate({{1.0, 1.0}, {0.5, 0.0}, {0.25, 1.0}}));
  CHECK_THROWS(fit_rate({{1.0, 1.0}, {0.5, 1.0}}));
}

TEST_CASE("predicted dominant slopes") {
  const auto w1 = predicted_dominant_slope(ScalingLaw::power(1.0, 1.0, 0.0, 1.0), 2, "w1");
  CHECK(w1.slope == doctest::Approx(1.0));
  bool t4_flag = false;
  for (const auto& m : w1.monomials) {
    if (m.label == "t4") {
      CHECK(m.exponent == doctest::Approx(2.0));
      t4_flag = m.log_flag;
    }
  }
  CHECK(t4_flag);
  CHECK(predicted_dominant_slope(ScalingLaw::power(1.0, 1.0, 0.0, 1.0), 2, "l2").slope == doctest::Approx(2.0));
  const auto d3 = predicted_dominant_slope(ScalingLaw::power(1.0, 1.0, 1.0, 1.0), 3, "w1");
  CHECK(d3.slope == doctest::Approx(1.5));
  for (const auto& m : d3.monomials) {
    if (m.label == "t3") CHECK(m.exponent == doctest::Approx(2.0));
    if (m.active) CHECK(d3.slope <= m.exponent + 1e-15);
  }
  CHECK_THROWS(predicted_dominant_slope(ScalingLaw::power(1.0, 1.0, 0.0, 1.0), 2, "h2"));
}

TEST_CASE("linear sweep: one Picard iteration per row") {
  auto c = parse_config(kQuick);
  c.eps_list = {0.2, 0.1, 0.05};
  c.h0 = 0.05;
  const auto r = run_sweep(c);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    CHECK(row.ok);
    CHECK(row.picard_iters == 1);
    CHECK(row.error_h1 > 0.0);
    CHECK(std::isfinite(row.ratio_h1));
    CHECK(row.ratio_h1 > 0.0);
    CHECK(row.h <= 0.5 * row.epsilon * row.eta);
  }
  CHECK(r.admissible);
  REQUIRE(r.h1_fit.has_value());
}

TEST_CASE("zero forcing gives degenerate ratios") {
  auto c = parse_config(std::string(kQuick) + "[problem]\nforcing = \"zero\"\n");
  const auto r = run_sweep(c);
  for (const auto& row : r.rows) {
    CHECK(row.error_h1 == 0.0);
    CHECK(row.error_l2 == 0.0);
    CHECK(std::isnan(row.ratio_h1));
  }
  CHECK(report_to_json(r).find("degenerate") != std::string::npos);
  CHECK(report_csv(r).find("degenerate") != std::string::npos);
  CHECK_FALSE(r.h1_fit.has_value());
}

TEST_CASE("reports: determinism, CSV, JSON, SVG") {
  auto c = parse_config(std::string(kQuick) + "[report]\ncompare_mu0 = true\nlemma_constants = true\nlemma_resolution = 12\n" +
                        "[scaling]\nmu0 = 1.0\n" + "[problem]\nnonlinearity = \"saturating\"\n");
  const auto a = run_sweep(c, 2);
  const auto b = run_sweep(c, 1);
  CHECK(report_csv(a) == report_csv(b));
  CHECK(lemma_csv(a) == lemma_csv(b));

  const std::string csv = report_csv(a);
  CHECK(count_lines(csv) == 4);
  CHECK(csv.rfind("epsilon,eta,mu,h,error_l2,error_h1,bound_w1,bound_l2,ratio_h1,picard_iters\n", 0) == 0);
  CHECK(count_lines(lemma_csv(a)) == 1 + 3 * 3);

  const auto back = report_from_json(report_to_json(a));
  CHECK(reports_equal(a, back));
  CHECK(report_to_json(back) == report_to_json(a));
  CHECK(back.rows[1].robin_vs_mu0_h1.has_value());
  CHECK(kind_of([] { report_from_json("{\"rows\": 3}"); }) == ErrorKind::validation);

  const std::string svg = report_svg(a);
  std::size_t polylines = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
  CHECK(polylines == 2);
  for (const char* id : {"error_h1", "bound_w1"}) {
    const auto xs = polyline_x(svg, id);
    REQUIRE(xs.size() == 3);
    for (std::size_t i = 1; i < xs.size(); ++i) CHECK(xs[i] > xs[i - 1]);
  }
}

TEST_CASE("emit_report writes every format") {
  auto c = parse_config(kQuick);
  const auto r = run_sweep(c);
  const auto dir = std::filesystem::temp_directory_path() / "perfhom_unit_emit";
  std::filesystem::remove_all(dir);
  const auto files = emit_report(r, dir.string());
  for (const char* f : {"sweep.csv", "report.json", "error_h1.dat", "bound_w1.dat", "error_l2.dat", "bound_l2.dat", "chart.svg"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  std::ifstream dat(dir / "error_h1.dat");
  double e = 0.0, v = 0.0;
  std::size_t n = 0;
  std::string header;
  std::getline(dat, header);
  CHECK(header.rfind("#", 0) == 0);
  while (dat >> e >> v) ++n;
  CHECK(n == 3);
  std::filesystem::remove_all(dir);
  const auto only = emit_report(r, dir.string(), {"csv"});
  CHECK(only.size() == 1);
  CHECK_FALSE(std::filesystem::exists(dir / "report.json"));
  CHECK_THROWS(emit_report(r, dir.string(), {"pdf"}));
  std::filesystem::remove_all(dir);
}

TEST_CASE("stage failures are recorded per row") {
  // A quadratic Robin law with a large forcing does not contract; the row records the failing stage.
  auto c = parse_config(std::string(kQuick) + "[scaling]\nmu0 = 50.0\ndelta = 0.0\n[problem]\nnonlinearity = \"quadratic\"\n" +
                        "forcing = \"one\"\n[solver]\nmax_iter = 20\n");
  const auto r = run_sweep(c);
  bool any_failed = false;
  for (const auto& row : r.rows) {
    if (!row.ok) {
      any_failed = true;
      CHECK(row.failed_stage == "solve_perturbed");
      CHECK_FALSE(row.message.empty());
    }
  }
  CHECK(any_failed);
  CHECK(report_csv(r).find("failed:solve_perturbed") != std::string::npos);
}
