// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "perfhom/core/error.hpp"
#include "perfhom/core/harness.hpp"
#include "perfhom/core/theory.hpp"

using namespace perfhom;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string num(double v, const char* f = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig shipped(const char* name) { return load_config(std::string(PERFHOM_SOURCE_DIR) + "/configs/" + name); }

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

std::string row_summary(const SweepReport& r, bool l2) {
  std::string s;
  for (const auto& row : r.rows) {
    s += (s.empty() ? "" : " ") + num(row.epsilon, "%g") + ":" + (row.ok ? num(l2 ? row.error_l2 : row.error_h1, "%.3e") : "failed");
  }
  return s;
}

bool all_rows_ok(const SweepReport& r) {
  return std::all_of(r.rows.begin(), r.rows.end(), [](const SweepRow& row) { return row.ok; });
}

// 1. Annulus with a linear Robin law against the 1D radial oracle.
Outcome criterion_1() {
  Outcome o;
  const double rho = 0.2, mu = 0.5;
  const oracle::RadialRobinBvp bvp(rho, mu, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> errors;
  for (double h : {0.02, 0.01}) {
    std::vector<CurveLoop> loops{circle_loop({0.0, 0.0}, 1.0, 0, kVoidRegion, 0), circle_loop({0.0, 0.0}, rho, kVoidRegion, 0, 1)};
    auto m = std::make_shared<Mesh>(triangulate(loops, [h](Point) { return h; }));
    ProblemSpec s;
    s.nonlinearity = nonlinearity_preset("linear", mu);
    s.f = forcing_preset("one");
    const auto r = solve_perturbed(s, m);
    errors.push_back(oracle::l2_against(*m, r.solution.values, [&](Point x) { return bvp(norm(x)); }).relative());
  }
  const double t = seconds_since(t0);
  const double ratio = errors[0] / errors[1];
  o.require(errors[1] <= 2e-3, "rel L2 error at h=0.01 " + num(errors[1], "%.3e") + " <= 2e-3");
  o.require(ratio >= 3.6 && ratio <= 4.4, "halving ratio " + num(ratio) + " in [3.6, 4.4]");
  o.require(t <= 30.0, "runtime " + num(t, "%.1f") + " s <= 30 s");
  return o;
}

// 2. Manufactured homogenized solution.
Outcome criterion_2() {
  Outcome o;
  std::vector<double> errors;
  for (double h : {0.04, 0.02, 0.01}) {
    auto m = std::make_shared<Mesh>(mesh_unperforated(DomainSpec::unit_square(), h));
    const auto r = solve_homogenized(coefficients_preset("laplacian"), -1.0, forcing_preset("mode11"), m);
    errors.push_back(oracle::l2_against(*m, r.solution.values, [](Point x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); })
                         .absolute());
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double ratio = errors[i - 1] / errors[i];
    o.require(ratio >= 3.6 && ratio <= 4.4, "ratio " + num(ratio) + " in [3.6, 4.4]");
  }
  return o;
}

std::vector<double> ratios_h1(const SweepReport& r) {
  std::vector<double> v;
  for (const auto& row : r.rows) {
    if (row.ok && std::isfinite(row.ratio_h1) && row.ratio_h1 > 0.0) v.push_back(row.ratio_h1);
  }
  return v;
}

// 3. H1 rate for mu = 0, eta = eps.
Outcome criterion_3() {
  Outcome o;
  const auto c = shipped("w1_rate.toml");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_sweep(c);
  const double t = seconds_since(t0);
  o.require(all_rows_ok(r) && r.rows.size() == 4, "rows " + row_summary(r, false));
  const double slope = r.h1_fit ? r.h1_fit->slope : std::nan("");
  o.require(slope >= 0.75 && slope <= 1.25, "H1 slope " + num(slope) + " in [0.75, 1.25] (predicted " + num(r.predicted_w1.slope) + ")");
  const auto ratios = ratios_h1(r);
  const double sp = ratios.size() == r.rows.size() ? spread(ratios) : std::nan("");
  o.require(sp <= 5.0, "ratio_h1 spread " + num(sp) + " <= 5");
  if (r.h_check) o.detail += "; h-refinement change " + num(r.h_check->relative_change, "%.3f");
  o.require(t <= 600.0, "runtime " + num(t, "%.1f") + " s <= 600 s");
  return o;
}

// 4. L2 rate with variable first-order coefficients.
Outcome criterion_4() {
  Outcome o;
  const auto c = shipped("l2_rate.toml");
  const auto r = run_sweep(c);
  o.require(all_rows_ok(r), "rows " + row_summary(r, true));
  const double slope = r.l2_fit ? r.l2_fit->slope : std::nan("");
  o.require(slope >= 1.6 && slope <= 2.3, "L2 slope " + num(slope) + " in [1.6, 2.3] (predicted " + num(r.predicted_l2.slope) + ")");
  return o;
}

// 5. Linear Robin law with mu = eps against mu = 0 on the same geometry.
Outcome criterion_5() {
  Outcome o;
  const auto c = shipped("robin_mu_eps.toml");
  const auto r = run_sweep(c);
  o.require(all_rows_ok(r), "rows ok");
  o.require(r.admissible, "admissibility: " + r.admissibility_verdict);
  const double slope = r.mu_fit ? r.mu_fit->slope : std::nan("");
  o.require(slope >= 0.75, "robin vs mu=0 H1 slope " + num(slope) + " >= 0.75");
  return o;
}

// 6. Lemma constants over eps x eta.
Outcome criterion_6() {
  Outcome o;
  for (const char* id : {"3.1", "3.3", "3.6"}) {
    std::vector<double> v;
    for (double eps : {0.2, 0.1, 0.05}) {
      for (double eta : {0.5, 0.25}) v.push_back(lemma_constant(id, eps, eta, CavityShape::unit_disk(), 32).best_constant);
    }
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    o.require(*hi / *lo <= 3.0, std::string(id) + " in [" + num(*lo) + ", " + num(*hi) + "] spread " + num(*hi / *lo) + " <= 3");
  }
  return o;
}

// 7. Special functions.
Outcome criterion_7() {
  Outcome o;
  double ode = 0.0, closed = 0.0;
  for (int dim : {2, 3}) {
    for (double r = 0.05; r <= 5.0 + 1e-12; r += 0.01) {
      // Fourth-order central difference of X'.
      const double h = 1e-3 * r;
      auto dx = [&](double s) { return radial_X_derivative(s, dim); };
      const double d1 = dx(r);
      const double d2 = (dx(r - 2.0 * h) - 8.0 * dx(r - h) + 8.0 * dx(r + h) - dx(r + 2.0 * h)) / (12.0 * h);
      const double res = d2 + (dim - 1.0) / r * d1 - radial_X(r, dim);
      ode = std::max(ode, std::abs(res));
      if (dim == 3) closed = std::max(closed, std::abs(radial_X(r, 3) - std::exp(-r) / r) / (std::exp(-r) / r));
    }
  }
  o.require(ode <= 1e-6, "radial_X ODE residual " + num(ode, "%.2e") + " <= 1e-6");
  o.require(closed <= 1e-10, "dim 3 closed form " + num(closed, "%.2e") + " <= 1e-10");

  double jump = 0.0, lap_in = 0.0, lap_out = 0.0;
  for (int dim : {3, 4, 5}) {
    for (double eps : {0.2, 0.1}) {
      for (double eta : {0.5, 0.2}) {
        const double r3 = 1.5, outer = r3 * eps, inner = outer * eta, n = dim;
        const double expected = r3 * r3 * eps * eps * std::pow(eta, n) * (std::pow(eta, 2.0 - n) - 1.0) / (n * (2.0 - n));
        const double a = auxiliary_X(inner * (1.0 - 1e-16), eps, eta, dim, r3);
        const double b = auxiliary_X(inner * (1.0 + 1e-16), eps, eta, dim, r3);
        jump = std::max({jump, std::abs(a - b), std::abs(a - expected), std::abs(b - expected)});
        const double h = 1e-5 * outer;
        auto lap = [&](double r) {
          const double xm = auxiliary_X(r - h, eps, eta, dim, r3), x0 = auxiliary_X(r, eps, eta, dim, r3);
          const double xp = auxiliary_X(r + h, eps, eta, dim, r3);
          return (xp - 2.0 * x0 + xm) / (h * h) + (n - 1.0) / r * (xp - xm) / (2.0 * h);
        };
        for (double t : {0.2, 0.5, 0.8}) lap_in = std::max(lap_in, std::abs(lap(t * inner) - 1.0));
        for (double t : {0.2, 0.5, 0.8}) lap_out = std::max(lap_out, std::abs(lap(inner + t * (outer - inner))));
      }
    }
  }
  o.require(jump <= 1e-12, "auxiliary_X interface jump " + num(jump, "%.2e") + " <= 1e-12");
  o.require(lap_in <= 1e-6, "|Delta X - 1| inside " + num(lap_in, "%.2e") + " <= 1e-6");
  o.require(lap_out <= 1e-6, "|Delta X| in the shell " + num(lap_out, "%.2e") + " <= 1e-6");
  return o;
}

// 8. Sharpness construction in dim 2.
Outcome criterion_8() {
  Outcome o;
  std::vector<double> ratios;
  double worst_half = 0.0;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto a = sharpness_neumann(eps, eps);
    const auto b = sharpness_neumann(eps, eps / 2.0);
    ratios.push_back(a.ratio);
    worst_half = std::max(worst_half, std::abs(b.f_norm_lower / a.f_norm_lower / 2.0 - 1.0));
  }
  o.require(spread(ratios) <= 2.0, "ratio " + num(ratios[0]) + "/" + num(ratios[1]) + "/" + num(ratios[2]) + " spread " +
                                       num(spread(ratios)) + " <= 2");
  o.require(worst_half <= 0.1, "f_norm per halving of eps*eta deviates from 2 by " + num(100.0 * worst_half, "%.2f") + "% <= 10%");
  return o;
}

// 9. Formula layer arithmetic.
Outcome criterion_9() {
  Outcome o;
  double worst = 0.0;
  auto rel = [&](double got, double want) {
    const double e = want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
    worst = std::max(worst, e);
  };
  const double ln10 = std::log(10.0);
  rel(kappa(0.1, 2), 0.0);
  rel(kappa(0.1, 3), 0.0);
  rel(kappa(0.1, 4), std::sqrt(ln10));
  rel(varkappa(0.1, 3), 1.0);
  rel(varkappa(0.1, 2), ln10);
  auto w = bound_w1(0.1, 0.1, 0.0, 2);
  rel(w.term("t4"), 0.01 * std::sqrt(ln10));
  rel(w.term("t5"), 0.1);
  rel(w.total, 0.1 + 0.01 * std::sqrt(ln10));
  for (int dim = 2; dim <= 6; ++dim) {
    const auto z = bound_w1(0.1, 0.1, 0.0, dim);
    rel(z.term("t1") + z.term("t2") + z.term("t3"), 0.0);
  }
  w = bound_w1(0.1, 0.1, 1.0, 5);
  rel(w.term("t1"), 1e-4);
  rel(w.term("t2"), std::pow(10.0, -2.5));
  rel(w.term("t3"), 1e-3);
  // The kappa monomial eps^2 eta^2 kappa mu in dim 4.
  rel(bound_w1(0.1, 0.1, 1.0, 4).term("t1"), 1e-4 * std::sqrt(ln10));
  rel(bound_l2(0.1, 0.1, 0.0, 2, 1.0, 0.0).total, 1e-4 * ln10 + 0.01);
  rel(bound_l2(0.1, 0.1, 0.0, 3, 1.0, 0.0).total, 1e-4 + 1e-3);
  const auto l1 = bound_l2(0.1, 0.1, 0.5, 2, 1.0, 1.0), l2 = bound_l2(0.1, 0.1, 0.5, 2, 1.0, 2.0);
  rel(l2.term("l6") + l2.term("l7"), 2.0 * (l1.term("l6") + l1.term("l7")));
  rel(l2.term("l4") + l2.term("l5"), l1.term("l4") + l1.term("l5"));
  auto a = corrector_alpha(0.1, 0.1, 0.0, 3);
  rel(a.alpha_0, 0.0);
  rel(a.alpha_j, 0.1 * 0.001 / 2.0);
  a = corrector_alpha(0.1, 0.1, 1.0, 3);
  rel(a.alpha_0, 0.1 * 0.01 / 1.01);
  a = corrector_alpha(0.1, 0.1, 0.0, 2);
  rel(a.alpha_0, 0.0);
  rel(a.alpha_j, 0.1 * 0.01);
  o.require(worst <= 1e-12, "worst relative deviation " + num(worst, "%.2e") + " <= 1e-12 over the tabulated examples");
  return o;
}

// 10. Geometry property sweep.
Outcome criterion_10() {
  Outcome o;
  const double eps_choices[] = {0.3, 0.2, 0.15, 0.1, 0.07};
  const double eta_choices[] = {1.0, 0.5, 0.2};
  const char* shapes[] = {"disk", "star3", "mixed"};
  std::size_t invalid = 0, infeasible_missed = 0, cavities = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const DomainSpec domain = seed % 2 == 0 ? DomainSpec::unit_square() : DomainSpec::unit_disk();
    const double eps = eps_choices[seed % 5];
    const double eta = eta_choices[(seed / 5) % 3];
    const Radii radii{0.5, 1.0, 1.5};
    GenerationOptions g;
    g.seed = seed;
    g.shape_preset = shapes[(seed / 15) % 3];
    const auto p = generate_perforation(domain, eps, eta, radii, g);
    cavities += p.cavities.size();
    if (!validate_a1(p).ok()) ++invalid;
    g.target_count = packing_bound(domain, eps, radii.r3) + 1 + seed % 7;
    try {
      generate_perforation(domain, eps, eta, radii, g);
      ++infeasible_missed;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::infeasible) ++infeasible_missed;
    }
  }
  o.require(invalid == 0, std::to_string(invalid) + " of 1000 generated perforations fail validate_a1 (" + std::to_string(cavities) +
                              " cavities total)");
  o.require(infeasible_missed == 0, std::to_string(infeasible_missed) + " of 1000 over-packed requests not rejected as infeasible");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                                           criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
  const char* titles[] = {"solver oracle (annulus, radial BVP)", "homogenized oracle (manufactured)", "W1_2 rate, mu = 0",
                          "L2 rate, variable first-order coefficients", "Robin perturbation, mu = eps", "lemma constants",
                          "special functions", "sharpness construction", "formula layer", "geometry property sweep"};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
  int failed = 0;
  for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) {
    if (!only.empty() && !only.count(k)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("threw: ") + e.what();
    }
    failed += !out.pass;
    std::printf("criterion %2d %s: %s (%s) [%.1f s]\n", k, out.pass ? "PASS" : "FAIL", titles[k - 1], out.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
