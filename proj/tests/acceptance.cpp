// Acceptance gate: one PASS/FAIL line per criterion, with measured values and
// wall time against the allowed budget. Exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shellmem/harness.hpp"

using namespace shellmem;

namespace {

struct Outcome {
  bool ok = false;
  std::string summary;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome geometric_orders() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 1.0), X(-1.0, 1.0);
  std::vector<std::pair<Vec2, double>> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({Vec2(U(rng), U(rng)), X(rng)});
  pts.push_back({Vec2(0.5, 0.5), 1.0});
  const auto t = expansion_residuals(CylinderChart(1.0), {0.1, 0.05, 0.025}, pts);
  const double s_in = t.slope(kQuantityChristoffelInPlane), s_g = t.slope(kQuantityMetricDeterminant);
  const double r_n = t.max_residual(kQuantityChristoffelNormal);
  return {s_in >= 1.9 && s_g >= 0.9 && r_n <= 1e-10,
          "slope Gamma^s_ab " + fmt("%.3g", s_in) + " (>= 1.9), slope g-a " + fmt("%.3f", s_g) +
              " (>= 0.9), Gamma^3_ab residual " + fmt("%.2e", r_n) + " (<= 1e-10)"};
}

Outcome tensor_limits() {
  const CylinderChart cyl(1.0);
  const MaterialParams p(1.0, 1.0, 1.0, 1.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0), X(-1.0, 1.0);
  std::vector<std::pair<Vec2, double>> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({Vec2(U(rng), U(rng)), X(rng)});
  pts[0].second = 1.0;

  // 20 points x 50 random arguments = 1000 samples per eps
  const std::vector<double> eps = {0.2, 0.1, 0.05};
  double c_min = std::numeric_limits<double>::infinity();
  for (double e : eps)
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const VolumeGeometry g = volume_metrics(cyl, e, pts[i].first, pts[i].second);
      c_min = std::min({c_min, ellipticity_estimate(tensor3d_elastic(g.metric_ctr, p), 50, 100 + i),
                        ellipticity_estimate(tensor3d_viscous(g.metric_ctr, p), 50, 200 + i)});
    }
  std::vector<double> dist;
  for (double e : {0.1, 0.05, 0.025}) {
    double d = 0.0;
    for (const auto& [y, x3] : pts) {
      const SurfaceGeometry s = surface_frame(cyl, y);
      d = std::max(d, tensor3d_elastic(volume_metrics(s, e, x3).metric_ctr, p)
                          .max_abs_diff(tensor3d_limits(s.metric_ctr, p).elastic));
    }
    dist.push_back(d);
  }
  const double slope = fit_loglog_slope({0.1, 0.05, 0.025}, dist);
  return {slope >= 0.9 && c_min > 0.0, "slope A(eps)-A(0) " + fmt("%.3f", slope) + " (>= 0.9), common ellipticity constant " +
                                           fmt("%.4f", c_min) + " (> 0) over 1000 samples per eps"};
}

Outcome ode_closures() {
  const double rs = checks::shear_closure_residual(1, 20, 2048), rn = checks::normal_closure_residual(1, 20, 2048);
  const TimeGrid g(1.0, 2048);
  const auto e = shear_closure(std::vector<Vec2>(2049, Vec2(1.0, 1.0)), MaterialParams(1.0, 1.0, 1.0, 2.0), g);
  const auto n = normal_closure(std::vector<double>(2049, 2.0), std::vector<double>(2049, 0.0),
                                MaterialParams(0.0, 1.0, 1.0, 1.0), g);
  const double spot = std::max(std::abs(e.back()[0] - 0.3160603), std::abs(n.back() - 0.6321206));
  // the quoted values are rounded to seven decimals; the 1e-9 match is against the closed form
  const double spot_exact =
      std::max(std::abs(e.back()[0] - 0.5 * (1.0 - std::exp(-1.0))), std::abs(n.back() - (1.0 - std::exp(-1.0))));
  return {rs <= 1e-8 && rn <= 1e-8 && spot_exact <= 1e-9 && spot <= 5e-8,
          "residuals shear " + fmt("%.2e", rs) + ", normal " + fmt("%.2e", rn) + " (<= 1e-8, N = 2048); spot values " +
              fmt("%.2e", spot_exact) + " from closed form (<= 1e-9)"};
}

Outcome memory_recursion() {
  const double ex = checks::conv_step_exactness(1, 100), sg = checks::conv_semigroup(1, 100);
  return {ex <= 1e-12 && sg <= 1e-12, "segment-wise exactness " + fmt("%.2e", ex) + ", semigroup restart " +
                                          fmt("%.2e", sg) + " (<= 1e-12, 100 random (k, dt, N))"};
}

Outcome manufactured_2d() {
  const auto sp = checks::manufactured_spatial_rate({3, 6, 12, 24}, 400);
  const auto tm = checks::manufactured_temporal_rate(4, {10, 20, 40, 80});
  return {sp.slope >= 1.8 && tm.slope >= 0.9, "spatial slope " + fmt("%.3f", sp.slope) +
                                                  " (>= 1.8, nx 3..24, P2), temporal slope " + fmt("%.3f", tm.slope) +
                                                  " (>= 0.9, N 10..80)"};
}

Outcome dissipation() {
  double worst = -std::numeric_limits<double>::infinity();
  std::string detail;
  for (const char* c : {"plane", "cylinder", "hypar"}) {
    const double w = checks::dissipation_worst_increase(c, 1);
    worst = std::max(worst, w);
    detail += std::string(detail.empty() ? "" : ", ") + c + " " + fmt("%.3g", w);
  }
  return {worst <= 0.0, "largest step increase of 1/2 K u.u: " + detail + " (<= 0, exact)"};
}

Outcome membrane_limit() {
  const Scenario s = builtin_scenario("cylinder-panel");
  const ConvergenceReport r = run_convergence(s);
  std::ostringstream o;
  o << "distances";
  for (const auto& row : r.rows) o << ' ' << fmt("%.4e", row.distance);
  o << ", ratios";
  for (double x : r.distance_ratios()) o << ' ' << fmt("%.3f", x);
  o << " (>= " << s.min_ratio << "), d3";
  for (const auto& row : r.rows) o << ' ' << fmt("%.4e", row.d3);
  o << " (mesh " << s.nx << "x" << s.ny << "x" << s.layers << ")";
  const bool mesh_ok = s.nx <= 24 && s.ny <= 24 && s.layers <= 4;
  return {r.passed() && mesh_ok, o.str()};
}

Outcome korn() {
  const auto k = checks::korn_ratios(1, 100, {0.2, 0.1, 0.05});
  const double C = *std::max_element(k.max_ratio.begin(), k.max_ratio.end());
  std::ostringstream o;
  o << "max eps |v|_1 / |e(eps; v)| per eps:";
  for (double x : k.max_ratio) o << ' ' << fmt("%.4f", x);
  o << "; C = " << fmt("%.4f", C) << " attained at eps = 0.2 and not exceeded at smaller eps";
  return {C == k.max_ratio.front() && std::isfinite(C), o.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> all = {
      {1, "geometric expansion orders", 5.0, geometric_orders},
      {2, "tensor limits and uniform ellipticity", 10.0, tensor_limits},
      {3, "ODE closures", 1.0, ode_closures},
      {4, "memory recursion", 1.0, memory_recursion},
      {5, "2D manufactured convergence", 120.0, manufactured_2d},
      {6, "3D dissipation identity", 60.0, dissipation},
      {7, "membrane limit as eps -> 0", 900.0, membrane_limit},
      {8, "Korn-type empirical bound", 60.0, korn},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool ok = o.ok && in_time;
    failed += !ok;
    std::printf("%s criterion %d (%s): %s [%.2f s, budget %.0f s%s]\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(),
                o.summary.c_str(), secs, c.budget_s, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
