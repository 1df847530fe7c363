#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shellmem/harness.hpp"

namespace {

using namespace shellmem;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Common {
  std::string config;
  std::string scenario;
  std::string out = "out";
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, Common& c, bool with_scenario = true) {
  if (with_scenario) {
    cmd->add_option("--config", c.config, "scenario config file (key = value)");
    cmd->add_option("--scenario", c.scenario, "built-in scenario name")->excludes("--config");
  }
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", c.seed, "seed for sampled checks")->capture_default_str();
}

Scenario resolve(const Common& c) {
  if (!c.config.empty()) return load_scenario(c.config);
  return builtin_scenario(c.scenario.empty() ? "cylinder-panel" : c.scenario);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_checks(const std::vector<PropertyCheck>& checks) {
  for (const auto& c : checks)
    std::printf("  %-4s %-52s %.4e (threshold %.4e)%s%s\n", c.passed ? "ok" : "FAIL", c.name.c_str(), c.value,
                c.threshold, c.detail.empty() ? "" : "  ", c.detail.c_str());
}

int cmd_geometry(const Common& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = resolve(c);
  const GeometryCheckReport r = run_geometry_check(s, c.seed);
  emit_geometry_check(r, c.out);
  std::printf("geometry-check: chart %s\n", r.chart.c_str());
  print_checks(r.checks);
  std::printf("%s in %.2f s, written to %s\n", r.passed() ? "PASS" : "FAIL", seconds_since(t0), c.out.c_str());
  return r.passed() ? kOk : kFailed;
}

int cmd_solve2d(const Common& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const Solve2DResult r = run_solve2d(resolve(c));
  emit_solve2d(r, c.out);
  std::printf("solve2d: kernel %s (sigma_min %.3e), %zu steps, final |xi_h|_M = %.6e\n", kind_name(r.kernel.kind).c_str(),
              r.kernel.sigma_min, r.history.u.size() - 1, r.history.seminorm.back());
  std::printf("done in %.2f s, written to %s\n", seconds_since(t0), c.out.c_str());
  return kOk;
}

int cmd_solve3d(const Common& c, std::optional<double> eps) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = resolve(c);
  const double e = eps.value_or(s.eps.front());
  if (!(e > 0.0)) throw ConfigError("--eps must be positive");
  const Solve3DResult r = run_solve3d(s, e);
  emit_solve3d(r, c.out);
  std::printf("solve3d: eps %g, %zu steps, final |u_bar|_M = %.6e, final |d3 u| = %.6e\n", r.eps, r.history.u.size() - 1,
              r.average_seminorm.back(), r.d3.back());
  std::printf("done in %.2f s, written to %s\n", seconds_since(t0), c.out.c_str());
  return kOk;
}

int cmd_converge(const Common& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = resolve(c);
  const ConvergenceReport r = run_convergence(s, &std::cout);
  emit_report(r, c.out);
  std::cout << '\n' << report_table(r);
  std::printf("total %.1f s, written to %s\n", seconds_since(t0), c.out.c_str());
  return r.passed() ? kOk : kFailed;
}

int cmd_properties(const Common& c, const std::string& suite) {
  std::vector<std::string> suites = suite == "all" ? property_suites() : std::vector<std::string>{suite};
  bool ok = true;
  for (const auto& name : suites) {
    const auto t0 = std::chrono::steady_clock::now();
    const PropertyReport r = run_properties(name, c.seed);
    emit_properties(r, c.out);
    std::printf("properties %s\n", r.suite.c_str());
    print_checks(r.checks);
    std::printf("%s in %.2f s\n", r.passed() ? "PASS" : "FAIL", seconds_since(t0));
    ok = ok && r.passed();
  }
  return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Viscoelastic shell membrane limit: geometry checks, 2D and 3D solves, eps-convergence sweeps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "shellmem 0.1.0");

  Common common;
  std::optional<double> eps;
  std::string suite;

  auto* geo = app.add_subcommand("geometry-check", "expansion orders and metric sanity for the scenario chart");
  add_common(geo, common);
  auto* s2 = app.add_subcommand("solve2d", "limit membrane problem with long-term memory");
  add_common(s2, common);
  auto* s3 = app.add_subcommand("solve3d", "scaled three-dimensional Kelvin-Voigt problem at one eps");
  add_common(s3, common);
  s3->add_option("--eps", eps, "thickness parameter (default: first entry of the scenario eps list)");
  auto* cv = app.add_subcommand("converge", "eps sweep of the 3D average against the 2D reference");
  add_common(cv, common);
  auto* pr = app.add_subcommand("properties", "run a property suite (or 'all')");
  add_common(pr, common, false);
  pr->add_option("suite", suite, "geometry | material | kinematics | memory | solver2d | solver3d | all")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*geo) return cmd_geometry(common);
    if (*s2) return cmd_solve2d(common);
    if (*s3) return cmd_solve3d(common, eps);
    if (*cv) return cmd_converge(common);
    if (*pr) return cmd_properties(common, suite);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnknownSuiteError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ClassificationMismatchError& e) {
    std::cerr << "classification mismatch: " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
