#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "shellmem/harness.hpp"

using namespace shellmem;

namespace {

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "test");
}

Scenario tiny(ForcePreset f) {
  Scenario s = builtin_scenario("cylinder-panel");
  s.force = f;
  s.nx = s.ny = 2;
  s.layers = 2;
  s.N = 3;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_prefix(const std::string& csv, const std::string& prefix) {
  std::istringstream in(csv);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) n += line.rfind(prefix, 0) == 0;
  return n;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("shellmem_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(ParseScenario, DefaultsAndOverrides) {
  const Scenario s = parse(
      "# comment line\n"
      "name = \"my panel\"   # trailing comment\n"
      "chart = cylinder\n"
      "chart_param = 2.5\n"
      "clamped = [bottom, left]\n"
      "lambda = 0.5\n"
      "eps = [0.3, 0.1]\n"
      "T = 2\n"
      "N = 8\n"
      "phi_convention = as-printed\n");
  EXPECT_EQ(s.name, "my panel");
  EXPECT_EQ(s.chart_param, 2.5);
  EXPECT_EQ(s.clamped, (std::set<Side>{Side::Bottom, Side::Left}));
  EXPECT_EQ(s.params.lambda(), 0.5);
  EXPECT_EQ(s.params.mu(), 1.0);
  EXPECT_EQ(s.eps, (std::vector<double>{0.3, 0.1}));
  EXPECT_EQ(s.T, 2.0);
  EXPECT_EQ(s.N, 8);
  EXPECT_EQ(s.convention, PhiConvention::AsPrinted);
}

TEST(ParseScenario, BuiltinSeed) {
  const Scenario s = parse("scenario = plate\nN = 4\n");
  EXPECT_EQ(s.chart, "plane");
  EXPECT_FALSE(s.expect_first_kind);
  EXPECT_EQ(s.N, 4);
}

TEST(ParseScenario, Errors) {
  EXPECT_THROW(parse("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse("N = 4\nN = 5\n"), ConfigError);
  EXPECT_THROW(parse("N = 4\nscenario = plate\n"), ConfigError);
  EXPECT_THROW(parse("scenario = nowhere\n"), ConfigError);
  EXPECT_THROW(parse("N = four\n"), ConfigError);
  EXPECT_THROW(parse("N = 2.5\n"), ConfigError);
  EXPECT_THROW(parse("eps = [0.1, 0.2]\n"), ConfigError);
  EXPECT_THROW(parse("eps = [0.1, -0.05]\n"), ConfigError);
  EXPECT_THROW(parse("chart = torus\n"), ConfigError);
  EXPECT_THROW(parse("clamped = [middle]\n"), ConfigError);
  EXPECT_THROW(parse("clamped = []\n"), ConfigError);
  EXPECT_THROW(parse("mu = 0\n"), ConfigError);
  EXPECT_THROW(parse("name = \"open\n"), ConfigError);
  EXPECT_THROW(parse("just text\n"), ConfigError);
  EXPECT_THROW(parse("time_profile = constant\n"), ConfigError);  // manufactured needs g(0) = 0
  EXPECT_THROW(load_scenario("/nonexistent/config.toml"), ConfigError);
}

TEST(ParseScenario, ShippedConfigsLoad) {
  const std::filesystem::path dir = SHELLMEM_CONFIG_DIR;
  for (const auto& name : builtin_scenario_names()) {
    const Scenario s = load_scenario(dir / (name + ".toml"));
    EXPECT_EQ(s.name, name);
  }
  const Scenario a = load_scenario(dir / "cylinder-panel.toml"), b = builtin_scenario("cylinder-panel");
  EXPECT_EQ(a.nx, b.nx);
  EXPECT_EQ(a.eps, b.eps);
  EXPECT_EQ(a.force, b.force);
  EXPECT_EQ(a.profile, b.profile);
  EXPECT_EQ(a.clamped, b.clamped);
}

TEST(ManufacturedProfile, ConvolutionMatchesQuadrature) {
  const double k = 1.7;
  for (TimeProfile p : {TimeProfile::Ramp, TimeProfile::Sine}) {
    const double t = 0.9;
    const int n = 4000;
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = (i + 0.5) * t / n;
      q += std::exp(-k * (t - s)) * manufactured_profile(p, s, k).g * t / n;
    }
    EXPECT_NEAR(manufactured_profile(p, t, k).conv, q, 1e-7) << profile_name(p);
    EXPECT_EQ(manufactured_profile(p, 0.0, k).g, 0.0);
  }
}

TEST(ManufacturedShape, VanishesOnBoundaryAndMatchesDerivatives) {
  const Scenario s = builtin_scenario("cylinder-panel");
  const AnalyticField2D X = manufactured_shape(s);
  EXPECT_EQ(X(Vec2(0.0, 0.4)).value.norm(), 0.0);
  EXPECT_EQ(X(Vec2(0.3, 1.0)).value.norm(), 0.0);
  const Vec2 y(0.3, 0.6);
  const double h = 1e-6;
  for (int a = 0; a < 2; ++a) {
    Vec2 e = Vec2::Zero();
    e[a] = h;
    const Vec3 fd = (X(y + e).value - X(y - e).value) / (2 * h);
    EXPECT_LT((fd - X(y).grad.col(a)).cwiseAbs().maxCoeff(), 1e-8);
    const Vec2 hd = (X(y + e).grad.row(2) - X(y - e).grad.row(2)).transpose() / (2 * h);
    EXPECT_LT((hd - X(y).hess3->col(a)).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(ConvergenceReport, EmptyReportIsHeaderOnly) {
  ConvergenceReport r;
  EXPECT_EQ(report_csv(r), "row,eps,distance,d3,k0\n");
}

TEST(ConvergenceReport, ThreeRowsGiveTwoRatios) {
  ConvergenceReport r;
  r.rows = {{0.2, 0.04, 0.1, 1.0, 0.0}, {0.1, 0.02, 0.05, 1.0, 0.0}, {0.05, 0.01, 0.025, 1.0, 0.0}};
  const std::string csv = report_csv(r);
  EXPECT_EQ(count_prefix(csv, "data,"), 3);
  EXPECT_EQ(count_prefix(csv, "ratio,"), 2);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.distance_ratios(), (std::vector<double>{2.0, 2.0}));
  r.rows[2].distance = 0.019;
  EXPECT_FALSE(r.ratios_ok());
  EXPECT_TRUE(r.distances_decreasing());
  r.rows[2].distance = 0.03;
  EXPECT_FALSE(r.distances_decreasing());
}

TEST(RunConvergence, ZeroForceGivesZeroDistances) {
  const ConvergenceReport r = run_convergence(tiny(ForcePreset::Zero));
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.distance, 0.0);
    EXPECT_EQ(row.d3, 0.0);
  }
}

TEST(RunConvergence, SingleEpsHasNoRatio) {
  Scenario s = tiny(ForcePreset::Manufactured);
  s.eps = {0.1};
  const ConvergenceReport r = run_convergence(s);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_GT(r.rows[0].distance, 0.0);
  const std::string csv = report_csv(r);
  EXPECT_EQ(count_prefix(csv, "data,"), 1);
  EXPECT_EQ(count_prefix(csv, "ratio,"), 0);
}

TEST(RunConvergence, ClassificationMismatchAborts) {
  Scenario s = tiny(ForcePreset::Smooth);
  s.profile = TimeProfile::Constant;
  s.expect_first_kind = false;
  EXPECT_THROW(run_convergence(s), ClassificationMismatchError);
  Scenario plate = builtin_scenario("plate");
  plate.nx = plate.ny = 2;
  EXPECT_THROW(run_convergence(plate), ClassificationMismatchError);
}

TEST(RunConvergence, EmittedFilesAreDeterministic) {
  const Scenario s = tiny(ForcePreset::Manufactured);
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  emit_report(run_convergence(s), d1);
  emit_report(run_convergence(s), d2);
  for (const char* f : {"convergence.csv", "convergence.txt"}) {
    ASSERT_TRUE(std::filesystem::exists(d1 / f)) << f;
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  }
}

TEST(SingleSolves, EmitDeterministicFiles) {
  Scenario s = tiny(ForcePreset::Smooth);
  s.profile = TimeProfile::Sine;
  const auto d1 = scratch("solve1"), d2 = scratch("solve2");
  emit_solve2d(run_solve2d(s), d1);
  emit_solve2d(run_solve2d(s), d2);
  emit_solve3d(run_solve3d(s, 0.1), d1);
  emit_solve3d(run_solve3d(s, 0.1), d2);
  for (const auto& e : std::filesystem::directory_iterator(d1))
    EXPECT_EQ(slurp(e.path()), slurp(d2 / e.path().filename())) << e.path().filename();
}

TEST(GeometryCheck, AllBuiltinChartsPass) {
  for (const auto& name : builtin_scenario_names()) {
    const GeometryCheckReport r = run_geometry_check(builtin_scenario(name));
    EXPECT_TRUE(r.passed()) << name;
  }
}

TEST(Properties, UnknownSuiteRejected) {
  EXPECT_THROW(run_properties("nonsense"), UnknownSuiteError);
  EXPECT_EQ(property_suites().size(), 6u);
}

TEST(Properties, CsvHasOneRowPerCheck) {
  const PropertyReport r = run_properties("memory");
  EXPECT_EQ(count_prefix(properties_csv(r), "check,"), 1);
  std::istringstream in(properties_csv(r));
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(r.checks.size()));
}
