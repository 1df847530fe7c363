#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "shellmem/geometry.hpp"
#include "shellmem/kinematics.hpp"
#include "shellmem/material.hpp"
#include "shellmem/memory.hpp"
#include "shellmem/mesh.hpp"
#include "shellmem/solver2d.hpp"
#include "shellmem/solver3d.hpp"

namespace shellmem {

/// Bad or inconsistent configuration (maps to exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The kernel diagnostic disagrees with what the scenario claims.
class ClassificationMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownSuiteError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ForcePreset { Zero, Smooth, Manufactured };
enum class TimeProfile { Constant, Ramp, Sine };

std::string force_name(ForcePreset f);
std::string profile_name(TimeProfile p);

struct Scenario {
  std::string name = "cylinder-panel";
  std::string chart = "cylinder";  // plane | cylinder | hypar | cap
  double chart_param = 1.0;        // radius (cylinder) or c (hypar, cap)
  Vec2 lo{0.0, 0.0}, hi{1.0, 1.0};
  std::set<Side> clamped{Side::Bottom};
  MaterialParams params{1.0, 1.0, 1.0, 1.0};

  ForcePreset force = ForcePreset::Manufactured;
  TimeProfile profile = TimeProfile::Ramp;
  double force_scale = 1.0;
  double normal_scale = 1.0;          // F^33 weight of the smooth preset
  Vec3 amplitude{0.2, 0.1, 0.1};      // manufactured field components
  int bump_power = 2;

  double T = 1.0;
  int N = 20;
  int nx = 12, ny = 12;
  int layers = 4, order = 2;
  std::vector<double> eps{0.2, 0.1, 0.05};
  bool expect_first_kind = true;
  bool memory = true;
  PhiConvention convention = PhiConvention::Consistent;
  int thickness_gauss = 4;
  double min_ratio = 1.2;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

/// key = value lines; '#' starts a comment; strings may be quoted; lists use [a, b].
/// A `scenario = <builtin>` line must come first when present and seeds the defaults.
Scenario parse_scenario(std::istream& in, const std::string& origin = "<config>");
Scenario load_scenario(const std::filesystem::path& path);

std::unique_ptr<MidsurfaceChart> make_chart(const Scenario& s);
Mesh2D make_mesh(const Scenario& s);
ForceSampler make_forces(const Scenario& s, const MidsurfaceChart& chart);

/// Time factor g(t) of the manufactured field xi = g(t) X(y), with g' and the
/// memory integral int_0^t e^{-k(t-s)} g(s) ds in closed form.
struct ProfileValues {
  double g = 0.0, dg = 0.0, conv = 0.0;
};
ProfileValues manufactured_profile(TimeProfile p, double t, double k);

/// Spatial part X(y) of the manufactured field: amplitude * beta(y), with beta a
/// polynomial bump vanishing to order bump_power on the boundary of [lo, hi].
AnalyticField2D manufactured_shape(const Scenario& s);

/// phi^{ab} of the manufactured field at a point (a gamma + b gamma_dot - c * gamma).
Mat2 manufactured_phi(const Scenario& s, const SurfaceGeometry& g, const Jet2& X, double t);

// ---------------------------------------------------------------------------
// Convergence experiment

struct ConvergenceRow {
  double eps = 0.0;
  double distance = 0.0;  // |u_bar(eps) - xi_h|^M_{T,omega}
  double d3 = 0.0;        // time-integrated |d_3 u(eps)|_{0,Omega}
  double k0 = 0.0;        // empirical bound constant of the load functional
  double runtime = 0.0;   // seconds; kept out of the files for determinism
};

struct ConvergenceReport {
  std::string scenario;
  KernelReport kernel;
  double xi_norm = 0.0;  // |xi_h|^M_{T,omega}
  double min_ratio = 1.2;
  std::vector<ConvergenceRow> rows;

  std::vector<double> distance_ratios() const;
  std::vector<double> d3_ratios() const;
  bool distances_decreasing() const;
  bool d3_decreasing() const;
  bool ratios_ok() const;
  bool passed() const { return distances_decreasing() && d3_decreasing() && ratios_ok(); }
};

ConvergenceReport run_convergence(const Scenario& s, std::ostream* log = nullptr);

/// Writes convergence.csv and convergence.txt into `dir`.
void emit_report(const ConvergenceReport& r, const std::filesystem::path& dir);
std::string report_csv(const ConvergenceReport& r);
std::string report_table(const ConvergenceReport& r);

// ---------------------------------------------------------------------------
// Single solves

struct Solve2DResult {
  Mesh2D mesh;
  KernelReport kernel;
  DisplacementHistory history;
};
Solve2DResult run_solve2d(const Scenario& s);
void emit_solve2d(const Solve2DResult& r, const std::filesystem::path& dir);

struct Solve3DResult {
  double eps = 0.0;
  Mesh2D mesh2d;
  DisplacementHistory history;
  std::vector<Eigen::VectorXd> average;
  std::vector<double> d3, average_seminorm;
};
Solve3DResult run_solve3d(const Scenario& s, double eps);
void emit_solve3d(const Solve3DResult& r, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Checks

struct PropertyCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct PropertyReport {
  std::string suite;
  std::vector<PropertyCheck> checks;
  bool passed() const;
};

struct GeometryCheckReport {
  std::string chart;
  ExpansionTable table;
  std::vector<PropertyCheck> checks;
  bool passed() const;
};

GeometryCheckReport run_geometry_check(const Scenario& s, std::uint64_t seed = 1);
void emit_geometry_check(const GeometryCheckReport& r, const std::filesystem::path& dir);

std::vector<std::string> property_suites();
PropertyReport run_properties(const std::string& suite, std::uint64_t seed = 1);
void emit_properties(const PropertyReport& r, const std::filesystem::path& dir);
std::string properties_csv(const PropertyReport& r);

/// Named quantitative checks shared by the property suites and the acceptance gate.
namespace checks {

/// Max abs error of conv_step against per-segment closed-form quadrature over
/// `trials` random (k, dt, N) triples with random piecewise-linear inputs.
double conv_step_exactness(std::uint64_t seed, int trials);
/// Max abs difference between one recursion over [0, T] and a restart at T/2.
double conv_semigroup(std::uint64_t seed, int trials);
/// Max relative residual of the shear closure ODE on band-limited random inputs.
double shear_closure_residual(std::uint64_t seed, int trials, int N);
/// Max relative residual of the normal closure ODE on band-limited random inputs.
double normal_closure_residual(std::uint64_t seed, int trials, int N);

/// Max over per-eps Korn ratios eps * ||v||_1 / strain_norm for random constrained fields.
struct KornResult {
  std::vector<double> eps;
  std::vector<double> max_ratio;  // per eps
};
KornResult korn_ratios(std::uint64_t seed, int samples, const std::vector<double>& eps_list);

/// Zero-load energy histories for the 3D backward Euler scheme; returns the
/// largest step-to-step increase (<= 0 means non-increasing everywhere).
double dissipation_worst_increase(const std::string& chart, std::uint64_t seed);

/// Error sequence of a manufactured 2D study with its fitted log-log slope.
struct RateStudy {
  std::vector<double> step;   // h = 1/nx or dt
  std::vector<double> error;  // space-time membrane seminorm of xi_h - xi
  double slope = 0.0;
};
/// Cylinder panel, compact bump field, sine profile, fixed fine time step N.
RateStudy manufactured_spatial_rate(const std::vector<int>& nx, int N);
/// Cylinder panel, quadratic field (exact in P2), sine profile on mesh nx.
RateStudy manufactured_temporal_rate(int nx, const std::vector<int>& N);

}  // namespace checks

}  // namespace shellmem
