#include "shellmem/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>

namespace shellmem {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string short_num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// ---------------------------------------------------------------------------
// key = value parsing

struct RawValue {
  std::vector<std::string> items;  // one entry for scalars
  bool is_list = false;
};

std::string unquote(const std::string& s, const std::string& where) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'')) {
    if (s.back() != s.front()) throw ConfigError(where + ": unterminated string");
    return s.substr(1, s.size() - 2);
  }
  return s;
}

RawValue parse_raw(const std::string& text, const std::string& where) {
  RawValue v;
  if (text.empty()) throw ConfigError(where + ": missing value");
  if (text.front() == '[') {
    if (text.back() != ']') throw ConfigError(where + ": unterminated list");
    v.is_list = true;
    const std::string body = trim(text.substr(1, text.size() - 2));
    if (body.empty()) return v;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ConfigError(where + ": empty list entry");
      v.items.push_back(unquote(item, where));
    }
    return v;
  }
  v.items.push_back(unquote(text, where));
  return v;
}

std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

double to_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError(where + ": expected a number, got '" + s + "'");
  return v;
}

int to_int(const std::string& s, const std::string& where) {
  const double v = to_double(s, where);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(where + ": expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& s, const std::string& where) {
  const std::string l = lower(s);
  if (l == "true" || l == "yes" || l == "1") return true;
  if (l == "false" || l == "no" || l == "0") return false;
  throw ConfigError(where + ": expected true or false, got '" + s + "'");
}

const std::string& scalar(const RawValue& v, const std::string& where) {
  if (v.is_list || v.items.size() != 1) throw ConfigError(where + ": expected a single value");
  return v.items.front();
}

std::vector<double> numbers(const RawValue& v, const std::string& where) {
  std::vector<double> out;
  for (const auto& s : v.items) out.push_back(to_double(s, where));
  return out;
}

ForcePreset parse_force(const std::string& s, const std::string& where) {
  const std::string l = lower(s);
  if (l == "zero") return ForcePreset::Zero;
  if (l == "smooth") return ForcePreset::Smooth;
  if (l == "manufactured") return ForcePreset::Manufactured;
  throw ConfigError(where + ": unknown force preset '" + s + "' (zero | smooth | manufactured)");
}

TimeProfile parse_profile(const std::string& s, const std::string& where) {
  const std::string l = lower(s);
  if (l == "constant") return TimeProfile::Constant;
  if (l == "ramp") return TimeProfile::Ramp;
  if (l == "sine") return TimeProfile::Sine;
  throw ConfigError(where + ": unknown time profile '" + s + "' (constant | ramp | sine)");
}

double profile_value(TimeProfile p, double t) {
  switch (p) {
    case TimeProfile::Constant: return 1.0;
    case TimeProfile::Ramp: return t;
    case TimeProfile::Sine: return std::sin(t);
  }
  return 0.0;
}

std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }
double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(now() - t0).count();
}

}  // namespace

std::string force_name(ForcePreset f) {
  switch (f) {
    case ForcePreset::Zero: return "zero";
    case ForcePreset::Smooth: return "smooth";
    case ForcePreset::Manufactured: return "manufactured";
  }
  return "?";
}

std::string profile_name(TimeProfile p) {
  switch (p) {
    case TimeProfile::Constant: return "constant";
    case TimeProfile::Ramp: return "ramp";
    case TimeProfile::Sine: return "sine";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Scenarios

void Scenario::validate() const {
  static const std::set<std::string> charts = {"plane", "cylinder", "hypar", "cap"};
  if (!charts.count(chart)) throw ConfigError("unknown chart '" + chart + "' (plane | cylinder | hypar | cap)");
  if (chart == "cylinder" && !(chart_param > 0.0)) throw ConfigError("cylinder radius must be positive");
  if (!(hi[0] > lo[0] && hi[1] > lo[1])) throw ConfigError("domain must satisfy hi > lo in both directions");
  if (clamped.empty()) throw ConfigError("at least one clamped side is required (meas(gamma_0) > 0)");
  if (!(T > 0.0)) throw ConfigError("T must be positive");
  if (N < 1) throw ConfigError("N must be at least 1");
  if (nx < 1 || ny < 1) throw ConfigError("nx and ny must be at least 1");
  if (layers < 2) throw ConfigError("layers must be at least 2");
  if (order != 1 && order != 2) throw ConfigError("order must be 1 or 2");
  if (thickness_gauss < 1 || thickness_gauss > 32) throw ConfigError("thickness_gauss must be in [1, 32]");
  if (bump_power < 1) throw ConfigError("bump_power must be at least 1");
  if (eps.empty()) throw ConfigError("eps list must not be empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ConfigError("eps values must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("eps list must be strictly decreasing");
  }
  if (force == ForcePreset::Manufactured && profile == TimeProfile::Constant)
    throw ConfigError("the manufactured preset needs a profile with g(0) = 0 (ramp or sine)");
  if (!(min_ratio > 0.0)) throw ConfigError("min_ratio must be positive");
}

std::vector<std::string> builtin_scenario_names() { return {"cylinder-panel", "plate", "hypar", "cap"}; }

Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "cylinder-panel") return s;
  if (name == "plate") {
    s.chart = "plane";
    s.clamped = {Side::Left};
    s.force = ForcePreset::Smooth;
    s.profile = TimeProfile::Constant;
    s.nx = s.ny = 8;
    s.expect_first_kind = false;
    return s;
  }
  if (name == "hypar" || name == "cap") {
    s.chart = name;
    s.chart_param = 0.5;
    s.clamped = {Side::Left, Side::Right, Side::Bottom, Side::Top};
    s.force = ForcePreset::Smooth;
    s.profile = TimeProfile::Constant;
    s.nx = s.ny = 8;
    return s;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

Scenario parse_scenario(std::istream& in, const std::string& origin) {
  Scenario s;
  std::set<std::string> seen;
  std::optional<double> lam, mu, th, rh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = lower(trim(body.substr(0, eq)));
    const RawValue v = parse_raw(trim(body.substr(eq + 1)), where);
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");

    if (key == "scenario") {
      if (seen.size() != 1) throw ConfigError(where + ": 'scenario' must be the first key");
      s = builtin_scenario(scalar(v, where));
    } else if (key == "name") {
      s.name = scalar(v, where);
    } else if (key == "chart") {
      s.chart = lower(scalar(v, where));
    } else if (key == "chart_param") {
      s.chart_param = to_double(scalar(v, where), where);
    } else if (key == "domain") {
      const auto d = numbers(v, where);
      if (!v.is_list || d.size() != 4) throw ConfigError(where + ": domain = [y1_lo, y2_lo, y1_hi, y2_hi]");
      s.lo = Vec2(d[0], d[1]);
      s.hi = Vec2(d[2], d[3]);
    } else if (key == "clamped") {
      s.clamped.clear();
      for (const auto& side : v.items) {
        try {
          s.clamped.insert(parse_side(lower(side)));
        } catch (const std::exception&) {
          throw ConfigError(where + ": unknown side '" + side + "' (left | right | bottom | top)");
        }
      }
    } else if (key == "lambda") {
      lam = to_double(scalar(v, where), where);
    } else if (key == "mu") {
      mu = to_double(scalar(v, where), where);
    } else if (key == "theta") {
      th = to_double(scalar(v, where), where);
    } else if (key == "rho") {
      rh = to_double(scalar(v, where), where);
    } else if (key == "force") {
      s.force = parse_force(scalar(v, where), where);
    } else if (key == "time_profile") {
      s.profile = parse_profile(scalar(v, where), where);
    } else if (key == "force_scale") {
      s.force_scale = to_double(scalar(v, where), where);
    } else if (key == "normal_scale") {
      s.normal_scale = to_double(scalar(v, where), where);
    } else if (key == "amplitude") {
      const auto a = numbers(v, where);
      if (!v.is_list || a.size() != 3) throw ConfigError(where + ": amplitude = [X1, X2, X3]");
      s.amplitude = Vec3(a[0], a[1], a[2]);
    } else if (key == "bump_power") {
      s.bump_power = to_int(scalar(v, where), where);
    } else if (key == "t") {
      s.T = to_double(scalar(v, where), where);
    } else if (key == "n") {
      s.N = to_int(scalar(v, where), where);
    } else if (key == "nx") {
      s.nx = to_int(scalar(v, where), where);
    } else if (key == "ny") {
      s.ny = to_int(scalar(v, where), where);
    } else if (key == "layers") {
      s.layers = to_int(scalar(v, where), where);
    } else if (key == "order") {
      s.order = to_int(scalar(v, where), where);
    } else if (key == "eps") {
      s.eps = numbers(v, where);
    } else if (key == "expect_first_kind") {
      s.expect_first_kind = to_bool(scalar(v, where), where);
    } else if (key == "memory") {
      s.memory = to_bool(scalar(v, where), where);
    } else if (key == "phi_convention") {
      const std::string c = lower(scalar(v, where));
      if (c == "consistent") s.convention = PhiConvention::Consistent;
      else if (c == "as-printed" || c == "as_printed") s.convention = PhiConvention::AsPrinted;
      else throw ConfigError(where + ": phi_convention is consistent or as-printed");
    } else if (key == "thickness_gauss") {
      s.thickness_gauss = to_int(scalar(v, where), where);
    } else if (key == "min_ratio") {
      s.min_ratio = to_double(scalar(v, where), where);
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  if (lam || mu || th || rh) {
    try {
      s.params = MaterialParams(lam.value_or(s.params.lambda()), mu.value_or(s.params.mu()),
                                th.value_or(s.params.theta()), rh.value_or(s.params.rho()));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(origin + ": " + e.what());
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse_scenario(in, path.string());
}

std::unique_ptr<MidsurfaceChart> make_chart(const Scenario& s) {
  if (s.chart == "plane") return std::make_unique<PlaneChart>();
  if (s.chart == "cylinder") return std::make_unique<CylinderChart>(s.chart_param);
  if (s.chart == "hypar") return std::make_unique<HyparChart>(s.chart_param);
  if (s.chart == "cap") return std::make_unique<EllipticCapChart>(s.chart_param);
  throw ConfigError("unknown chart '" + s.chart + "'");
}

Mesh2D make_mesh(const Scenario& s) { return Mesh2D::rectangle(s.lo, s.hi, s.nx, s.ny, s.clamped); }

ProfileValues manufactured_profile(TimeProfile p, double t, double k) {
  ProfileValues v;
  const double e = std::exp(-k * t);
  switch (p) {
    case TimeProfile::Ramp:
      v.g = t;
      v.dg = 1.0;
      v.conv = t / k - (1.0 - e) / (k * k);
      break;
    case TimeProfile::Sine:
      v.g = std::sin(t);
      v.dg = std::cos(t);
      v.conv = (k * std::sin(t) - std::cos(t) + e) / (k * k + 1.0);
      break;
    case TimeProfile::Constant:
      throw std::invalid_argument("manufactured fields need a profile with g(0) = 0");
  }
  return v;
}

AnalyticField2D manufactured_shape(const Scenario& s) {
  const Vec2 lo = s.lo, len = s.hi - s.lo;
  const Vec3 A = s.amplitude;
  const int p = s.bump_power;
  return [lo, len, A, p](const Vec2& y) {
    const double u1 = (y[0] - lo[0]) / len[0], u2 = (y[1] - lo[1]) / len[1];
    const double q1 = u1 * (1.0 - u1), q2 = u2 * (1.0 - u2);
    const double sv = 16.0 * q1 * q2;
    const double b = std::pow(sv, p);
    const double db = p * std::pow(sv, p - 1);
    const Vec2 ds(16.0 * (1.0 - 2.0 * u1) * q2 / len[0], 16.0 * q1 * (1.0 - 2.0 * u2) / len[1]);
    Jet2 j;
    j.value = A * b;
    j.grad = A * (db * ds).transpose();
    const double d2 = p > 1 ? p * (p - 1) * std::pow(sv, p - 2) : 0.0;
    Mat2 dds;
    dds << -32.0 * q2 / (len[0] * len[0]), 16.0 * (1.0 - 2.0 * u1) * (1.0 - 2.0 * u2) / (len[0] * len[1]),
        16.0 * (1.0 - 2.0 * u1) * (1.0 - 2.0 * u2) / (len[0] * len[1]), -32.0 * q1 / (len[1] * len[1]);
    j.hess3 = A[2] * (d2 * ds * ds.transpose() + db * dds);
    return j;
  };
}

Mat2 manufactured_phi(const Scenario& s, const SurfaceGeometry& g, const Jet2& X, double t) {
  const ProfileValues pv = manufactured_profile(s.profile, t, s.params.k());
  const Mat2 gm = gamma_ab(X, g);
  const Eigen::Vector3d gv(gm(0, 0), gm(1, 1), gm(0, 1));
  const auto mt = membrane_tensors(g.metric_ctr, s.params);
  Eigen::Matrix3d D = pv.g * voigt(mt.a) + pv.dg * voigt(mt.b);
  if (s.memory) D -= pv.conv * voigt(mt.c);
  const Eigen::Vector3d L = D * gv;  // (phi11, phi22, 2 phi12)
  Mat2 phi;
  phi << L[0], 0.5 * L[2], 0.5 * L[2], L[1];
  return s.force_scale * phi;
}

ForceSampler make_forces(const Scenario& s, const MidsurfaceChart& chart) {
  switch (s.force) {
    case ForcePreset::Zero:
      return [](double, const Vec2&, double) { return Mat3::Zero().eval(); };
    case ForcePreset::Smooth: {
      const double sc = s.force_scale, n3 = s.normal_scale;
      const TimeProfile p = s.profile;
      return [sc, n3, p](double t, const Vec2& y, double x3) {
        const double g = sc * profile_value(p, t);
        Mat3 f = Mat3::Zero();
        f(0, 0) = g * (1.0 + y[0]);
        f(1, 1) = g * (0.5 + y[0] * y[1]);
        f(0, 1) = f(1, 0) = g * 0.3 * y[0] * y[1];
        f(2, 2) = g * n3 * (0.5 + 0.5 * x3 * x3);
        return f;
      };
    }
    case ForcePreset::Manufactured: {
      // F^{ab} = phi^{ab} / 2, constant through the thickness, no transverse parts:
      // the limit functional then reproduces phi exactly.
      const AnalyticField2D X = manufactured_shape(s);
      const Scenario copy = s;
      const MidsurfaceChart* c = &chart;
      return [copy, X, c](double t, const Vec2& y, double) {
        const SurfaceGeometry g = surface_frame(*c, y, false);
        Mat3 f = Mat3::Zero();
        f.topLeftCorner<2, 2>() = 0.5 * manufactured_phi(copy, g, X(y), t);
        return f;
      };
    }
  }
  throw ConfigError("unknown force preset");
}

// ---------------------------------------------------------------------------
// Convergence

std::vector<double> ConvergenceReport::distance_ratios() const {
  std::vector<double> r;
  for (std::size_t i = 1; i < rows.size(); ++i) r.push_back(rows[i - 1].distance / rows[i].distance);
  return r;
}

std::vector<double> ConvergenceReport::d3_ratios() const {
  std::vector<double> r;
  for (std::size_t i = 1; i < rows.size(); ++i) r.push_back(rows[i - 1].d3 / rows[i].d3);
  return r;
}

bool ConvergenceReport::distances_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].distance < rows[i - 1].distance)) return false;
  return true;
}

bool ConvergenceReport::d3_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].d3 < rows[i - 1].d3)) return false;
  return true;
}

bool ConvergenceReport::ratios_ok() const {
  for (double r : distance_ratios())
    if (!(r >= min_ratio)) return false;
  return true;
}

namespace {

// (max sqrt g)^{1/2} * max_n (int |F(t_n)|^2 sqrt(g) dx)^{1/2}: by Cauchy-Schwarz this
// bounds |L(eps)(t)(v)| by K0 |e(eps; v)|_{0,Omega}.
double load_bound_constant(const ShellSystem3D& sys, const ForceSampler& F, const TimeGrid& grid) {
  double max_sqrt_g = 0.0, worst = 0.0;
  for (int n = 0; n <= grid.N(); ++n) {
    const double t = grid.t(n);
    double acc = 0.0;
    for_each_volume_point(sys, [&](const VolumeQuadPoint& qp) {
      const Vec2& y = sys.surf.points[qp.surf_index].y;
      acc += qp.weight * qp.geom.sqrt_g * F(t, y, qp.x3).squaredNorm();
      max_sqrt_g = std::max(max_sqrt_g, qp.geom.sqrt_g);
    });
    worst = std::max(worst, std::sqrt(acc));
  }
  return std::sqrt(max_sqrt_g) * worst;
}

}  // namespace

ConvergenceReport run_convergence(const Scenario& s, std::ostream* log) {
  s.validate();
  const auto t0 = now();
  const auto chart = make_chart(s);
  const Mesh2D mesh = make_mesh(s);
  const TimeGrid grid(s.T, s.N);
  const ForceSampler F = make_forces(s, *chart);

  ConvergenceReport rep;
  rep.scenario = s.name;
  rep.min_ratio = s.min_ratio;

  const MembraneSystem ms = assemble_membrane(mesh, *chart, s.params);
  rep.kernel = kernel_diagnostic(ms);
  const bool first = rep.kernel.kind == ShellKind::FirstKind;
  if (first != s.expect_first_kind || !first) {
    std::ostringstream msg;
    msg << "scenario '" << s.name << "': kernel diagnostic reports " << kind_name(rep.kernel.kind) << " (sigma_min "
        << rep.kernel.sigma_min << ", tol " << rep.kernel.tol << ")";
    if (first != s.expect_first_kind)
      msg << " but the scenario is flagged " << (s.expect_first_kind ? "first-kind" : "degenerate");
    else
      msg << "; the convergence experiment needs a first-kind shell";
    throw ClassificationMismatchError(msg.str());
  }

  // 2D reference, computed once
  MembraneSolveOptions opts;
  opts.kernel = rep.kernel;
  opts.memory = s.memory;
  const auto phi = admissible_phi(ms, F, grid, s.thickness_gauss, s.convention);
  const auto xi = solve_membrane(ms, phi, grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * mesh.n_nodes())), opts);
  rep.xi_norm = space_time_seminorm(xi.seminorm, grid.dt());
  if (log) *log << "2D reference: " << kind_name(rep.kernel.kind) << ", |xi_h| = " << rep.xi_norm << " ("
                << seconds_since(t0) << " s)\n";

  const Mesh3D mesh3d(mesh, s.layers, s.order);
  for (double eps : s.eps) {
    const auto te = now();
    ConvergenceRow row;
    row.eps = eps;
    try {
      const ShellSystem3D sys = assemble_3d(mesh3d, *chart, eps, s.params);
      const LoadSampler load = [&](int, double t) { return assemble_admissible_rhs(sys, F, t); };
      const auto hist =
          solve_3d(sys, load, grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * mesh3d.n_nodes())));
      const auto avg = average_to_2d(hist.u, mesh3d, mesh);
      std::vector<double> dist, d3;
      for (std::size_t n = 0; n < avg.size(); ++n) {
        dist.push_back(membrane_seminorm(ms.quad, avg[n] - xi.u[n]));
        d3.push_back(d3_norm(sys, hist.u[n]));
      }
      row.distance = space_time_seminorm(dist, grid.dt());
      row.d3 = space_time_seminorm(d3, grid.dt());
      row.k0 = load_bound_constant(sys, F, grid);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "eps = " << eps << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
    row.runtime = seconds_since(te);
    if (log) *log << "eps = " << eps << ": distance " << row.distance << ", d3 " << row.d3 << " (" << row.runtime
                  << " s)\n";
    rep.rows.push_back(row);
  }
  return rep;
}

std::string report_csv(const ConvergenceReport& r) {
  std::ostringstream out;
  out << "row,eps,distance,d3,k0\n";
  for (const auto& row : r.rows)
    out << "data," << num(row.eps) << ',' << num(row.distance) << ',' << num(row.d3) << ',' << num(row.k0) << '\n';
  const auto dr = r.distance_ratios(), d3r = r.d3_ratios();
  for (std::size_t i = 0; i < dr.size(); ++i)
    out << "ratio," << num(r.rows[i + 1].eps) << ',' << num(dr[i]) << ',' << num(d3r[i]) << ",\n";
  return out.str();
}

std::string report_table(const ConvergenceReport& r) {
  std::ostringstream out;
  char buf[256];
  out << "scenario: " << r.scenario << '\n';
  out << "kernel: " << kind_name(r.kernel.kind) << "  sigma_min=" << short_num(r.kernel.sigma_min)
      << "  tol=" << short_num(r.kernel.tol) << '\n';
  out << "|xi_h|^M_T = " << short_num(r.xi_norm) << '\n';
  std::snprintf(buf, sizeof buf, "%10s %14s %14s %14s %10s %10s\n", "eps", "distance", "d3", "K0", "ratio", "d3 ratio");
  out << buf;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    std::string ratio = "-", d3ratio = "-";
    if (i > 0) {
      ratio = short_num(r.rows[i - 1].distance / row.distance);
      d3ratio = short_num(r.rows[i - 1].d3 / row.d3);
    }
    std::snprintf(buf, sizeof buf, "%10.4g %14.6e %14.6e %14.6e %10s %10s\n", row.eps, row.distance, row.d3, row.k0,
                  ratio.c_str(), d3ratio.c_str());
    out << buf;
  }
  if (r.rows.size() >= 2) {
    std::vector<double> e, d, d3;
    for (const auto& row : r.rows) {
      e.push_back(row.eps);
      d.push_back(row.distance);
      d3.push_back(row.d3);
    }
    out << "fitted log-log slope: distance " << short_num(fit_loglog_slope(e, d)) << ", d3 "
        << short_num(fit_loglog_slope(e, d3)) << '\n';
  }
  out << "distances strictly decreasing: " << (r.distances_decreasing() ? "yes" : "no") << '\n';
  out << "d3 strictly decreasing: " << (r.d3_decreasing() ? "yes" : "no") << '\n';
  out << "consecutive ratios >= " << short_num(r.min_ratio) << ": " << (r.ratios_ok() ? "yes" : "no") << '\n';
  out << "verdict: " << (r.passed() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

void emit_report(const ConvergenceReport& r, const std::filesystem::path& dir) {
  ensure_dir(dir);
  write_file(dir / "convergence.csv", report_csv(r));
  write_file(dir / "convergence.txt", report_table(r));
}

// ---------------------------------------------------------------------------
// Single solves

Solve2DResult run_solve2d(const Scenario& s) {
  s.validate();
  const auto chart = make_chart(s);
  Solve2DResult res;
  res.mesh = make_mesh(s);
  const TimeGrid grid(s.T, s.N);
  const MembraneSystem ms = assemble_membrane(res.mesh, *chart, s.params);
  res.kernel = kernel_diagnostic(ms);
  if ((res.kernel.kind == ShellKind::FirstKind) != s.expect_first_kind)
    throw ClassificationMismatchError("scenario '" + s.name + "' classification mismatch: kernel diagnostic reports " +
                                      kind_name(res.kernel.kind));
  MembraneSolveOptions opts;
  opts.kernel = res.kernel;
  opts.memory = s.memory;
  const auto F = make_forces(s, *chart);
  res.history = solve_membrane(ms, admissible_phi(ms, F, grid, s.thickness_gauss, s.convention), grid,
                               Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * res.mesh.n_nodes())), opts);
  // the sampler refers to ms, which dies here; history is self-contained
  return res;
}

namespace {

void append_field(std::ostringstream& out, const std::string& prefix, const Mesh2D& mesh, const Eigen::VectorXd& u) {
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
    const auto k = static_cast<Eigen::Index>(3 * i);
    out << prefix << i << ',' << num(mesh.nodes[i][0]) << ',' << num(mesh.nodes[i][1]) << ',' << num(u[k]) << ','
        << num(u[k + 1]) << ',' << num(u[k + 2]) << '\n';
  }
}

}  // namespace

void emit_solve2d(const Solve2DResult& r, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::ostringstream k, summ, field;
  k << "sigma_min,norm_Ka,tol,kind\n"
    << num(r.kernel.sigma_min) << ',' << num(r.kernel.norm_Ka) << ',' << num(r.kernel.tol) << ','
    << kind_name(r.kernel.kind) << '\n';
  summ << "n,t,seminorm,energy\n";
  field << "n,t,node,y1,y2,xi1,xi2,xi3\n";
  for (std::size_t n = 0; n < r.history.u.size(); ++n) {
    summ << n << ',' << num(r.history.t[n]) << ',' << num(r.history.seminorm[n]) << ',' << num(r.history.energy[n])
         << '\n';
    append_field(field, std::to_string(n) + "," + num(r.history.t[n]) + ",", r.mesh, r.history.u[n]);
  }
  write_file(dir / "solve2d_kernel.csv", k.str());
  write_file(dir / "solve2d_summary.csv", summ.str());
  write_file(dir / "solve2d_field.csv", field.str());
}

Solve3DResult run_solve3d(const Scenario& s, double eps) {
  s.validate();
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  const auto chart = make_chart(s);
  Solve3DResult res;
  res.eps = eps;
  res.mesh2d = make_mesh(s);
  const Mesh3D mesh3d(res.mesh2d, s.layers, s.order);
  const TimeGrid grid(s.T, s.N);
  const ShellSystem3D sys = assemble_3d(mesh3d, *chart, eps, s.params);
  const auto F = make_forces(s, *chart);
  res.history = solve_3d(sys, [&](int, double t) { return assemble_admissible_rhs(sys, F, t); }, grid,
                         Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * mesh3d.n_nodes())));
  res.average = average_to_2d(res.history.u, mesh3d, res.mesh2d);
  const SurfaceQuadrature quad = SurfaceQuadrature::build(res.mesh2d, *chart);
  for (std::size_t n = 0; n < res.average.size(); ++n) {
    res.d3.push_back(d3_norm(sys, res.history.u[n]));
    res.average_seminorm.push_back(membrane_seminorm(quad, res.average[n]));
  }
  return res;
}

void emit_solve3d(const Solve3DResult& r, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::ostringstream summ, avg, fin;
  summ << "n,t,eps,d3,energy,average_seminorm\n";
  avg << "n,t,node,y1,y2,u1,u2,u3\n";
  for (std::size_t n = 0; n < r.history.u.size(); ++n) {
    summ << n << ',' << num(r.history.t[n]) << ',' << num(r.eps) << ',' << num(r.d3[n]) << ','
         << num(r.history.energy[n]) << ',' << num(r.average_seminorm[n]) << '\n';
    append_field(avg, std::to_string(n) + "," + num(r.history.t[n]) + ",", r.mesh2d, r.average[n]);
  }
  // full 3D field at the final time
  fin << "node,y1,y2,x3,u1,u2,u3\n";
  const auto& u = r.history.u.back();
  const std::size_t n2 = r.mesh2d.n_nodes();
  const std::size_t planes = static_cast<std::size_t>(u.size()) / (3 * n2);
  for (std::size_t p = 0; p < planes; ++p) {
    const double x3 = planes > 1 ? -1.0 + 2.0 * static_cast<double>(p) / static_cast<double>(planes - 1) : 0.0;
    for (std::size_t i = 0; i < n2; ++i) {
      const auto k = static_cast<Eigen::Index>(3 * (p * n2 + i));
      fin << p * n2 + i << ',' << num(r.mesh2d.nodes[i][0]) << ',' << num(r.mesh2d.nodes[i][1]) << ',' << num(x3) << ','
          << num(u[k]) << ',' << num(u[k + 1]) << ',' << num(u[k + 2]) << '\n';
    }
  }
  write_file(dir / "solve3d_summary.csv", summ.str());
  write_file(dir / "solve3d_average.csv", avg.str());
  write_file(dir / "solve3d_final.csv", fin.str());
}

// ---------------------------------------------------------------------------
// Geometry check

bool PropertyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

bool GeometryCheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

GeometryCheckReport run_geometry_check(const Scenario& s, std::uint64_t seed) {
  s.validate();
  if (s.eps.size() < 2) throw ConfigError("geometry-check needs at least two eps values");
  const auto chart = make_chart(s);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u1(s.lo[0], s.hi[0]), u2(s.lo[1], s.hi[1]), ux(-1.0, 1.0);
  std::vector<std::pair<Vec2, double>> pts;
  for (int i = 0; i < 40; ++i) {
    const double a = u1(rng), b = u2(rng), c = ux(rng);
    pts.push_back({Vec2(a, b), c});
  }
  pts.push_back({0.5 * (s.lo + s.hi), 1.0});

  GeometryCheckReport rep;
  rep.chart = chart->name();
  rep.table = expansion_residuals(*chart, s.eps, pts);

  auto slope_check = [&](const char* q, double min_slope) {
    const double sl = rep.table.slope(q);
    rep.checks.push_back({std::string("slope ") + q, sl >= min_slope, sl, min_slope,
                          std::isinf(sl) ? "exact (all residuals below floor)" : ""});
  };
  slope_check(kQuantityChristoffelInPlane, 1.9);
  slope_check(kQuantityChristoffelTransverse, 1.9);
  slope_check(kQuantityMetricDeterminant, 0.9);
  const double nres = rep.table.max_residual(kQuantityChristoffelNormal);
  rep.checks.push_back({std::string("residual ") + kQuantityChristoffelNormal, nres <= 1e-10, nres, 1e-10, ""});

  double inv_err = 0.0, min_g = std::numeric_limits<double>::infinity(), zero_err = 0.0;
  for (const auto& [y, x3] : pts) {
    const SurfaceGeometry g = surface_frame(*chart, y, true);
    inv_err = std::max(inv_err, (g.metric_ctr * g.metric_cov - Mat2::Identity()).cwiseAbs().maxCoeff());
    for (double e : s.eps) {
      const VolumeGeometry v = volume_metrics(g, e, x3);
      min_g = std::min(min_g, v.det_g);
      for (int a = 0; a < 2; ++a) zero_err = std::max(zero_err, std::abs(v.christoffel[2](a, 2)));
      for (int p = 0; p < 3; ++p) zero_err = std::max(zero_err, std::abs(v.christoffel[p](2, 2)));
    }
  }
  rep.checks.push_back({"metric inverse", inv_err <= 1e-12, inv_err, 1e-12, "max |a^ab a_bc - delta|"});
  rep.checks.push_back({"min g(eps)", min_g > 0.0, min_g, 0.0, "over samples and eps list"});
  rep.checks.push_back({"exact zeros Gamma^3_a3 Gamma^p_33", zero_err == 0.0, zero_err, 0.0, ""});
  return rep;
}

namespace {
std::string checks_csv(const std::vector<PropertyCheck>& checks) {
  std::ostringstream out;
  out << "check,passed,value,threshold,detail\n";
  for (const auto& c : checks)
    out << '"' << c.name << "\"," << (c.passed ? "true" : "false") << ',' << num(c.value) << ',' << num(c.threshold)
        << ",\"" << c.detail << "\"\n";
  return out.str();
}
}  // namespace

void emit_geometry_check(const GeometryCheckReport& r, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::ostringstream t;
  t << "eps,quantity,sup_residual,fitted_slope\n";
  for (const auto& row : r.table.rows)
    t << num(row.eps) << ',' << row.quantity << ',' << num(row.sup_residual) << ',' << num(row.fitted_slope) << '\n';
  write_file(dir / "geometry_expansion.csv", t.str());
  write_file(dir / "geometry_checks.csv", checks_csv(r.checks));
}

std::string properties_csv(const PropertyReport& r) { return checks_csv(r.checks); }

void emit_properties(const PropertyReport& r, const std::filesystem::path& dir) {
  ensure_dir(dir);
  write_file(dir / ("properties_" + r.suite + ".csv"), properties_csv(r));
}

}  // namespace shellmem
