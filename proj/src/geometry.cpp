#include "shellmem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/LU>

namespace shellmem {

namespace {

using Second = std::array<std::array<Vec3, 2>, 2>;
using Third = std::array<std::array<std::array<Vec3, 2>, 2>, 2>;

Vec2 unit(int a) { return a == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0); }

template <class F>
std::array<Vec3, 2> fd_first(const F& pos, const Vec2& y, double h) {
  std::array<Vec3, 2> d;
  for (int a = 0; a < 2; ++a) d[a] = (pos(y + h * unit(a)) - pos(y - h * unit(a))) / (2.0 * h);
  return d;
}

template <class F>
Second fd_second_from_position(const F& pos, const Vec2& y, double h) {
  Second d;
  const Vec3 p0 = pos(y);
  for (int a = 0; a < 2; ++a) {
    d[a][a] = (pos(y + h * unit(a)) - 2.0 * p0 + pos(y - h * unit(a))) / (h * h);
  }
  const Vec2 e0 = unit(0), e1 = unit(1);
  d[0][1] = (pos(y + h * e0 + h * e1) - pos(y + h * e0 - h * e1) - pos(y - h * e0 + h * e1) +
             pos(y - h * e0 - h * e1)) /
            (4.0 * h * h);
  d[1][0] = d[0][1];
  return d;
}

template <class F>
Third fd_third_from_second(const F& second, const Vec2& y, double h) {
  Third d;
  for (int c = 0; c < 2; ++c) {
    const Second plus = second(y + h * unit(c));
    const Second minus = second(y - h * unit(c));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) d[a][b][c] = (plus[a][b] - minus[a][b]) / (2.0 * h);
  }
  // Symmetrize over all index permutations.
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        if (a <= b && b <= c) {
          Vec3 avg = (d[a][b][c] + d[a][c][b] + d[b][a][c] + d[b][c][a] + d[c][a][b] + d[c][b][a]) / 6.0;
          d[a][b][c] = d[a][c][b] = d[b][a][c] = d[b][c][a] = d[c][a][b] = d[c][b][a] = avg;
        }
      }
  return d;
}

Third zero_third() {
  Third d;
  for (auto& x : d)
    for (auto& yv : x)
      for (auto& z : yv) z.setZero();
  return d;
}

Mat2 inverse2(const Mat2& m) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Mat2 inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

}  // namespace

// ---------------------------------------------------------------------------
// MidsurfaceChart defaults

std::array<Vec3, 2> MidsurfaceChart::first(const Vec2& y) const {
  return fd_first([this](const Vec2& p) { return position(p); }, y, 1e-6 * length_scale());
}

Second MidsurfaceChart::second(const Vec2& y) const {
  return fd_second_from_position([this](const Vec2& p) { return position(p); }, y,
                                 1e-4 * length_scale());
}

Third MidsurfaceChart::third(const Vec2& y) const {
  return fd_third_from_second([this](const Vec2& p) { return second(p); }, y, 1e-5 * length_scale());
}

ChartJet MidsurfaceChart::jet(const Vec2& y, bool with_third) const {
  ChartJet j;
  j.position = position(y);
  j.d1 = first(y);
  j.d2 = second(y);
  if (with_third) {
    j.d3 = third(y);
    j.has_third = true;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Built-in charts

Vec3 PlaneChart::position(const Vec2& y) const { return {y[0], y[1], 0.0}; }
std::array<Vec3, 2> PlaneChart::first(const Vec2&) const { return {Vec3(1, 0, 0), Vec3(0, 1, 0)}; }
Second PlaneChart::second(const Vec2&) const {
  Second d;
  for (auto& r : d)
    for (auto& v : r) v.setZero();
  return d;
}
Third PlaneChart::third(const Vec2&) const { return zero_third(); }

CylinderChart::CylinderChart(double radius) : radius_(radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("cylinder radius must be positive");
}
Vec3 CylinderChart::position(const Vec2& y) const {
  const double u = y[0] / radius_;
  return {radius_ * std::cos(u), radius_ * std::sin(u), y[1]};
}
std::array<Vec3, 2> CylinderChart::first(const Vec2& y) const {
  const double u = y[0] / radius_;
  return {Vec3(-std::sin(u), std::cos(u), 0.0), Vec3(0.0, 0.0, 1.0)};
}
Second CylinderChart::second(const Vec2& y) const {
  const double u = y[0] / radius_;
  Second d = PlaneChart().second(y);
  d[0][0] = Vec3(-std::cos(u), -std::sin(u), 0.0) / radius_;
  return d;
}
Third CylinderChart::third(const Vec2& y) const {
  const double u = y[0] / radius_;
  Third d = zero_third();
  d[0][0][0] = Vec3(std::sin(u), -std::cos(u), 0.0) / (radius_ * radius_);
  return d;
}

HyparChart::HyparChart(double c) : c_(c) {}
Vec3 HyparChart::position(const Vec2& y) const { return {y[0], y[1], c_ * y[0] * y[1]}; }
std::array<Vec3, 2> HyparChart::first(const Vec2& y) const {
  return {Vec3(1.0, 0.0, c_ * y[1]), Vec3(0.0, 1.0, c_ * y[0])};
}
Second HyparChart::second(const Vec2& y) const {
  Second d = PlaneChart().second(y);
  d[0][1] = d[1][0] = Vec3(0.0, 0.0, c_);
  return d;
}
Third HyparChart::third(const Vec2&) const { return zero_third(); }

EllipticCapChart::EllipticCapChart(double c) : c_(c) {}
Vec3 EllipticCapChart::position(const Vec2& y) const {
  return {y[0], y[1], c_ * (y[0] * y[0] + y[1] * y[1])};
}
std::array<Vec3, 2> EllipticCapChart::first(const Vec2& y) const {
  return {Vec3(1.0, 0.0, 2.0 * c_ * y[0]), Vec3(0.0, 1.0, 2.0 * c_ * y[1])};
}
Second EllipticCapChart::second(const Vec2& y) const {
  Second d = PlaneChart().second(y);
  d[0][0] = d[1][1] = Vec3(0.0, 0.0, 2.0 * c_);
  return d;
}
Third EllipticCapChart::third(const Vec2&) const { return zero_third(); }

CallbackChart::CallbackChart(std::string name, PositionFn position, int smoothness, double scale)
    : name_(std::move(name)), position_(std::move(position)), smoothness_(smoothness), scale_(scale) {}

CallbackChart& CallbackChart::with_first(FirstFn f) {
  first_ = std::move(f);
  return *this;
}
CallbackChart& CallbackChart::with_second(SecondFn f) {
  second_ = std::move(f);
  return *this;
}

Vec3 CallbackChart::position(const Vec2& y) const { return position_(y); }

std::array<Vec3, 2> CallbackChart::first(const Vec2& y) const {
  if (first_) return first_(y);
  return fd_first(position_, y, 1e-6 * scale_);
}

Second CallbackChart::second(const Vec2& y) const {
  if (second_) return second_(y);
  if (first_) {
    // One differencing level of the analytic tangents.
    Second d;
    const double h = 1e-6 * scale_;
    for (int c = 0; c < 2; ++c) {
      const auto plus = first_(y + h * unit(c));
      const auto minus = first_(y - h * unit(c));
      for (int a = 0; a < 2; ++a) d[a][c] = (plus[a] - minus[a]) / (2.0 * h);
    }
    d[0][1] = d[1][0] = 0.5 * (d[0][1] + d[1][0]);
    return d;
  }
  return fd_second_from_position(position_, y, 1e-4 * scale_);
}

Third CallbackChart::third(const Vec2& y) const {
  if (second_ || first_) {
    return fd_third_from_second([this](const Vec2& p) { return second(p); }, y,
                                (second_ ? 1e-5 : 1e-3) * scale_);
  }
  // Position only: difference the second-difference stencil with the same coarse step.
  const double h = 1e-3 * scale_;
  return fd_third_from_second(
      [this, h](const Vec2& p) { return fd_second_from_position(position_, p, h); }, y, h);
}

// ---------------------------------------------------------------------------
// Surface and volume geometry

SurfaceGeometry surface_frame(const MidsurfaceChart& chart, const Vec2& y, bool with_curvature_derivatives,
                              const GeometryOptions& opts) {
  if (with_curvature_derivatives && chart.smoothness() < 3) {
    throw std::invalid_argument("chart '" + chart.name() +
                                "' is only C^2; curvature derivatives need a C^3 chart");
  }
  const ChartJet jet = chart.jet(y, with_curvature_derivatives);
  SurfaceGeometry s;
  s.a_cov = jet.d1;
  const Vec3 cross = jet.d1[0].cross(jet.d1[1]);
  const double area = cross.norm();
  if (!(area >= opts.degeneracy_tol)) {
    std::ostringstream msg;
    msg << "degenerate tangent vectors at y = (" << y[0] << ", " << y[1] << "): |a1 x a2| = " << area;
    throw DegenerateTangentError(msg.str());
  }
  s.normal = cross / area;
  s.sqrt_a = area;

  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) s.metric_cov(a, b) = jet.d1[a].dot(jet.d1[b]);
  s.metric_cov(1, 0) = s.metric_cov(0, 1);
  s.metric_ctr = inverse2(s.metric_cov);
  s.metric_ctr(1, 0) = s.metric_ctr(0, 1);
  for (int a = 0; a < 2; ++a) s.a_ctr[a] = s.metric_ctr(a, 0) * s.a_cov[0] + s.metric_ctr(a, 1) * s.a_cov[1];

  s.theta_second = jet.d2;
  s.theta_second[1][0] = s.theta_second[0][1];
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) {
      s.curv_cov(a, b) = s.curv_cov(b, a) = s.normal.dot(s.theta_second[a][b]);
      for (int sg = 0; sg < 2; ++sg) {
        s.christoffel[sg](a, b) = s.christoffel[sg](b, a) = s.a_ctr[sg].dot(s.theta_second[a][b]);
      }
    }
  s.curv_mixed = s.curv_cov * s.metric_ctr;

  if (!with_curvature_derivatives) return s;

  // d_g a_{mn}, d_g a^{mn}, d_g a_3 and d_g b_{ab}; Weingarten: d_g a_3 = -b_g^s a_s.
  for (int g = 0; g < 2; ++g) {
    Mat2 dA;
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n)
        dA(m, n) = s.theta_second[m][g].dot(s.a_cov[n]) + s.a_cov[m].dot(s.theta_second[n][g]);
    const Mat2 dAinv = -s.metric_ctr * dA * s.metric_ctr;
    const Vec3 dn = -(s.curv_mixed(g, 0) * s.a_cov[0] + s.curv_mixed(g, 1) * s.a_cov[1]);
    Mat2 db;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) db(a, b) = dn.dot(s.theta_second[a][b]) + s.normal.dot(jet.d3[a][b][g]);
    db(1, 0) = db(0, 1) = 0.5 * (db(0, 1) + db(1, 0));
    s.curv_mixed_deriv[g] = db * s.metric_ctr + s.curv_cov * dAinv;
  }
  // b^s_b|_a = d_a b_b^s + Gamma^s_{a t} b_b^t - Gamma^t_{a b} b_t^s
  for (int sg = 0; sg < 2; ++sg)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double v = s.curv_mixed_deriv[a](b, sg);
        for (int t = 0; t < 2; ++t) {
          v += s.christoffel[sg](a, t) * s.curv_mixed(b, t);
          v -= s.christoffel[t](a, b) * s.curv_mixed(t, sg);
        }
        s.curv_covariant_deriv[sg](a, b) = v;
      }
  s.has_curvature_derivatives = true;
  return s;
}

VolumeGeometry volume_metrics(const SurfaceGeometry& sf, double eps, double x3) {
  if (!sf.has_curvature_derivatives) {
    throw std::invalid_argument("volume_metrics needs curvature derivatives (C^3 chart)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("volume_metrics: eps must be positive");
  VolumeGeometry v;
  v.eps = eps;
  const double s = eps * x3;

  std::array<Vec3, 2> dn;  // d_a a_3
  for (int a = 0; a < 2; ++a) dn[a] = -(sf.curv_mixed(a, 0) * sf.a_cov[0] + sf.curv_mixed(a, 1) * sf.a_cov[1]);
  // d_b d_a a_3, symmetrized
  std::array<std::array<Vec3, 2>, 2> ddn;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Vec3 w = Vec3::Zero();
      for (int sg = 0; sg < 2; ++sg) {
        w -= sf.curv_mixed_deriv[b](a, sg) * sf.a_cov[sg];
        w -= sf.curv_mixed(a, sg) * sf.theta_second[sg][b];
      }
      ddn[a][b] = w;
    }
  ddn[0][1] = ddn[1][0] = 0.5 * (ddn[0][1] + ddn[1][0]);

  for (int a = 0; a < 2; ++a) v.g_cov[a] = sf.a_cov[a] + s * dn[a];
  v.g_cov[2] = sf.normal;

  const double det3 = v.g_cov[0].dot(v.g_cov[1].cross(v.g_cov[2]));
  if (!(det3 > 0.0)) {
    std::ostringstream msg;
    msg << "shell map not orientation preserving at eps*x3 = " << s << " (det = " << det3 << ")";
    throw ThicknessTooLargeError(msg.str());
  }
  v.sqrt_g = det3;
  v.det_g = det3 * det3;

  Mat2 G;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) G(a, b) = v.g_cov[a].dot(v.g_cov[b]);
  G(1, 0) = G(0, 1);
  Mat2 Ginv = inverse2(G);
  Ginv(1, 0) = Ginv(0, 1);
  v.metric_cov.setZero();
  v.metric_ctr.setZero();
  v.metric_cov.topLeftCorner<2, 2>() = G;
  v.metric_ctr.topLeftCorner<2, 2>() = Ginv;
  v.metric_cov(2, 2) = 1.0;
  v.metric_ctr(2, 2) = 1.0;
  for (int a = 0; a < 2; ++a) v.g_ctr[a] = Ginv(a, 0) * v.g_cov[0] + Ginv(a, 1) * v.g_cov[1];
  v.g_ctr[2] = sf.normal;

  for (auto& m : v.christoffel) m.setZero();
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) {
      const Vec3 dg = sf.theta_second[a][b] + s * ddn[a][b];  // d_b g_a
      for (int p = 0; p < 3; ++p) v.christoffel[p](a, b) = v.christoffel[p](b, a) = v.g_ctr[p].dot(dg);
    }
  for (int a = 0; a < 2; ++a)
    for (int sg = 0; sg < 2; ++sg) {
      // d_3 g_a = d_a g_3 = d_a a_3
      v.christoffel[sg](a, 2) = v.christoffel[sg](2, a) = v.g_ctr[sg].dot(dn[a]);
    }
  // Gamma^3_{a3} and Gamma^p_{33} vanish identically for this shell map.
  return v;
}

VolumeGeometry volume_metrics(const MidsurfaceChart& chart, double eps, const Vec2& y, double x3,
                              const GeometryOptions& opts) {
  return volume_metrics(surface_frame(chart, y, true, opts), eps, x3);
}

// ---------------------------------------------------------------------------
// Expansion study

double fit_loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2) throw std::invalid_argument("slope fit needs >= 2 points");
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double yv = std::log(err[i]);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

double ExpansionTable::slope(const std::string& quantity) const {
  for (const auto& r : rows)
    if (r.quantity == quantity) return r.fitted_slope;
  throw std::out_of_range("no expansion rows for " + quantity);
}

double ExpansionTable::max_residual(const std::string& quantity) const {
  double m = -1.0;
  for (const auto& r : rows)
    if (r.quantity == quantity) m = std::max(m, r.sup_residual);
  if (m < 0) throw std::out_of_range("no expansion rows for " + quantity);
  return m;
}

ExpansionTable expansion_residuals(const MidsurfaceChart& chart, const std::vector<double>& eps_list,
                                   const std::vector<std::pair<Vec2, double>>& sample_points,
                                   double exact_floor) {
  if (eps_list.size() < 2) throw std::invalid_argument("expansion_residuals needs at least two eps values");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("eps list must be strictly decreasing");
  if (chart.smoothness() < 3) throw std::invalid_argument("expansion_residuals needs a C^3 chart");

  const std::array<const char*, 4> names = {kQuantityChristoffelInPlane, kQuantityChristoffelNormal,
                                            kQuantityChristoffelTransverse, kQuantityMetricDeterminant};
  std::vector<SurfaceGeometry> surf;
  surf.reserve(sample_points.size());
  for (const auto& [y, x3] : sample_points) surf.push_back(surface_frame(chart, y, true));

  std::array<std::vector<double>, 4> sup;
  for (double eps : eps_list) {
    std::array<double, 4> r{0, 0, 0, 0};
    for (std::size_t k = 0; k < sample_points.size(); ++k) {
      const double x3 = sample_points[k].second;
      const SurfaceGeometry& sf = surf[k];
      const VolumeGeometry v = volume_metrics(sf, eps, x3);
      const double s = eps * x3;
      const Mat2 bb = sf.curv_mixed * sf.curv_cov;  // b_a^s b_sb
      const Mat2 bmix2 = sf.curv_mixed * sf.curv_mixed;  // b_a^t b_t^s
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          for (int sg = 0; sg < 2; ++sg) {
            const double expect = sf.christoffel[sg](a, b) - s * sf.curv_covariant_deriv[sg](a, b);
            r[0] = std::max(r[0], std::abs(v.christoffel[sg](a, b) - expect));
          }
          r[1] = std::max(r[1], std::abs(v.christoffel[2](a, b) - (sf.curv_cov(a, b) - s * bb(a, b))));
        }
      for (int a = 0; a < 2; ++a)
        for (int sg = 0; sg < 2; ++sg) {
          const double expect = -sf.curv_mixed(a, sg) - s * bmix2(a, sg);
          r[2] = std::max(r[2], std::abs(v.christoffel[sg](a, 2) - expect));
        }
      r[3] = std::max(r[3], std::abs(v.det_g - sf.sqrt_a * sf.sqrt_a));
    }
    for (int q = 0; q < 4; ++q) sup[q].push_back(r[q]);
  }

  ExpansionTable table;
  for (int q = 0; q < 4; ++q) {
    const double mx = *std::max_element(sup[q].begin(), sup[q].end());
    double slope = std::numeric_limits<double>::infinity();
    if (mx > exact_floor) {
      std::vector<double> clamped(sup[q]);
      for (double& e : clamped) e = std::max(e, exact_floor);
      slope = fit_loglog_slope(eps_list, clamped);
    }
    for (std::size_t i = 0; i < eps_list.size(); ++i) table.rows.push_back({eps_list[i], names[q], sup[q][i], slope});
  }
  return table;
}

}  // namespace shellmem
