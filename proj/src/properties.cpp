#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "shellmem/harness.hpp"

namespace shellmem {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
double log_uniform(Rng& rng, double a, double b) { return std::exp(uniform(rng, std::log(a), std::log(b))); }
int uniform_int(Rng& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

PropertyCheck at_most(const std::string& name, double value, double limit, const std::string& detail = "") {
  return {name, value <= limit, value, limit, detail};
}
PropertyCheck at_least(const std::string& name, double value, double limit, const std::string& detail = "") {
  return {name, value >= limit, value, limit, detail};
}
PropertyCheck flag(const std::string& name, bool ok, const std::string& detail = "") {
  return {name, ok, ok ? 1.0 : 0.0, 1.0, detail};
}

/// Random full nodal vector with zero entries on clamped nodes.
Eigen::VectorXd random_constrained(Rng& rng, std::size_t nodes, const std::function<bool(std::size_t)>& clamped) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(3 * nodes));
  for (std::size_t n = 0; n < nodes; ++n)
    for (int c = 0; c < 3; ++c) v[static_cast<Eigen::Index>(3 * n + c)] = clamped(n) ? 0.0 : uniform(rng, -1.0, 1.0);
  return v;
}

/// Random SPD 3x3 metric with condition number <= cond.
Mat3 random_metric(Rng& rng, double cond) {
  Eigen::Matrix3d q = Eigen::Matrix3d::Random();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q(i, j) = uniform(rng, -1.0, 1.0);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(q);
  const Eigen::Matrix3d Q = qr.householderQ();
  const Eigen::Vector3d d(1.0, log_uniform(rng, 1.0, cond), cond);
  return Q * d.asDiagonal() * Q.transpose();
}

double tensor_asymmetry(const Tensor3D& T) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const double v = T(i, j, k, l);
          m = std::max({m, std::abs(v - T(j, i, k, l)), std::abs(v - T(i, j, l, k)), std::abs(v - T(k, l, i, j))});
        }
  double scale = 0.0;
  for (double v : T.c) scale = std::max(scale, std::abs(v));
  return scale > 0.0 ? m / scale : m;
}

double tensor_asymmetry(const Tensor2D& T) {
  double m = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) {
          const double v = T(a, b, s, t);
          m = std::max({m, std::abs(v - T(b, a, s, t)), std::abs(v - T(a, b, t, s)), std::abs(v - T(s, t, a, b))});
        }
  double scale = 0.0;
  for (double v : T.c) scale = std::max(scale, std::abs(v));
  return scale > 0.0 ? m / scale : m;
}

// Band-limited smooth input c0 + c1 t + c2 cos(w t + p).
struct Smooth1D {
  double c0, c1, c2, w, p;
  double operator()(double t) const { return c0 + c1 * t + c2 * std::cos(w * t + p); }
};
Smooth1D random_smooth(Rng& rng) {
  return {uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0.05, 0.3), uniform(rng, 0, 6.2)};
}

// ---------------------------------------------------------------------------
// Suites

PropertyReport geometry_suite(std::uint64_t seed) {
  PropertyReport rep;
  rep.suite = "geometry";
  Rng rng(seed);
  const PlaneChart plane;
  const CylinderChart cyl(1.0);
  const HyparChart hyp(0.5);
  const EllipticCapChart cap(0.5);
  const std::vector<const MidsurfaceChart*> charts = {&plane, &cyl, &hyp, &cap};

  double inv = 0.0, asym = 0.0, zeros = 0.0, min_g = std::numeric_limits<double>::infinity();
  for (const auto* c : charts)
    for (int i = 0; i < 50; ++i) {
      const Vec2 y(uniform(rng, 0, 1), uniform(rng, 0, 1));
      const SurfaceGeometry g = surface_frame(*c, y, true);
      inv = std::max(inv, (g.metric_ctr * g.metric_cov - Mat2::Identity()).cwiseAbs().maxCoeff());
      asym = std::max({asym, std::abs(g.metric_cov(0, 1) - g.metric_cov(1, 0)),
                       std::abs(g.curv_cov(0, 1) - g.curv_cov(1, 0))});
      for (int s = 0; s < 2; ++s) asym = std::max(asym, std::abs(g.christoffel[s](0, 1) - g.christoffel[s](1, 0)));
      for (double eps : {0.2, 0.1, 0.05}) {
        const VolumeGeometry v = volume_metrics(g, eps, uniform(rng, -1, 1));
        min_g = std::min(min_g, v.det_g);
        for (int p = 0; p < 3; ++p) {
          asym = std::max(asym, (v.christoffel[p] - v.christoffel[p].transpose()).cwiseAbs().maxCoeff());
          zeros = std::max(zeros, std::abs(v.christoffel[p](2, 2)));
        }
        for (int a = 0; a < 2; ++a) zeros = std::max(zeros, std::abs(v.christoffel[2](a, 2)));
      }
    }
  rep.checks.push_back(at_most("metric inverse", inv, 1e-12, "max |a^as a_sb - delta| over 4 charts"));
  rep.checks.push_back(at_most("symmetry", asym, 0.0, "a_ab, b_ab, Gamma^s_ab, Gamma^p_ij(eps)"));
  rep.checks.push_back(at_most("exact zeros", zeros, 0.0, "Gamma^3_a3(eps), Gamma^p_33(eps)"));
  rep.checks.push_back({"g(eps) bounded below", min_g > 0.0, min_g, 0.0, "eps in {0.2, 0.1, 0.05}"});

  // finite-difference oracle for the cylinder at the origin
  {
    const double h = 1e-6, h2 = 1e-4;
    const Vec2 y0(0.0, 0.0);
    const SurfaceGeometry g = surface_frame(cyl, y0, false);
    std::array<Vec3, 2> a;
    for (int k = 0; k < 2; ++k) {
      Vec2 e = Vec2::Zero();
      e[k] = h;
      a[k] = (cyl.position(y0 + e) - cyl.position(y0 - e)) / (2 * h);
    }
    const Vec3 n = a[0].cross(a[1]).normalized();
    double err = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Vec2 ei = Vec2::Zero(), ej = Vec2::Zero();
        ei[i] = h2;
        ej[j] = h2;
        const Vec3 d2 = (cyl.position(y0 + ei + ej) - cyl.position(y0 + ei - ej) - cyl.position(y0 - ei + ej) +
                         cyl.position(y0 - ei - ej)) /
                        (4 * h2 * h2);
        err = std::max(err, std::abs(d2.dot(n) - g.curv_cov(i, j)));
        err = std::max(err, std::abs(a[i].dot(a[j]) - g.metric_cov(i, j)));
      }
    rep.checks.push_back(at_most("cylinder finite-difference oracle", err, 1e-6, "a_ab and b_ab at y = 0"));
    rep.checks.push_back(at_most("cylinder b_11 = -1", std::abs(g.curv_cov(0, 0) + 1.0), 1e-12));
  }

  // isometry invariance: rotate the hypar chart rigidly
  {
    const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    CallbackChart rot("rotated-hypar", [&](const Vec2& y) { return (R * hyp.position(y)).eval(); });
    rot.with_first([&](const Vec2& y) {
      auto f = hyp.first(y);
      for (auto& v : f) v = R * v;
      return f;
    });
    rot.with_second([&](const Vec2& y) {
      auto s = hyp.second(y);
      for (auto& r : s)
        for (auto& v : r) v = R * v;
      return s;
    });
    double err = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Vec2 y(uniform(rng, 0, 1), uniform(rng, 0, 1));
      const SurfaceGeometry a = surface_frame(hyp, y, false), b = surface_frame(rot, y, false);
      err = std::max({err, (a.metric_cov - b.metric_cov).cwiseAbs().maxCoeff(),
                      (a.curv_cov - b.curv_cov).cwiseAbs().maxCoeff()});
      for (int s = 0; s < 2; ++s) err = std::max(err, (a.christoffel[s] - b.christoffel[s]).cwiseAbs().maxCoeff());
    }
    rep.checks.push_back(at_most("rigid rotation invariance", err, 1e-12, "a_ab, b_ab, Gamma^s_ab on the hypar"));
  }

  // expansions
  std::vector<std::pair<Vec2, double>> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({Vec2(uniform(rng, 0, 1), uniform(rng, 0, 1)), uniform(rng, -1, 1)});
  pts.push_back({Vec2(0.5, 0.5), 1.0});
  const std::vector<double> eps = {0.1, 0.05, 0.025};
  const auto tp = expansion_residuals(plane, eps, pts);
  double flat = 0.0;
  for (const auto& r : tp.rows) flat = std::max(flat, r.sup_residual);
  rep.checks.push_back(at_most("plane expansions exact", flat, 0.0, "all residuals zero"));
  for (const auto* c : {static_cast<const MidsurfaceChart*>(&cyl), static_cast<const MidsurfaceChart*>(&hyp)}) {
    const auto t = expansion_residuals(*c, eps, pts);
    const std::string tag = c->name() + " ";
    rep.checks.push_back(at_least(tag + "slope Gamma^s_ab", t.slope(kQuantityChristoffelInPlane), 1.9));
    rep.checks.push_back(at_least(tag + "slope Gamma^s_a3", t.slope(kQuantityChristoffelTransverse), 1.9));
    rep.checks.push_back(at_least(tag + "slope g - a", t.slope(kQuantityMetricDeterminant), 0.9));
    rep.checks.push_back(at_most(tag + "residual Gamma^3_ab", t.max_residual(kQuantityChristoffelNormal), 1e-10));
  }
  return rep;
}

PropertyReport material_suite(std::uint64_t seed) {
  PropertyReport rep;
  rep.suite = "material";
  Rng rng(seed);
  const MaterialParams p(1.0, 1.0, 1.0, 1.0);

  double asym = 0.0, min_a = std::numeric_limits<double>::infinity(), min_b = min_a, lim = 0.0;
  for (int m = 0; m < 50; ++m) {
    const Mat3 G = random_metric(rng, 100.0);
    const Tensor3D A = tensor3d_elastic(G, p), B = tensor3d_viscous(G, p);
    asym = std::max({asym, tensor_asymmetry(A), tensor_asymmetry(B)});
    min_a = std::min(min_a, ellipticity_estimate(A, 20, seed + static_cast<std::uint64_t>(m)));
    min_b = std::min(min_b, ellipticity_estimate(B, 20, seed + 1000 + static_cast<std::uint64_t>(m)));
    Mat2 a2 = G.topLeftCorner<2, 2>();
    a2 = 0.5 * (a2 + a2.transpose()).eval();
    Mat3 ext = Mat3::Zero();
    ext.topLeftCorner<2, 2>() = a2;
    ext(2, 2) = 1.0;
    const TensorLimits L = tensor3d_limits(a2, p);
    lim = std::max({lim, L.elastic.max_abs_diff(tensor3d_elastic(ext, p)),
                    L.viscous.max_abs_diff(tensor3d_viscous(ext, p))});
  }
  rep.checks.push_back(at_most("3D tensor symmetries", asym, 1e-14, "relative, 50 random SPD metrics, cond <= 100"));
  rep.checks.push_back({"A ellipticity positive", min_a > 0.0, min_a, 0.0, "1000 samples"});
  rep.checks.push_back({"B ellipticity positive", min_b > 0.0, min_b, 0.0, "1000 samples"});
  rep.checks.push_back(at_most("limit consistency", lim, 1e-12, "tensor3d_limits vs extended metric"));

  // uniform ellipticity across eps on the cylinder, and the O(eps) approach to the limit
  const CylinderChart cyl(1.0);
  double uni = std::numeric_limits<double>::infinity();
  std::vector<double> dists;
  const std::vector<double> eps = {0.2, 0.1, 0.05};
  std::vector<Vec2> ys;
  std::vector<double> xs;
  for (int i = 0; i < 20; ++i) {
    ys.emplace_back(uniform(rng, 0, 1), uniform(rng, 0, 1));
    xs.push_back(uniform(rng, -1, 1));
  }
  xs[0] = 1.0;
  for (double e : eps) {
    double d = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const SurfaceGeometry g = surface_frame(cyl, ys[i], true);
      const VolumeGeometry v = volume_metrics(g, e, xs[i]);
      const Tensor3D A = tensor3d_elastic(v.metric_ctr, p);
      uni = std::min(uni, ellipticity_estimate(A, 50, seed + i));
      d = std::max(d, A.max_abs_diff(tensor3d_limits(g.metric_ctr, p).elastic));
    }
    dists.push_back(d);
  }
  rep.checks.push_back({"uniform ellipticity over eps", uni > 0.0, uni, 0.0, "cylinder, eps in {0.2, 0.1, 0.05}"});
  rep.checks.push_back(at_least("slope A(eps) - A(0)", fit_loglog_slope(eps, dists), 0.9));

  // zero couplings on shell metrics
  double zc = 0.0;
  {
    const HyparChart hyp(0.5);
    const VolumeGeometry v = volume_metrics(hyp, 0.1, Vec2(0.3, 0.7), 0.5);
    const Tensor3D A = tensor3d_elastic(v.metric_ctr, p), B = tensor3d_viscous(v.metric_ctr, p);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int s = 0; s < 2; ++s) zc = std::max({zc, std::abs(A(a, b, s, 2)), std::abs(B(a, b, s, 2))});
    for (int a = 0; a < 2; ++a) zc = std::max({zc, std::abs(A(a, 2, 2, 2)), std::abs(B(a, 2, 2, 2))});
  }
  rep.checks.push_back(at_most("zero couplings A^{abs3}, A^{a333}", zc, 1e-15, "hypar shell metric"));

  // spot values
  const Mat3 I3 = Mat3::Identity();
  const Tensor3D A = tensor3d_elastic(I3, p), B = tensor3d_viscous(I3, p);
  const MaterialParams q(0.0, 1.0, 1.0, 1.0);
  const auto mt = membrane_tensors(Mat2::Identity(), q);
  const double spot = std::max({std::abs(A(2, 2, 2, 2) - 3.0), std::abs(A(0, 0, 1, 1) - 1.0), std::abs(A(0, 1, 0, 1) - 1.0),
                                std::abs(B(2, 2, 2, 2) - 2.0), std::abs(B(0, 2, 0, 2) - 0.5), std::abs(mt.a(0, 0, 0, 0) - 5.0),
                                std::abs(mt.c(0, 0, 0, 0) - 1.0), std::abs(p.k() - 1.5), std::abs(p.Lambda() + 0.5),
                                std::abs(q.Lambda() + 1.0)});
  rep.checks.push_back(at_most("spot values", spot, 1e-14, "A3333 A1122 A1212 B3333 B1313 a1111 c1111 k Lambda"));

  // membrane tensors: symmetry, a and b positive, c a rank-one dyad
  double masym = 0.0, min_ab = std::numeric_limits<double>::infinity(), cmin = min_ab, cmax = 0.0;
  for (int m = 0; m < 50; ++m) {
    const Mat3 G = random_metric(rng, 100.0);
    const Mat2 actr = G.topLeftCorner<2, 2>();
    const MaterialParams r(uniform(rng, 0, 2), uniform(rng, 0.5, 2), uniform(rng, 0.5, 2), uniform(rng, 0.5, 2));
    const auto t = membrane_tensors(actr, r);
    masym = std::max({masym, tensor_asymmetry(t.a), tensor_asymmetry(t.b), tensor_asymmetry(t.c)});
    min_ab = std::min({min_ab, ellipticity_exact(t.a), ellipticity_exact(t.b)});
    cmin = std::min(cmin, ellipticity_exact(t.c));
    for (double v : t.c.c) cmax = std::max(cmax, std::abs(v));
  }
  rep.checks.push_back(at_most("membrane tensor symmetries", masym, 1e-14, "relative to the largest entry"));
  rep.checks.push_back({"a, b positive definite", min_ab > 0.0, min_ab, 0.0, "exact minima"});
  rep.checks.push_back(at_most("c minimum is zero", std::abs(cmin) / std::max(1.0, cmax), 1e-12,
                               "relative to the largest entry, attained on trace-free arguments"));
  // non-elliptic input must be rejected
  bool threw = false;
  try {
    ellipticity_estimate(Tensor3D{}, 100);
  } catch (const NonEllipticError&) {
    threw = true;
  }
  rep.checks.push_back(flag("zero tensor rejected", threw));
  return rep;
}

PropertyReport kinematics_suite(std::uint64_t seed) {
  PropertyReport rep;
  rep.suite = "kinematics";
  Rng rng(seed);
  const PlaneChart plane;

  // flat, x3-independent fields with v3 = 0: e_ab(eps; v) = gamma_ab(v_bar)
  double cons = 0.0;
  for (int i = 0; i < 50; ++i) {
    Eigen::Matrix<double, 2, 3> c;
    for (int r = 0; r < 2; ++r)
      for (int k = 0; k < 3; ++k) c(r, k) = uniform(rng, -1, 1);
    const Vec2 y(uniform(rng, 0, 1), uniform(rng, 0, 1));
    Jet3 v;
    v.value << c(0, 0) + c(0, 1) * y[0] + c(0, 2) * y[1], c(1, 0) + c(1, 1) * y[0] + c(1, 2) * y[1], 0.0;
    v.grad << c(0, 1), c(0, 2), 0, c(1, 1), c(1, 2), 0, 0, 0, 0;
    Jet2 w;
    w.value = v.value;
    w.grad = v.grad.leftCols<2>();
    const double eps = uniform(rng, 0.01, 1.0);
    const Mat3 e = scaled_strains(v, eps, volume_metrics(plane, eps, y, uniform(rng, -1, 1)));
    cons = std::max(cons, (e.topLeftCorner<2, 2>() - gamma_ab(w, surface_frame(plane, y, false))).cwiseAbs().maxCoeff());
  }
  rep.checks.push_back(at_most("flat consistency e_ab = gamma_ab", cons, 1e-12));

  // symmetry of strain outputs
  {
    const CylinderChart cyl(1.0);
    double asym = 0.0;
    for (int i = 0; i < 20; ++i) {
      Jet3 v;
      for (int a = 0; a < 3; ++a) {
        v.value[a] = uniform(rng, -1, 1);
        for (int b = 0; b < 3; ++b) v.grad(a, b) = uniform(rng, -1, 1);
      }
      const Vec2 y(uniform(rng, 0, 1), uniform(rng, 0, 1));
      const Mat3 e = scaled_strains(v, 0.1, volume_metrics(cyl, 0.1, y, uniform(rng, -1, 1)));
      Jet2 w;
      w.value = v.value;
      w.grad = v.grad.leftCols<2>();
      const Mat2 g = gamma_ab(w, surface_frame(cyl, y, false));
      asym = std::max({asym, (e - e.transpose()).cwiseAbs().maxCoeff(), std::abs(g(0, 1) - g(1, 0))});
    }
    rep.checks.push_back(at_most("strain symmetry", asym, 0.0));
  }

  // average bound |v_bar|_{0,omega} <= (1/sqrt 2) |v|_{0,Omega}
  {
    const Mesh2D m2 = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {Side::Bottom});
    const Mesh3D m3(m2, 3, 2);
    const ShellSystem3D sys = assemble_3d(m3, plane, 0.5, MaterialParams(1, 1, 1, 1));
    const SurfaceQuadrature quad = SurfaceQuadrature::build(m2, plane);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd v = random_constrained(rng, m3.n_nodes(), [](std::size_t) { return false; });
      double n3 = 0.0, n2 = 0.0;
      for_each_volume_point(sys, [&](const VolumeQuadPoint& qp) { n3 += qp.weight * interpolate(qp, v).value.squaredNorm(); });
      const Eigen::VectorXd vb = transversal_average(m3, v);
      for (const auto& qp : quad.points) n2 += qp.weight * interpolate(quad, qp, vb).value.squaredNorm();
      worst = std::max(worst, std::sqrt(n2) / std::sqrt(n3));
    }
    rep.checks.push_back(at_most("average bound", worst, 1.0 / std::sqrt(2.0), "200 random nodal fields"));
  }

  // derivatives commute with the average
  {
    const AnalyticField3D v = [](const Vec2& y, double x3) {
      Jet3 j;
      const double s = std::sin(y[0] + 2 * y[1]), c = std::cos(y[0] + 2 * y[1]);
      j.value << s * x3 * x3, y[0] * y[1] * (1 + x3), c * std::exp(x3);
      j.grad << c * x3 * x3, 2 * c * x3 * x3, 2 * s * x3, y[1] * (1 + x3), y[0] * (1 + x3), y[0] * y[1], -s * std::exp(x3),
          -2 * s * std::exp(x3), c * std::exp(x3);
      return j;
    };
    double err = 0.0;
    const double h = 1e-5;
    for (int i = 0; i < 20; ++i) {
      const Vec2 y(uniform(rng, 0, 1), uniform(rng, 0, 1));
      const Jet2 a = transversal_average(v, y, 8);
      for (int k = 0; k < 2; ++k) {
        Vec2 e = Vec2::Zero();
        e[k] = h;
        const Vec3 fd = (transversal_average(v, y + e, 8).value - transversal_average(v, y - e, 8).value) / (2 * h);
        err = std::max(err, (fd - a.grad.col(k)).cwiseAbs().maxCoeff());
      }
    }
    rep.checks.push_back(at_most("average commutes with d_a", err, 1e-6));
  }

  // Korn-type bound
  {
    const auto k = checks::korn_ratios(seed, 100, {0.2, 0.1, 0.05});
    double grow = 0.0;
    for (std::size_t i = 1; i < k.max_ratio.size(); ++i) grow = std::max(grow, k.max_ratio[i] / k.max_ratio[0]);
    std::ostringstream d;
    d << "C = " << *std::max_element(k.max_ratio.begin(), k.max_ratio.end());
    rep.checks.push_back(at_most("Korn constant uniform in eps", grow, 1.0, d.str()));
  }

  // spot values
  {
    Jet3 v;
    v.value << 0, 0, 0.3;
    v.grad(2, 2) = 1.0;
    const Mat3 e = scaled_strains(v, 0.5, volume_metrics(plane, 0.5, Vec2(0.2, 0.4), 0.3));
    Mat3 expect = Mat3::Zero();
    expect(2, 2) = 2.0;
    Jet2 r;
    r.hess3 = Mat2::Zero();
    (*r.hess3)(0, 0) = 2.0;
    Mat2 re = Mat2::Zero();
    re(0, 0) = 2.0;
    const double err = std::max((e - expect).cwiseAbs().maxCoeff(),
                                (rho_ab(r, surface_frame(plane, Vec2(0.2, 0.4), true)) - re).cwiseAbs().maxCoeff());
    rep.checks.push_back(at_most("spot values e33 = 2, rho_11 = 2", err, 1e-14));
  }
  return rep;
}

PropertyReport memory_suite(std::uint64_t seed) {
  PropertyReport rep;
  rep.suite = "memory";
  rep.checks.push_back(at_most("conv_step exactness", checks::conv_step_exactness(seed, 100), 1e-12,
                               "100 random (k, dt, N), piecewise-linear inputs"));
  rep.checks.push_back(at_most("semigroup restart", checks::conv_semigroup(seed, 20), 1e-12));
  rep.checks.push_back(at_most("shear closure ODE residual", checks::shear_closure_residual(seed, 20, 2048), 1e-8));
  rep.checks.push_back(at_most("normal closure ODE residual", checks::normal_closure_residual(seed, 20, 2048), 1e-8));

  {
    const TimeGrid g(1.0, 64);
    const auto e = shear_closure(std::vector<Vec2>(65, Vec2(1.0, 1.0)), MaterialParams(1.0, 1.0, 1.0, 2.0), g);
    const auto n = normal_closure(std::vector<double>(65, 2.0), std::vector<double>(65, 0.0),
                                  MaterialParams(0.0, 1.0, 1.0, 1.0), g);
    const double err = std::max({std::abs(e.back()[0] - 0.5 * (1 - std::exp(-1.0))), std::abs(n.back() - (1 - std::exp(-1.0))),
                                 std::abs(convolve(std::vector<double>(65, 1.0), 1.0, g).back() - (1 - std::exp(-1.0)))});
    rep.checks.push_back(at_most("closed-form spot values", err, 1e-9, "0.3160603 and 0.6321206"));
  }

  // kernel mass bound for nonnegative inputs
  {
    Rng rng(seed + 7);
    bool ok = true;
    for (int i = 0; i < 50; ++i) {
      const double k = log_uniform(rng, 0.01, 100);
      const TimeGrid g(uniform(rng, 0.1, 5), uniform_int(rng, 1, 200));
      std::vector<double> f(static_cast<std::size_t>(g.N() + 1));
      for (auto& x : f) x = uniform(rng, 0, 1);
      const double sup = *std::max_element(f.begin(), f.end());
      for (double h : convolve(f, k, g)) ok = ok && h >= 0.0 && h <= sup / k * (1 + 1e-14);
    }
    rep.checks.push_back(flag("0 <= H_n <= sup f / k", ok, "50 random nonnegative inputs"));
  }

  // phi^{ab} closed forms (lambda = 0, mu = theta = rho = 1)
  {
    const MaterialParams p(0.0, 1.0, 1.0, 1.0);
    const TimeGrid g(2.0, 40);
    const Mat2 a = Mat2::Identity();
    const ForceSampler ab = [](double, const Vec2&, double) {
      Mat3 f = Mat3::Zero();
      f.topLeftCorner<2, 2>().setOnes();
      return f;
    };
    const ForceSampler n33 = [](double, const Vec2&, double) {
      Mat3 f = Mat3::Zero();
      f(2, 2) = 1.0;
      return f;
    };
    double err = 0.0;
    for (const auto& m : phi_ab(ab, Vec2::Zero(), a, p, g)) err = std::max(err, (m - 2.0 * Mat2::Ones()).cwiseAbs().maxCoeff());
    const auto c = phi_ab(n33, Vec2::Zero(), a, p, g, 4, PhiConvention::Consistent);
    const auto q = phi_ab(n33, Vec2::Zero(), a, p, g, 4, PhiConvention::AsPrinted);
    for (int n = 0; n <= g.N(); ++n) {
      const double t = g.t(n);
      err = std::max(err, (c[static_cast<std::size_t>(n)] + std::exp(-t) * a).cwiseAbs().maxCoeff());
      err = std::max(err, (q[static_cast<std::size_t>(n)] + (2.0 - std::exp(-t)) * a).cwiseAbs().maxCoeff());
    }
    rep.checks.push_back(at_most("phi^{ab} closed forms", err, 1e-12, "both memory-sign conventions"));
  }
  return rep;
}

PropertyReport solver2d_suite(std::uint64_t seed) {
  PropertyReport rep;
  rep.suite = "solver2d";
  Rng rng(seed);
  const CylinderChart cyl(1.0);
  const MaterialParams p(1.0, 1.0, 1.0, 1.0);
  const Mesh2D mesh = Mesh2D::rectangle({0, 0}, {1, 1}, 4, 4, {Side::Bottom});
  const MembraneSystem ms = assemble_membrane(mesh, cyl, p);

  double asym = 0.0;
  for (const SpMat* K : {&ms.Ka, &ms.Kb, &ms.Kc}) asym = std::max(asym, SpMat(*K - SpMat(K->transpose())).norm());
  rep.checks.push_back(at_most("assembled symmetry", asym, 1e-12));
  double neg = std::numeric_limits<double>::infinity();
  for (const SpMat* K : {&ms.Ka, &ms.Kb}) neg = std::min(neg, smallest_eigenvalue_dense(*K) / K->norm());
  rep.checks.push_back(at_least("K_a, K_b positive semidefinite", neg, -1e-12, "smallest eigenvalue / norm"));

  // kernel classification
  {
    const auto k1 = kernel_diagnostic(ms);
    const Mesh2D pm = Mesh2D::rectangle({0, 0}, {1, 1}, 4, 4, {Side::Left});
    const auto k2 = kernel_diagnostic(assemble_membrane(pm, PlaneChart(), p));
    const Mesh2D cm = Mesh2D::rectangle({0, 0}, {1, 1}, 4, 4, {Side::Left, Side::Right, Side::Bottom, Side::Top});
    const auto k3 = kernel_diagnostic(assemble_membrane(cm, EllipticCapChart(0.5), p));
    rep.checks.push_back(flag("cylinder clamped on a curved edge is first kind", k1.kind == ShellKind::FirstKind));
    rep.checks.push_back(flag("flat plate is degenerate", k2.kind == ShellKind::Degenerate));
    rep.checks.push_back(flag("clamped cap is first kind", k3.kind == ShellKind::FirstKind));
  }

  // in-plane rotation lies in the kernel of the unclamped plate
  {
    const Mesh2D free = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {});
    const MembraneSystem fs = assemble_membrane(free, PlaneChart(), MaterialParams(0.0, 1.0, 1.0, 1.0));
    Eigen::VectorXd x(static_cast<Eigen::Index>(3 * free.n_nodes()));
    for (std::size_t n = 0; n < free.n_nodes(); ++n) {
      x[static_cast<Eigen::Index>(3 * n)] = free.nodes[n][1];
      x[static_cast<Eigen::Index>(3 * n + 1)] = -free.nodes[n][0];
      x[static_cast<Eigen::Index>(3 * n + 2)] = 0.0;
    }
    const Eigen::VectorXd xf = fs.dofs.restrict(x);
    rep.checks.push_back(at_most("rigid rotation in kernel", membrane_energy_quadrature(fs, x), 1e-20,
                                 "a(x, x) by quadrature on the unclamped plate"));
    rep.checks.push_back(at_most("rigid rotation, assembled K_a", xf.dot(fs.Ka * xf) / (fs.Ka.norm() * xf.squaredNorm()),
                                 1e-14, "relative, limited by cancellation in the product"));
  }

  const TimeGrid grid(1.0, 10);
  const auto zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * mesh.n_nodes())).eval();
  auto sampler = [&](const std::function<Mat2(const Vec2&, double)>& f) -> PhiSampler {
    return [&ms, f](int, double t) {
      std::vector<Mat2> out;
      for (const auto& qp : ms.quad.points) out.push_back(f(qp.y, t));
      return out;
    };
  };
  const auto phi1 = sampler([](const Vec2& y, double t) {
    Mat2 m;
    m << 1 + y[0], 0.2 * y[1], 0.2 * y[1], t;
    return m;
  });
  const auto phi2 = sampler([](const Vec2& y, double t) {
    Mat2 m;
    m << std::sin(t), y[0] * y[1], y[0] * y[1], 1.0 - y[0];
    return m;
  });
  {
    const auto z = solve_membrane(ms, sampler([](const Vec2&, double) { return Mat2::Zero().eval(); }), grid, zero);
    double mx = 0.0;
    for (const auto& u : z.u) mx = std::max(mx, u.cwiseAbs().maxCoeff());
    rep.checks.push_back(at_most("zero data gives zero", mx, 0.0));
  }
  {
    const auto s1 = solve_membrane(ms, phi1, grid, zero), s2 = solve_membrane(ms, phi2, grid, zero);
    const PhiSampler combo = [&](int n, double t) {
      auto a = phi1(n, t);
      const auto b = phi2(n, t);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = 2.0 * a[i] - 3.0 * b[i];
      return a;
    };
    const auto sc = solve_membrane(ms, combo, grid, zero);
    double err = 0.0, scale = 0.0;
    for (std::size_t n = 0; n < sc.u.size(); ++n) {
      err = std::max(err, (sc.u[n] - 2.0 * s1.u[n] + 3.0 * s2.u[n]).cwiseAbs().maxCoeff());
      scale = std::max(scale, sc.u[n].cwiseAbs().maxCoeff());
    }
    rep.checks.push_back(at_most("linearity", err / scale, 1e-10));

    const PhiSampler scaled = [&](int n, double t) {
      auto a = phi1(n, t);
      for (auto& m : a) m *= 0.1;
      return a;
    };
    const auto d1 = solve_descaled(ms, scaled, 0.1, grid, zero);
    const auto d2 = solve_descaled(ms, phi1, 0.1, grid, zero);
    double e1 = 0.0, e2 = 0.0, sc1 = 0.0;
    for (std::size_t n = 0; n < s1.u.size(); ++n) {
      e1 = std::max(e1, (d1.u[n] - s1.u[n]).cwiseAbs().maxCoeff());
      e2 = std::max(e2, (d2.u[n] - 10.0 * s1.u[n]).cwiseAbs().maxCoeff());
      sc1 = std::max(sc1, s1.u[n].cwiseAbs().maxCoeff());
    }
    rep.checks.push_back(at_most("descaled, rescaled load", e1 / sc1, 1e-10));
    rep.checks.push_back(at_most("descaled, unscaled load", e2 / (10.0 * sc1), 1e-10));
  }
  {
    Eigen::VectorXd xi0 = random_constrained(rng, mesh.n_nodes(), [&](std::size_t n) { return mesh.node_clamped[n]; });
    MembraneSolveOptions o;
    o.memory = false;
    const auto h = solve_membrane(ms, sampler([](const Vec2&, double) { return Mat2::Zero().eval(); }), grid, xi0, o);
    double inc = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < h.energy.size(); ++n) inc = std::max(inc, h.energy[n] - h.energy[n - 1]);
    rep.checks.push_back(at_most("zero-load dissipation without memory", inc, 0.0, "largest step increase"));
    o.memory = true;
    const auto hm = solve_membrane(ms, sampler([](const Vec2&, double) { return Mat2::Zero().eval(); }), grid, xi0, o);
    rep.checks.push_back(at_most("first step dissipation with memory", hm.energy[1] - hm.energy[0], 0.0));
  }
  return rep;
}

PropertyReport solver3d_suite(std::uint64_t seed) {
  PropertyReport rep;
  rep.suite = "solver3d";
  Rng rng(seed);
  const CylinderChart cyl(1.0);
  const MaterialParams p(1.0, 1.0, 1.0, 1.0);
  const Mesh2D m2 = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {Side::Bottom});
  const Mesh3D m3(m2, 2, 2);
  const ShellSystem3D sys = assemble_3d(m3, cyl, 0.1, p);

  const double kmin = smallest_eigenvalue_dense(sys.K) / sys.K.norm();
  const double cmin = smallest_eigenvalue_dense(sys.C);
  rep.checks.push_back(at_least("K positive semidefinite", kmin, -1e-12, "smallest eigenvalue / norm"));
  rep.checks.push_back({"C positive definite", cmin > 0.0, cmin, 0.0, "smallest eigenvalue"});

  // load of F = A e(w) equals K w when w lies in the discrete space
  {
    const auto w = [](const Vec2& y, double x3) {
      Jet3 j;
      const Vec3 c(0.3, -0.2, 0.5);
      const double py = y[1] * (1.0 + 0.5 * y[0]), qx = 1.0 + x3 - 0.5 * x3 * x3;
      j.value = c * py * qx;
      j.grad.col(0) = c * (0.5 * y[1]) * qx;
      j.grad.col(1) = c * (1.0 + 0.5 * y[0]) * qx;
      j.grad.col(2) = c * py * (1.0 - x3);
      return j;
    };
    const ForceSampler F = [&](double, const Vec2& y, double x3) {
      const VolumeGeometry g = volume_metrics(cyl, sys.eps, y, x3);
      const Mat3 e = scaled_strains(w(y, x3), sys.eps, g);
      const Tensor3D A = tensor3d_elastic(g.metric_ctr, p);
      Mat3 s = Mat3::Zero();
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) s(i, j) += A(i, j, k, l) * e(k, l);
      return s;
    };
    Eigen::VectorXd wn(static_cast<Eigen::Index>(3 * m3.n_nodes()));
    for (std::size_t pl = 0; pl < m3.n_planes(); ++pl)
      for (std::size_t n = 0; n < m2.n_nodes(); ++n)
        wn.segment<3>(3 * m3.node(pl, n)) = w(m2.nodes[n], m3.planes[pl]).value;
    const Eigen::VectorXd L = assemble_admissible_rhs(sys, F, 0.0);
    const Eigen::VectorXd Kw = sys.K * sys.dofs.restrict(wn);
    rep.checks.push_back(at_most("load of A e(w) equals K w", (L - Kw).norm() / L.norm(), 1e-12));
  }

  for (const char* c : {"plane", "cylinder", "hypar"})
    rep.checks.push_back(at_most(std::string("zero-load dissipation, ") + c, checks::dissipation_worst_increase(c, seed),
                                 0.0, "largest step increase of 1/2 K u.u"));

  {
    const double n1 = assemble_3d(m3, cyl, 0.1, p).K.norm(), n2 = assemble_3d(m3, cyl, 0.05, p).K.norm();
    const double r = n2 / n1;
    rep.checks.push_back({"stiffness scaling under eps halving", r >= 2.0 && r <= 6.0, r, 2.0, "ratio in [2, 6]"});
  }

  // averaging of x3 and x3^2 profiles
  {
    const Vec3 c(1.0, -2.0, 0.5);
    Eigen::VectorXd odd(static_cast<Eigen::Index>(3 * m3.n_nodes())), even(odd.size());
    for (std::size_t pl = 0; pl < m3.n_planes(); ++pl)
      for (std::size_t n = 0; n < m2.n_nodes(); ++n) {
        const double x3 = m3.planes[pl];
        odd.segment<3>(3 * m3.node(pl, n)) = x3 * c;
        even.segment<3>(3 * m3.node(pl, n)) = x3 * x3 * c;
      }
    const auto a = average_to_2d({odd, even}, m3, m2);
    double err = a[0].cwiseAbs().maxCoeff();
    for (std::size_t n = 0; n < m2.n_nodes(); ++n)
      err = std::max(err, (a[1].segment<3>(static_cast<Eigen::Index>(3 * n)) - c / 3.0).cwiseAbs().maxCoeff());
    rep.checks.push_back(at_most("average of x3 and x3^2", err, 1e-14));
  }

  // eps sweep on a coarse first-kind scenario: d3 decay and the shear strain limit
  {
    Scenario s = builtin_scenario("cylinder-panel");
    s.nx = s.ny = 4;
    s.N = 8;
    const auto chart = make_chart(s);
    const Mesh2D mesh = make_mesh(s);
    const Mesh3D mesh3(mesh, s.layers, s.order);
    const ForceSampler F = make_forces(s, *chart);
    const TimeGrid grid(s.T, s.N);
    std::vector<double> d3s, shear;
    for (double eps : s.eps) {
      const ShellSystem3D sy = assemble_3d(mesh3, *chart, eps, s.params);
      const auto h = solve_3d(sy, [&](int, double t) { return assemble_admissible_rhs(sy, F, t); }, grid,
                              Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * mesh3.n_nodes())));
      std::vector<double> d;
      double worst = 0.0;
      std::vector<bool> interior;
      for_each_volume_point(sy, [&](const VolumeQuadPoint& qp) {
        const Vec2& y = sy.surf.points[qp.surf_index].y;
        interior.push_back(y.minCoeff() > 0.25 && y.maxCoeff() < 0.75);
      });
      for (const auto& u : h.u) {
        d.push_back(d3_norm(sy, u));
        const auto e = strain_field(sy, u);
        for (std::size_t q = 0; q < e.size(); ++q)
          if (interior[q]) worst = std::max({worst, std::abs(e[q](0, 2)), std::abs(e[q](1, 2))});
      }
      d3s.push_back(space_time_seminorm(d, grid.dt()));
      shear.push_back(worst);  // the closure predicts zero since F^{a3} = 0
    }
    rep.checks.push_back(flag("d3 decreasing over eps", d3s[1] < d3s[0] && d3s[2] < d3s[1]));
    rep.checks.push_back({"shear strain approaches closure", shear[2] < shear[0], shear[2], shear[0],
                          "interior max |e_a3| at eps = 0.05 vs 0.2"});
  }

  // constant load: monotone approach to the static solution
  {
    Scenario s = builtin_scenario("cylinder-panel");
    s.force = ForcePreset::Smooth;
    s.profile = TimeProfile::Constant;
    const auto chart = make_chart(s);
    const ForceSampler F = make_forces(s, *chart);
    const Eigen::VectorXd L = assemble_admissible_rhs(sys, F, 0.0);
    const SPDSolver Ks(sys.K);
    const Eigen::VectorXd uinf = sys.dofs.expand(Ks.solve(L));
    const TimeGrid grid(2.0, 20);
    const auto h = solve_3d(sys, [&](int, double) { return L; }, grid,
                            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * m3.n_nodes())));
    bool mono = true;
    for (std::size_t n = 1; n < h.u.size(); ++n) mono = mono && (h.u[n] - uinf).norm() < (h.u[n - 1] - uinf).norm();
    rep.checks.push_back(flag("step load approaches static solution monotonically", mono));
  }

  // stress recovery: zero field and static state
  {
    DisplacementHistory h;
    const TimeGrid grid(1.0, 2);
    const auto zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * m3.n_nodes())).eval();
    h.t = {0.0, 0.5, 1.0};
    h.u = {zero, zero, zero};
    double mx = 0.0;
    for (const auto& s : stress_recovery(sys, h, grid, 2)) mx = std::max(mx, s.cwiseAbs().maxCoeff());
    rep.checks.push_back(at_most("zero field has zero stress", mx, 0.0));
  }
  return rep;
}

}  // namespace

std::vector<std::string> property_suites() { return {"geometry", "material", "kinematics", "memory", "solver2d", "solver3d"}; }

PropertyReport run_properties(const std::string& suite, std::uint64_t seed) {
  if (suite == "geometry") return geometry_suite(seed);
  if (suite == "material") return material_suite(seed);
  if (suite == "kinematics") return kinematics_suite(seed);
  if (suite == "memory") return memory_suite(seed);
  if (suite == "solver2d") return solver2d_suite(seed);
  if (suite == "solver3d") return solver3d_suite(seed);
  throw UnknownSuiteError("unknown property suite '" + suite +
                          "' (geometry | material | kinematics | memory | solver2d | solver3d)");
}

// ---------------------------------------------------------------------------

namespace checks {

namespace {

// Central differences carry an O(dt^2 e''') error of their own; a short horizon
// keeps it well under the residual tolerance at N = 2048.
constexpr double kClosureHorizon = 0.05;

// Exact int_a^b e^{-k(b-s)} f(s) ds for f linear from fa to fb, written with
// expm1 so that it stays accurate for small k h.
double segment_integral(double fa, double fb, double k, double h) {
  const double x = k * h;
  const double one_minus_e = -std::expm1(-x);  // 1 - e^{-x}
  // int_0^h e^{-k tau} (fb + (fa - fb) tau / h) dtau
  double lin;
  if (x < 1e-3) {
    // (1 - e^{-x}(1 + x)) / x^2 = 1/2 - x/3 + x^2/8 - x^3/30 + ...
    lin = h * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0);
  } else {
    lin = (one_minus_e - x * std::exp(-x)) / (k * k) / h;
  }
  const double base = x < 1e-12 ? h : one_minus_e / k;
  return fb * base + (fa - fb) * lin;
}

}  // namespace

double conv_step_exactness(std::uint64_t seed, int trials) {
  Rng rng(seed + 101);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double kdt = log_uniform(rng, 1e-6, 100.0);
    const double k = log_uniform(rng, 0.05, 20.0);
    const double dt = kdt / k;
    const int N = uniform_int(rng, 1, 200);
    const TimeGrid grid(dt * N, N);
    std::vector<double> f(static_cast<std::size_t>(N + 1));
    for (auto& v : f) v = uniform(rng, -1, 1);
    const auto H = convolve(f, k, grid);
    double scale = 1.0;
    for (int n = 1; n <= N; ++n) {
      // direct sum over segments, each carried to t_n by its exact decay
      double direct = 0.0;
      for (int j = 0; j < n; ++j)
        direct += std::exp(-k * dt * (n - 1 - j)) * segment_integral(f[static_cast<std::size_t>(j)], f[static_cast<std::size_t>(j + 1)], k, dt);
      scale = std::max(scale, std::abs(direct));
      worst = std::max(worst, std::abs(H[static_cast<std::size_t>(n)] - direct) / scale);
    }
  }
  return worst;
}

double conv_semigroup(std::uint64_t seed, int trials) {
  Rng rng(seed + 202);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double k = log_uniform(rng, 0.05, 20.0);
    const int M = uniform_int(rng, 1, 100);
    const TimeGrid full(uniform(rng, 0.1, 5.0), 2 * M);
    std::vector<double> f(static_cast<std::size_t>(2 * M + 1));
    for (auto& v : f) v = uniform(rng, -1, 1);
    const auto H = convolve(f, k, full);
    // restart at T/2 with the carried state
    double h = convolve(std::vector<double>(f.begin(), f.begin() + M + 1), k, TimeGrid(full.T() / 2, M)).back();
    for (int n = M; n < 2 * M; ++n)
      h = conv_step(h, f[static_cast<std::size_t>(n)], f[static_cast<std::size_t>(n + 1)], k, full.dt());
    worst = std::max(worst, std::abs(h - H.back()));
  }
  return worst;
}

double shear_closure_residual(std::uint64_t seed, int trials, int N) {
  Rng rng(seed + 303);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const MaterialParams p(uniform(rng, 0, 2), uniform(rng, 0.5, 2), uniform(rng, 0.5, 2), uniform(rng, 0.5, 2));
    const TimeGrid g(kClosureHorizon, N);
    const Smooth1D f1 = random_smooth(rng), f2 = random_smooth(rng);
    std::vector<Vec2> F;
    for (int n = 0; n <= N; ++n) F.emplace_back(f1(g.t(n)), f2(g.t(n)));
    const auto e = shear_closure(F, p, g);
    double scale = 0.0, r = 0.0;
    for (const auto& v : F) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    for (int n = 1; n < N; ++n) {
      const auto u = static_cast<std::size_t>(n);
      const Vec2 de = (e[u + 1] - e[u - 1]) / (2 * g.dt());
      r = std::max(r, (2 * p.mu() * e[u] + p.rho() * de - F[u]).cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, r / scale);
  }
  return worst;
}

double normal_closure_residual(std::uint64_t seed, int trials, int N) {
  Rng rng(seed + 404);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const MaterialParams p(uniform(rng, 0, 2), uniform(rng, 0.5, 2), uniform(rng, 0.5, 2), uniform(rng, 0.5, 2));
    const TimeGrid g(kClosureHorizon, N);
    const Smooth1D fa = random_smooth(rng), fb = random_smooth(rng);
    std::vector<double> F33, tr;
    for (int n = 0; n <= N; ++n) {
      F33.push_back(fa(g.t(n)));
      tr.push_back(fb(g.t(n)) - fb(0.0));  // zero initial strain
    }
    const auto e = normal_closure(F33, tr, p, g);
    double scale = 0.0, r = 0.0;
    for (double v : F33) scale = std::max(scale, std::abs(v));
    const double l = p.lambda(), m = p.mu(), th = p.theta(), rh = p.rho();
    for (int n = 1; n < N; ++n) {
      const auto u = static_cast<std::size_t>(n);
      const double de = (e[u + 1] - e[u - 1]) / (2 * g.dt()), dt = (tr[u + 1] - tr[u - 1]) / (2 * g.dt());
      r = std::max(r, std::abs(l * tr[u] + (l + 2 * m) * e[u] + th * dt + (th + rh) * de - F33[u]));
    }
    worst = std::max(worst, r / scale);
  }
  return worst;
}

KornResult korn_ratios(std::uint64_t seed, int samples, const std::vector<double>& eps_list) {
  Rng rng(seed + 505);
  const CylinderChart cyl(1.0);
  const MaterialParams p(1.0, 1.0, 1.0, 1.0);
  const Mesh2D m2 = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {Side::Bottom});
  const Mesh3D m3(m2, 2, 2);
  std::vector<Eigen::VectorXd> fields;
  for (int i = 0; i < samples; ++i)
    fields.push_back(random_constrained(rng, m3.n_nodes(), [&](std::size_t n) { return m3.node_clamped(n); }));
  KornResult out;
  for (double eps : eps_list) {
    const ShellSystem3D sys = assemble_3d(m3, cyl, eps, p);
    double worst = 0.0;
    for (const auto& v : fields) worst = std::max(worst, eps * h1_norm(sys, v) / strain_norm(sys, v));
    out.eps.push_back(eps);
    out.max_ratio.push_back(worst);
  }
  return out;
}

double dissipation_worst_increase(const std::string& chart, std::uint64_t seed) {
  Rng rng(seed + 606);
  Scenario s = builtin_scenario("cylinder-panel");
  s.chart = chart;
  s.chart_param = chart == "cylinder" ? 1.0 : 0.5;
  s.nx = s.ny = 3;
  s.layers = 2;
  const auto c = make_chart(s);
  const Mesh2D m2 = make_mesh(s);
  const Mesh3D m3(m2, s.layers, s.order);
  const ShellSystem3D sys = assemble_3d(m3, *c, 0.1, s.params);
  const Eigen::VectorXd u0 = random_constrained(rng, m3.n_nodes(), [&](std::size_t n) { return m3.node_clamped(n); });
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dofs.n_free()));
  const auto h = solve_3d(sys, [&](int, double) { return zero; }, TimeGrid(1.0, 20), u0);
  double inc = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < h.energy.size(); ++n) inc = std::max(inc, h.energy[n] - h.energy[n - 1]);
  return inc;
}

namespace {

// Space-time error of the 2D solve against xi = g(t) X(y).
double manufactured_error(const Scenario& s, const AnalyticField2D& X) {
  const auto chart = make_chart(s);
  const Mesh2D mesh = make_mesh(s);
  const MembraneSystem ms = assemble_membrane(mesh, *chart, s.params);
  const TimeGrid grid(s.T, s.N);
  std::vector<SurfaceGeometry> geo;
  std::vector<Jet2> xq;
  for (const auto& qp : ms.quad.points) {
    geo.push_back(surface_frame(*chart, qp.y, false));
    xq.push_back(X(qp.y));
  }
  const PhiSampler phi = [&](int, double t) {
    std::vector<Mat2> out;
    for (std::size_t q = 0; q < geo.size(); ++q) out.push_back(manufactured_phi(s, geo[q], xq[q], t));
    return out;
  };
  const auto h = solve_membrane(ms, phi, grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * mesh.n_nodes())));
  std::vector<double> err;
  for (int n = 0; n <= s.N; ++n) {
    const double g = manufactured_profile(s.profile, grid.t(n), s.params.k()).g * s.force_scale;
    const AnalyticField2D exact = [&X, g](const Vec2& y) {
      Jet2 j = X(y);
      j.value *= g;
      j.grad *= g;
      if (j.hess3) *j.hess3 *= g;
      return j;
    };
    err.push_back(membrane_seminorm_error(ms.quad, h.u[static_cast<std::size_t>(n)], exact));
  }
  return space_time_seminorm(err, grid.dt());
}

Scenario rate_scenario() {
  Scenario s = builtin_scenario("cylinder-panel");
  s.profile = TimeProfile::Sine;
  return s;
}

}  // namespace

RateStudy manufactured_spatial_rate(const std::vector<int>& nx, int N) {
  Scenario s = rate_scenario();
  s.N = N;
  const AnalyticField2D X = manufactured_shape(s);
  RateStudy r;
  for (int n : nx) {
    s.nx = s.ny = n;
    r.step.push_back(1.0 / n);
    r.error.push_back(manufactured_error(s, X));
  }
  r.slope = fit_loglog_slope(r.step, r.error);
  return r;
}

RateStudy manufactured_temporal_rate(int nx, const std::vector<int>& N) {
  Scenario s = rate_scenario();
  s.nx = s.ny = nx;
  const Vec3 A = s.amplitude;
  // quadratic, vanishing on the clamped bottom edge: the P2 space holds it exactly
  const AnalyticField2D X = [A](const Vec2& y) {
    Jet2 j;
    const double f = y[1] * (1.0 + 0.5 * y[0]);
    j.value = A * f;
    j.grad = A * Eigen::RowVector2d(0.5 * y[1], 1.0 + 0.5 * y[0]);
    Mat2 h;
    h << 0.0, 0.5, 0.5, 0.0;
    j.hess3 = A[2] * h;
    return j;
  };
  RateStudy r;
  for (int n : N) {
    s.N = n;
    r.step.push_back(s.T / n);
    r.error.push_back(manufactured_error(s, X));
  }
  r.slope = fit_loglog_slope(r.step, r.error);
  return r;
}

}  // namespace checks

}  // namespace shellmem
