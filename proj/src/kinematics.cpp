#include "shellmem/kinematics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>

namespace shellmem {

Mat3 scaled_strains(const Jet3& v, double eps, const VolumeGeometry& geom) {
  if (!(eps > 0.0)) throw std::invalid_argument("scaled_strains: eps must be > 0 (eps -> 0 is singular)");
  const double inv = 1.0 / eps;
  Mat3 e;
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) {
      double s = 0.5 * (v.grad(a, b) + v.grad(b, a));
      for (int p = 0; p < 3; ++p) s -= geom.christoffel[static_cast<std::size_t>(p)](a, b) * v.value[p];
      e(a, b) = e(b, a) = s;
    }
  for (int a = 0; a < 2; ++a) {
    double s = 0.5 * (inv * v.grad(a, 2) + v.grad(2, a));
    // Gamma^3_{a3} vanishes identically
    for (int sg = 0; sg < 2; ++sg) s -= geom.christoffel[static_cast<std::size_t>(sg)](a, 2) * v.value[sg];
    e(a, 2) = e(2, a) = s;
  }
  e(2, 2) = inv * v.grad(2, 2);
  return e;
}

Mat2 gamma_ab(const Jet2& eta, const SurfaceGeometry& geom) {
  Mat2 g;
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) {
      double s = 0.5 * (eta.grad(a, b) + eta.grad(b, a)) - geom.curv_cov(a, b) * eta.value[2];
      for (int sg = 0; sg < 2; ++sg) s -= geom.christoffel[static_cast<std::size_t>(sg)](a, b) * eta.value[sg];
      g(a, b) = g(b, a) = s;
    }
  return g;
}

Mat2 rho_ab(const Jet2& v, const SurfaceGeometry& geom) {
  if (!v.hess3) throw SecondDerivativeUnavailableError("rho_ab needs second derivatives of v_3 (analytic fields only)");
  if (!geom.has_curvature_derivatives)
    throw std::invalid_argument("rho_ab needs the covariant curvature derivative; evaluate surface_frame with it");
  const Mat2& H = *v.hess3;
  const Mat2& bm = geom.curv_mixed;  // bm(a, s) = b_a^s
  const auto& G = geom.christoffel;
  // covariant derivative of the tangential part: D(b, s) = d_b v_s - Gamma^t_{bs} v_t
  Mat2 D;
  for (int b = 0; b < 2; ++b)
    for (int s = 0; s < 2; ++s) D(b, s) = v.grad(s, b) - G[0](b, s) * v.value[0] - G[1](b, s) * v.value[1];
  Mat2 r;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double s = H(a, b);
      for (int sg = 0; sg < 2; ++sg) s -= G[static_cast<std::size_t>(sg)](a, b) * v.grad(2, sg);
      double bb = 0.0;
      for (int sg = 0; sg < 2; ++sg) bb += bm(a, sg) * geom.curv_cov(sg, b);
      s -= bb * v.value[2];
      for (int sg = 0; sg < 2; ++sg) s += bm(a, sg) * D(b, sg) + bm(b, sg) * D(a, sg);
      for (int t = 0; t < 2; ++t) s += geom.curv_covariant_deriv[static_cast<std::size_t>(t)](a, b) * v.value[t];
      r(a, b) = s;
    }
  // symmetric in exact arithmetic (Codazzi); enforce it bitwise
  const double off = 0.5 * (r(0, 1) + r(1, 0));
  r(0, 1) = r(1, 0) = off;
  return r;
}

Jet2 transversal_average(const AnalyticField3D& v, const Vec2& y, int n_gauss) {
  const QuadRule1D rule = gauss_legendre(n_gauss);
  Jet2 out;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Jet3 j = v(y, rule.points[q]);
    const double w = 0.5 * rule.weights[q];
    out.value += w * j.value;
    out.grad += w * j.grad.leftCols<2>();
  }
  return out;
}

std::vector<double> thickness_average_weights(const Mesh3D& mesh) {
  std::vector<double> w(mesh.n_planes(), 0.0);
  const QuadRule1D rule = gauss_legendre(mesh.order + 1);
  const double h = mesh.layer_height();
  for (int l = 0; l < mesh.layers; ++l)
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto phi = lagrange_values(mesh.order, rule.points[q]);
      for (int lp = 0; lp <= mesh.order; ++lp)
        w[static_cast<std::size_t>(l * mesh.order + lp)] += 0.5 * (0.5 * h * rule.weights[q]) * phi[static_cast<std::size_t>(lp)];
    }
  return w;
}

Eigen::VectorXd transversal_average(const Mesh3D& mesh, const Eigen::VectorXd& u) {
  const std::size_t n2 = mesh.base.n_nodes();
  if (static_cast<std::size_t>(u.size()) != 3 * mesh.n_nodes())
    throw std::invalid_argument("transversal_average: field size does not match the 3D mesh");
  const auto w = thickness_average_weights(mesh);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * n2));
  for (std::size_t p = 0; p < mesh.n_planes(); ++p)
    out += w[p] * u.segment(static_cast<Eigen::Index>(3 * p * n2), static_cast<Eigen::Index>(3 * n2));
  return out;
}

SurfaceQuadrature SurfaceQuadrature::build(const Mesh2D& mesh, const MidsurfaceChart& chart,
                                           bool with_curvature_derivatives) {
  SurfaceQuadrature sq;
  sq.mesh = &mesh;
  const auto& rule = triangle_rule6();
  sq.points.reserve(mesh.n_elements() * rule.size());
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const auto& t = mesh.triangles[e];
    for (const auto& rq : rule) {
      const auto N = p2_values(rq.xi, rq.eta);
      const auto dR = p2_gradients(rq.xi, rq.eta);
      Mat2 J = Mat2::Zero();  // J(i, r) = d y_i / d ref_r
      Vec2 y = Vec2::Zero();
      for (int a = 0; a < 6; ++a) {
        const Vec2& x = mesh.nodes[static_cast<std::size_t>(t[static_cast<std::size_t>(a)])];
        y += N[static_cast<std::size_t>(a)] * x;
        J.col(0) += dR[static_cast<std::size_t>(a)][0] * x;
        J.col(1) += dR[static_cast<std::size_t>(a)][1] * x;
      }
      const double det = J.determinant();
      if (!(det > 0.0)) {
        std::ostringstream msg;
        msg << "element " << e << " has non-positive Jacobian " << det;
        throw DegenerateElementError(msg.str());
      }
      const Mat2 Jinv_t = J.inverse().transpose();
      SurfaceQuadPoint qp;
      qp.element = e;
      qp.y = y;
      qp.weight = rq.weight * det;
      qp.N = N;
      for (int a = 0; a < 6; ++a) qp.dN[static_cast<std::size_t>(a)] = Jinv_t * dR[static_cast<std::size_t>(a)];
      qp.geom = surface_frame(chart, y, with_curvature_derivatives);
      sq.points.push_back(std::move(qp));
    }
  }
  return sq;
}

Jet2 interpolate(const SurfaceQuadrature& quad, const SurfaceQuadPoint& qp, const Eigen::VectorXd& nodal) {
  const auto& t = quad.mesh->triangles[qp.element];
  Jet2 j;
  for (int a = 0; a < 6; ++a) {
    const Eigen::Index n = t[static_cast<std::size_t>(a)];
    const Vec3 u = nodal.segment<3>(3 * n);
    j.value += qp.N[static_cast<std::size_t>(a)] * u;
    j.grad += u * qp.dN[static_cast<std::size_t>(a)].transpose();
  }
  return j;
}

double membrane_seminorm(const SurfaceQuadrature& quad, const Eigen::VectorXd& nodal) {
  double s = 0.0;
  for (const auto& qp : quad.points) s += qp.weight * gamma_ab(interpolate(quad, qp, nodal), qp.geom).squaredNorm();
  return std::sqrt(s);
}

double membrane_seminorm(const SurfaceQuadrature& quad, const AnalyticField2D& eta) {
  double s = 0.0;
  for (const auto& qp : quad.points) s += qp.weight * gamma_ab(eta(qp.y), qp.geom).squaredNorm();
  return std::sqrt(s);
}

double membrane_seminorm_error(const SurfaceQuadrature& quad, const Eigen::VectorXd& nodal,
                               const AnalyticField2D& eta) {
  double s = 0.0;
  for (const auto& qp : quad.points) {
    const Mat2 d = gamma_ab(interpolate(quad, qp, nodal), qp.geom) - gamma_ab(eta(qp.y), qp.geom);
    s += qp.weight * d.squaredNorm();
  }
  return std::sqrt(s);
}

double space_time_seminorm(const std::vector<double>& s, double dt) {
  if (s.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t n = 0; n + 1 < s.size(); ++n) acc += 0.5 * dt * (s[n] * s[n] + s[n + 1] * s[n + 1]);
  return std::sqrt(acc);
}

}  // namespace shellmem
