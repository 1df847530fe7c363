#pragma once

// Independent reference pieces for single-element assembly checks: a P2 basis
// from a monomial Vandermonde solve and a collapsed Gauss rule on triangles.

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct P2Basis {
  Eigen::Matrix<double, 6, 6> coef;  // row i: monomial coefficients of N_i

  explicit P2Basis(const std::array<Eigen::Vector2d, 6>& nodes) {
    Eigen::Matrix<double, 6, 6> V;
    for (int j = 0; j < 6; ++j) V.row(j) = monomials(nodes[static_cast<std::size_t>(j)]).transpose();
    coef = V.inverse().transpose();  // N_i(x_j) = delta_ij
  }
  static Eigen::Matrix<double, 6, 1> monomials(const Eigen::Vector2d& p) {
    Eigen::Matrix<double, 6, 1> m;
    m << 1.0, p[0], p[1], p[0] * p[0], p[0] * p[1], p[1] * p[1];
    return m;
  }
  double value(int i, const Eigen::Vector2d& p) const { return coef.row(i).dot(monomials(p)); }
  Eigen::Vector2d grad(int i, const Eigen::Vector2d& p) const {
    Eigen::Matrix<double, 6, 1> dx, dy;
    dx << 0.0, 1.0, 0.0, 2.0 * p[0], p[1], 0.0;
    dy << 0.0, 0.0, 1.0, 0.0, p[0], 2.0 * p[1];
    return {coef.row(i).dot(dx), coef.row(i).dot(dy)};
  }
};

struct Point {
  Eigen::Vector2d y;
  double w;
};

/// Duffy-collapsed tensor Gauss rule on the unit right triangle (exact to degree 7).
inline std::vector<Point> triangle_rule() {
  const double x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  const double w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  std::vector<Point> out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double u = 0.5 * (x[i] + 1.0), v = 0.5 * (x[j] + 1.0);
      out.push_back({Eigen::Vector2d(u, v * (1.0 - u)), 0.25 * w[i] * w[j] * (1.0 - u)});
    }
  return out;
}

/// Three-point Gauss on [-1, 1].
inline std::vector<std::pair<double, double>> line_rule() {
  const double a = 0.7745966692414834;
  return {{-a, 5.0 / 9.0}, {0.0, 8.0 / 9.0}, {a, 5.0 / 9.0}};
}

}  // namespace oracle
