#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "shellmem/geometry.hpp"
#include "shellmem/mesh.hpp"

namespace shellmem {

using Mat32 = Eigen::Matrix<double, 3, 2>;

/// Covariant components v_i of a 3D field at one point of Omega together with
/// grad(i, j) = d_j v_i, where j runs over (y1, y2, x3).
struct Jet3 {
  Vec3 value = Vec3::Zero();
  Mat3 grad = Mat3::Zero();
};

/// Covariant components eta_i of a midsurface field with grad(i, a) = d_a eta_i.
/// `hess3` holds d_ab eta_3 when the field can supply it.
struct Jet2 {
  Vec3 value = Vec3::Zero();
  Mat32 grad = Mat32::Zero();
  std::optional<Mat2> hess3;
};

using AnalyticField3D = std::function<Jet3(const Vec2& y, double x3)>;
using AnalyticField2D = std::function<Jet2(const Vec2& y)>;

class SecondDerivativeUnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scaled linearized strains e_{i||j}(eps; v) at one point (symmetric 3x3).
Mat3 scaled_strains(const Jet3& v, double eps, const VolumeGeometry& geom);

/// Linearized change of metric gamma_ab(eta).
Mat2 gamma_ab(const Jet2& eta, const SurfaceGeometry& geom);

/// Bending-type operator rho_ab(v); needs d_ab v_3 and the curvature derivatives.
Mat2 rho_ab(const Jet2& v, const SurfaceGeometry& geom);

/// v_bar(y) = 1/2 int_{-1}^{1} v(y, x3) dx3 for an analytic field, with matching
/// in-plane derivatives (derivatives commute with the average).
Jet2 transversal_average(const AnalyticField3D& v, const Vec2& y, int n_gauss = 8);

/// Through-thickness average of a nodal 3D field (3 dofs per node) onto the
/// base mesh; exact for the Lagrange order of the extrusion.
Eigen::VectorXd transversal_average(const Mesh3D& mesh, const Eigen::VectorXd& u);

/// Weights w_p with v_bar = sum_p w_p v(plane p) for nodal fields.
std::vector<double> thickness_average_weights(const Mesh3D& mesh);

// ---------------------------------------------------------------------------
// Quadrature data on the midsurface, shared by the seminorms and the 2D solver.

struct SurfaceQuadPoint {
  std::size_t element = 0;
  Vec2 y = Vec2::Zero();
  double weight = 0.0;  // dy measure (no sqrt(a))
  std::array<double, 6> N{};
  std::array<Vec2, 6> dN{};  // physical gradients d/dy
  SurfaceGeometry geom;
};

class DegenerateElementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SurfaceQuadrature {
  const Mesh2D* mesh = nullptr;
  std::vector<SurfaceQuadPoint> points;  // element-major, 6 per element

  static SurfaceQuadrature build(const Mesh2D& mesh, const MidsurfaceChart& chart,
                                 bool with_curvature_derivatives = false);
  std::size_t points_per_element() const { return 6; }
};

/// Values and first derivatives of a nodal field at a quadrature point.
Jet2 interpolate(const SurfaceQuadrature& quad, const SurfaceQuadPoint& qp, const Eigen::VectorXd& nodal);

/// (sum_ab int_omega |gamma_ab(eta)|^2 dy)^{1/2}
double membrane_seminorm(const SurfaceQuadrature& quad, const Eigen::VectorXd& nodal);
double membrane_seminorm(const SurfaceQuadrature& quad, const AnalyticField2D& eta);
/// |eta_h - eta|^M for a nodal eta_h and an analytic eta.
double membrane_seminorm_error(const SurfaceQuadrature& quad, const Eigen::VectorXd& nodal,
                               const AnalyticField2D& eta);

/// (int_0^T s(t)^2 dt)^{1/2} by the trapezoidal rule on a uniform grid of step dt,
/// given s at t_0 .. t_N.
double space_time_seminorm(const std::vector<double>& seminorms, double dt);

}  // namespace shellmem
