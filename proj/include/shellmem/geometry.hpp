#pragma once

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace shellmem {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Raised when a_1 x a_2 vanishes (chart not immersive at the evaluation point).
class DegenerateTangentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the shell map stops being orientation preserving, i.e. the
/// half-thickness exceeds the local radius of curvature.
class ThicknessTooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Partial derivatives of a midsurface chart at one point.
struct ChartJet {
  Vec3 position = Vec3::Zero();
  std::array<Vec3, 2> d1{};                        // d_a theta
  std::array<std::array<Vec3, 2>, 2> d2{};         // d_ab theta
  std::array<std::array<std::array<Vec3, 2>, 2>, 2> d3{};  // d_abc theta
  bool has_third = false;
};

/// Injective map theta: omega -> R^3 describing the middle surface.
///
/// Built-in charts provide closed-form derivatives.  Derived classes that only
/// implement position() get central finite differences for everything else.
class MidsurfaceChart {
 public:
  virtual ~MidsurfaceChart() = default;

  virtual Vec3 position(const Vec2& y) const = 0;
  virtual std::array<Vec3, 2> first(const Vec2& y) const;
  virtual std::array<std::array<Vec3, 2>, 2> second(const Vec2& y) const;
  virtual std::array<std::array<std::array<Vec3, 2>, 2>, 2> third(const Vec2& y) const;

  /// Highest order k for which the chart claims C^k regularity (2 or 3).
  /// Curvature derivatives and the 3D Christoffel symbols need k >= 3.
  virtual int smoothness() const { return 3; }

  /// Length scale used to size finite-difference steps.
  virtual double length_scale() const { return 1.0; }

  virtual std::string name() const = 0;

  ChartJet jet(const Vec2& y, bool with_third) const;
};

/// theta(y) = (y1, y2, 0).
class PlaneChart final : public MidsurfaceChart {
 public:
  Vec3 position(const Vec2& y) const override;
  std::array<Vec3, 2> first(const Vec2& y) const override;
  std::array<std::array<Vec3, 2>, 2> second(const Vec2& y) const override;
  std::array<std::array<std::array<Vec3, 2>, 2>, 2> third(const Vec2& y) const override;
  std::string name() const override { return "plane"; }
};

/// Circular cylinder of radius R parametrized by arc length:
/// theta(y) = (R cos(y1/R), R sin(y1/R), y2).
class CylinderChart final : public MidsurfaceChart {
 public:
  explicit CylinderChart(double radius = 1.0);
  Vec3 position(const Vec2& y) const override;
  std::array<Vec3, 2> first(const Vec2& y) const override;
  std::array<std::array<Vec3, 2>, 2> second(const Vec2& y) const override;
  std::array<std::array<std::array<Vec3, 2>, 2>, 2> third(const Vec2& y) const override;
  double length_scale() const override { return radius_; }
  std::string name() const override { return "cylinder"; }
  double radius() const { return radius_; }

 private:
  double radius_;
};

/// Hyperbolic paraboloid theta(y) = (y1, y2, c y1 y2).
class HyparChart final : public MidsurfaceChart {
 public:
  explicit HyparChart(double c = 0.5);
  Vec3 position(const Vec2& y) const override;
  std::array<Vec3, 2> first(const Vec2& y) const override;
  std::array<std::array<Vec3, 2>, 2> second(const Vec2& y) const override;
  std::array<std::array<std::array<Vec3, 2>, 2>, 2> third(const Vec2& y) const override;
  std::string name() const override { return "hypar"; }

 private:
  double c_;
};

/// Elliptic paraboloid cap theta(y) = (y1, y2, c (y1^2 + y2^2)).
class EllipticCapChart final : public MidsurfaceChart {
 public:
  explicit EllipticCapChart(double c = 0.5);
  Vec3 position(const Vec2& y) const override;
  std::array<Vec3, 2> first(const Vec2& y) const override;
  std::array<std::array<Vec3, 2>, 2> second(const Vec2& y) const override;
  std::array<std::array<std::array<Vec3, 2>, 2>, 2> third(const Vec2& y) const override;
  std::string name() const override { return "cap"; }

 private:
  double c_;
};

/// User chart given by callbacks.  Missing derivative callbacks are replaced by
/// central differences of the next lower order that is available.
class CallbackChart final : public MidsurfaceChart {
 public:
  using PositionFn = std::function<Vec3(const Vec2&)>;
  using FirstFn = std::function<std::array<Vec3, 2>(const Vec2&)>;
  using SecondFn = std::function<std::array<std::array<Vec3, 2>, 2>(const Vec2&)>;

  CallbackChart(std::string name, PositionFn position, int smoothness = 3, double scale = 1.0);
  CallbackChart& with_first(FirstFn f);
  CallbackChart& with_second(SecondFn f);

  Vec3 position(const Vec2& y) const override;
  std::array<Vec3, 2> first(const Vec2& y) const override;
  std::array<std::array<Vec3, 2>, 2> second(const Vec2& y) const override;
  std::array<std::array<std::array<Vec3, 2>, 2>, 2> third(const Vec2& y) const override;
  int smoothness() const override { return smoothness_; }
  double length_scale() const override { return scale_; }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  PositionFn position_;
  FirstFn first_;
  SecondFn second_;
  int smoothness_;
  double scale_;
};

/// Differential geometry of the middle surface at one point.
struct SurfaceGeometry {
  std::array<Vec3, 2> a_cov{};   // a_a
  std::array<Vec3, 2> a_ctr{};   // a^a
  Vec3 normal = Vec3::Zero();    // a_3 = a^3
  Mat2 metric_cov = Mat2::Zero();  // a_ab
  Mat2 metric_ctr = Mat2::Zero();  // a^ab
  Mat2 curv_cov = Mat2::Zero();    // b_ab
  Mat2 curv_mixed = Mat2::Zero();  // (a, b) -> b_a^b = a^{b s} b_{s a}
  std::array<Mat2, 2> christoffel{};  // [s](a, b) -> Gamma^s_ab
  std::array<std::array<Vec3, 2>, 2> theta_second{};  // d_ab theta, kept for the 3D metrics
  bool has_curvature_derivatives = false;
  std::array<Mat2, 2> curv_mixed_deriv{};  // [g](a, b) -> d_g b_a^b
  std::array<Mat2, 2> curv_covariant_deriv{};  // [s](a, b) -> b^s_b|_a
  double sqrt_a = 0.0;
};

/// Scaled three-dimensional geometry at (y, x3) for half-thickness eps.
struct VolumeGeometry {
  double eps = 0.0;
  std::array<Vec3, 3> g_cov{};  // g_i(eps)
  std::array<Vec3, 3> g_ctr{};  // g^i(eps)
  Mat3 metric_cov = Mat3::Zero();
  Mat3 metric_ctr = Mat3::Zero();
  std::array<Mat3, 3> christoffel{};  // [p](i, j) -> Gamma^p_ij(eps)
  double det_g = 0.0;   // g(eps)
  double sqrt_g = 0.0;
};

struct GeometryOptions {
  double degeneracy_tol = 1e-12;
};

SurfaceGeometry surface_frame(const MidsurfaceChart& chart, const Vec2& y,
                              bool with_curvature_derivatives = true,
                              const GeometryOptions& opts = {});

/// Evaluates the scaled 3D metric quantities at the physical point (y, eps * x3).
VolumeGeometry volume_metrics(const MidsurfaceChart& chart, double eps, const Vec2& y, double x3,
                              const GeometryOptions& opts = {});
VolumeGeometry volume_metrics(const SurfaceGeometry& surface, double eps, double x3);

/// One row of an expansion study: sup-norm residual of one asymptotic formula at one eps.
struct ExpansionRow {
  double eps = 0.0;
  std::string quantity;
  double sup_residual = 0.0;
  double fitted_slope = 0.0;  // slope over the whole eps list (same on every row of a quantity)
};

struct ExpansionTable {
  std::vector<ExpansionRow> rows;
  double slope(const std::string& quantity) const;
  double max_residual(const std::string& quantity) const;
};

inline constexpr const char* kQuantityChristoffelInPlane = "Gamma^s_ab";
inline constexpr const char* kQuantityChristoffelNormal = "Gamma^3_ab";
inline constexpr const char* kQuantityChristoffelTransverse = "Gamma^s_a3";
inline constexpr const char* kQuantityMetricDeterminant = "g-a";

/// Residuals of the small-thickness expansions of Gamma(eps) and g(eps) over a sample set
/// of (y, x3) points.  Residuals below `exact_floor` are treated as exact zeros and
/// reported with slope +infinity.
ExpansionTable expansion_residuals(const MidsurfaceChart& chart, const std::vector<double>& eps_list,
                                   const std::vector<std::pair<Vec2, double>>& sample_points,
                                   double exact_floor = 1e-13);

/// Least-squares slope of log(err) against log(h).
double fit_loglog_slope(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace shellmem
