#include <cmath>

#include <gtest/gtest.h>

#include "shellmem/kinematics.hpp"
#include "shellmem/solver3d.hpp"

using namespace shellmem;

namespace {

Jet2 from_affine(const Vec3& c0, const Mat32& grad) {
  Jet2 j;
  j.value = c0;
  j.grad = grad;
  return j;
}

}  // namespace

TEST(ScaledStrains, TransverseStretchOnPlane) {
  Jet3 v;
  v.value << 0.0, 0.0, 0.3;  // v = (0, 0, x3) at x3 = 0.3
  v.grad(2, 2) = 1.0;
  const Mat3 e = scaled_strains(v, 0.5, volume_metrics(PlaneChart(), 0.5, Vec2(0.1, 0.9), 0.3));
  Mat3 expect = Mat3::Zero();
  expect(2, 2) = 2.0;
  EXPECT_LT((e - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ScaledStrains, RigidTranslationOnPlane) {
  Jet3 v;
  v.value << 1.0, -2.0, 0.5;
  for (double eps : {1.0, 0.1, 0.01})
    EXPECT_EQ(scaled_strains(v, eps, volume_metrics(PlaneChart(), eps, Vec2(0.3, 0.3), -0.4)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ScaledStrains, ConstantNormalComponentOnCylinder) {
  const CylinderChart cyl(1.0);
  const double eps = 0.1, x3 = 0.6, c = 0.7;
  const Vec2 y(0.2, 0.5);
  const SurfaceGeometry s = surface_frame(cyl, y);
  const VolumeGeometry g = volume_metrics(s, eps, x3);
  Jet3 v;
  v.value << 0.0, 0.0, c;
  const Mat3 e = scaled_strains(v, eps, g);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double bb = 0.0;
      for (int sg = 0; sg < 2; ++sg) bb += s.curv_mixed(a, sg) * s.curv_cov(sg, b);
      EXPECT_NEAR(e(a, b), -(s.curv_cov(a, b) - eps * x3 * bb) * c, 1e-12);
    }
}

TEST(ChangeOfMetric, PlaneExamples) {
  const SurfaceGeometry g = surface_frame(PlaneChart(), Vec2(0.4, 0.6), false);
  Mat32 rot;
  rot << 0.0, 1.0, -1.0, 0.0, 0.0, 0.0;  // eta = (y2, -y1, 0)
  EXPECT_EQ(gamma_ab(from_affine(Vec3(0.6, -0.4, 0.0), rot), g).cwiseAbs().maxCoeff(), 0.0);
  Mat32 stretch = Mat32::Zero();
  stretch(0, 0) = 1.0;  // eta = (y1, 0, 0)
  const Mat2 gs = gamma_ab(from_affine(Vec3(0.4, 0.0, 0.0), stretch), g);
  EXPECT_DOUBLE_EQ(gs(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(gs(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(gs(1, 1), 0.0);
}

TEST(ChangeOfMetric, CylinderNormalDisplacement) {
  const SurfaceGeometry g = surface_frame(CylinderChart(1.0), Vec2(0.0, 0.0), false);
  const Mat2 gm = gamma_ab(from_affine(Vec3(0.0, 0.0, 1.0), Mat32::Zero()), g);
  EXPECT_NEAR(gm(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(gm(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(gm(1, 1), 0.0, 1e-14);
}

TEST(ChangeOfCurvature, PlaneExamples) {
  const SurfaceGeometry g = surface_frame(PlaneChart(), Vec2(0.5, 0.2), true);
  Jet2 v;  // (0, 0, y1^2)
  v.value << 0.0, 0.0, 0.25;
  v.grad(2, 0) = 1.0;
  v.hess3 = (Mat2() << 2.0, 0.0, 0.0, 0.0).finished();
  const Mat2 r = rho_ab(v, g);
  EXPECT_DOUBLE_EQ(r(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(r(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(r(1, 1), 0.0);
  Jet2 affine = from_affine(Vec3(1, 2, 3), (Mat32() << 1, 2, 3, 4, 5, 6).finished());
  affine.hess3 = Mat2::Zero();
  EXPECT_EQ(rho_ab(affine, g).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ChangeOfCurvature, CylinderNormalDisplacement) {
  const SurfaceGeometry g = surface_frame(CylinderChart(1.0), Vec2(0.0, 0.0), true);
  Jet2 v;
  v.value << 0.0, 0.0, 1.0;
  v.hess3 = Mat2::Zero();
  EXPECT_NEAR(rho_ab(v, g)(0, 0), -1.0, 1e-12);
}

TEST(ChangeOfCurvature, NeedsSecondDerivatives) {
  const SurfaceGeometry g = surface_frame(PlaneChart(), Vec2(0.5, 0.2), true);
  EXPECT_THROW(rho_ab(Jet2{}, g), SecondDerivativeUnavailableError);
}

TEST(TransversalAverage, AnalyticProfiles) {
  const Vec3 c(1.0, -2.0, 0.5);
  const auto profile = [&](int power) {
    return AnalyticField3D([&c, power](const Vec2&, double x3) {
      Jet3 j;
      j.value = std::pow(x3, power) * c;
      return j;
    });
  };
  const Vec2 y(0.3, 0.3);
  EXPECT_LT(transversal_average(profile(1), y).value.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((transversal_average(profile(0), y).value - c).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((transversal_average(profile(2), y).value - c / 3.0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TransversalAverage, NodalWeightsSumToOne) {
  const Mesh3D m(Mesh2D::rectangle({0, 0}, {1, 1}, 2, 2, {Side::Bottom}), 3, 2);
  double s = 0.0;
  for (double w : thickness_average_weights(m)) s += w;
  EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(MembraneSeminorm, Examples) {
  const Mesh2D mesh = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {});
  const SurfaceQuadrature quad = SurfaceQuadrature::build(mesh, PlaneChart());
  EXPECT_EQ(membrane_seminorm(quad, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * mesh.n_nodes()))), 0.0);
  const AnalyticField2D stretch = [](const Vec2& y) {
    Jet2 j;
    j.value << y[0], 0.0, 0.0;
    j.grad(0, 0) = 1.0;
    return j;
  };
  EXPECT_NEAR(membrane_seminorm(quad, stretch), 1.0, 1e-13);
  Eigen::VectorXd rot(static_cast<Eigen::Index>(3 * mesh.n_nodes()));
  for (std::size_t n = 0; n < mesh.n_nodes(); ++n) rot.segment<3>(static_cast<Eigen::Index>(3 * n)) = Vec3(mesh.nodes[n][1], -mesh.nodes[n][0], 0.0);
  EXPECT_LT(membrane_seminorm(quad, rot), 1e-13);
  Eigen::VectorXd st(rot.size());
  for (std::size_t n = 0; n < mesh.n_nodes(); ++n) st.segment<3>(static_cast<Eigen::Index>(3 * n)) = Vec3(mesh.nodes[n][0], 0.0, 0.0);
  EXPECT_LT(membrane_seminorm_error(quad, st, stretch), 1e-13);
}

TEST(SpaceTimeSeminorm, ConstantHistory) {
  EXPECT_NEAR(space_time_seminorm(std::vector<double>(11, 2.0), 0.1), 2.0, 1e-14);
}
