#include <cmath>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "shellmem/geometry.hpp"
#include "shellmem/material.hpp"

using namespace shellmem;

TEST(MaterialParams, DerivedConstants) {
  const MaterialParams p(1.0, 1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(p.k(), 1.5);
  EXPECT_DOUBLE_EQ(p.Lambda(), -0.5);
  const MaterialParams q(0.0, 1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(q.k(), 1.0);
  EXPECT_DOUBLE_EQ(q.Lambda(), -1.0);
}

TEST(MaterialParams, RejectsNonPhysicalValues) {
  EXPECT_THROW(MaterialParams(-1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(MaterialParams(1.0, 0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(MaterialParams(1.0, 1.0, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(MaterialParams(1.0, 1.0, 1.0, std::nan("")), std::invalid_argument);
}

TEST(Tensor3D, ElasticSpotValuesOnIdentityMetric) {
  const Tensor3D A = tensor3d_elastic(Mat3::Identity(), MaterialParams(1.0, 1.0, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(A(2, 2, 2, 2), 3.0);
  EXPECT_DOUBLE_EQ(A(0, 0, 1, 1), 1.0);
  EXPECT_DOUBLE_EQ(A(0, 1, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(A(0, 1, 1, 0), 1.0);
  EXPECT_DOUBLE_EQ(A(0, 0, 0, 1), 0.0);
}

TEST(Tensor3D, ZeroCoefficientsGiveZeroTensor) {
  const Tensor3D Z = isotropic_tensor3d(Mat3::Identity() * 2.0, 0.0, 0.0);
  for (double v : Z.c) EXPECT_EQ(v, 0.0);
}

TEST(Tensor3D, ViscousSpotValuesOnIdentityMetric) {
  const Tensor3D B = tensor3d_viscous(Mat3::Identity(), MaterialParams(1.0, 1.0, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(B(2, 2, 2, 2), 2.0);
  EXPECT_DOUBLE_EQ(B(0, 2, 0, 2), 0.5);
}

TEST(Tensor3D, VoigtMatchesContraction) {
  const Mat3 G = (Mat3() << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0).finished();
  const Tensor3D A = tensor3d_elastic(G.inverse(), MaterialParams(0.7, 1.2, 1.0, 1.0));
  const Mat3 e = (Mat3() << 0.4, -0.1, 0.2, -0.1, 0.3, 0.5, 0.2, 0.5, -0.6).finished();
  Eigen::Matrix<double, 6, 1> ev;
  ev << e(0, 0), e(1, 1), e(2, 2), e(0, 1), e(0, 2), e(1, 2);
  double direct = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) direct += A(i, j, k, l) * e(k, l) * e(i, j);
  EXPECT_NEAR(ev.dot(voigt(A) * ev), direct, 1e-12);
}

TEST(TensorLimits, ClosedFormOnIdentityMetric) {
  const MaterialParams p(1.0, 1.0, 1.0, 1.0);
  const TensorLimits L = tensor3d_limits(Mat2::Identity(), p);
  EXPECT_DOUBLE_EQ(L.elastic(2, 2, 2, 2), p.lambda() + 2.0 * p.mu());
  EXPECT_DOUBLE_EQ(L.viscous(2, 2, 2, 2), p.theta() + p.rho());
  EXPECT_DOUBLE_EQ(L.elastic(0, 0, 2, 2), 1.0);
  EXPECT_DOUBLE_EQ(L.elastic(1, 1, 2, 2), 1.0);
  EXPECT_DOUBLE_EQ(L.viscous(0, 2, 0, 2), 0.5);
  const TensorLimits L0 = tensor3d_limits(Mat2::Identity(), MaterialParams(0.0, 1.0, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(L0.elastic(0, 0, 2, 2), 0.0);
}

TEST(TensorLimits, ShellTensorApproachesLimitLinearly) {
  const CylinderChart cyl(1.0);
  const MaterialParams p(1.0, 1.0, 1.0, 1.0);
  const Vec2 y(0.3, 0.4);
  const SurfaceGeometry s = surface_frame(cyl, y);
  const TensorLimits L = tensor3d_limits(s.metric_ctr, p);
  // at a single point with x3 = 1 the quadratic term still bends the fit at eps = 0.1
  std::vector<double> eps = {0.02, 0.01, 0.005}, err;
  for (double e : eps) err.push_back(tensor3d_elastic(volume_metrics(s, e, 1.0).metric_ctr, p).max_abs_diff(L.elastic));
  EXPECT_GE(fit_loglog_slope(eps, err), 0.9);
  EXPECT_NEAR(tensor3d_elastic(volume_metrics(s, 1e-8, 0.5).metric_ctr, p)(2, 2, 2, 2), 3.0, 1e-7);
}

TEST(MembraneTensors, SpotValues) {
  const auto t = membrane_tensors(Mat2::Identity(), MaterialParams(0.0, 1.0, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(t.a(0, 0, 0, 0), 5.0);
  EXPECT_DOUBLE_EQ(t.c(0, 0, 0, 0), 1.0);
  // b = 2 theta rho / (theta + rho) G + rho S with S^{1111} = 2
  EXPECT_DOUBLE_EQ(t.b(0, 0, 0, 0), 3.0);
}

TEST(MembraneTensors, CIsSemidefiniteWithTraceFreeKernel) {
  Mat2 actr;
  actr << 1.3, 0.2, 0.2, 0.8;
  const auto t = membrane_tensors(actr, MaterialParams(0.5, 1.0, 2.0, 0.5));
  EXPECT_NEAR(ellipticity_exact(t.c), 0.0, 1e-12);
  // trace-free with respect to a_ab: a^{ab} t_ab = 0
  Mat2 tf;
  tf << actr(1, 1), 0.0, 0.0, -actr(0, 0);
  EXPECT_NEAR(t.c.contract(tf), 0.0, 1e-12);
  EXPECT_GT(ellipticity_exact(t.a), 0.0);
  EXPECT_GT(ellipticity_exact(t.b), 0.0);
}

TEST(Ellipticity, EstimateBoundsExactMinimumFromAbove) {
  const Mat3 G = (Mat3() << 3.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 2.0).finished();
  const Tensor3D A = tensor3d_elastic(G, MaterialParams(1.0, 1.0, 1.0, 1.0));
  const double exact = ellipticity_exact(A);
  EXPECT_GT(exact, 0.0);
  EXPECT_GE(ellipticity_estimate(A, 1000, 7), exact - 1e-12);
}

TEST(Ellipticity, ZeroTensorRejected) {
  EXPECT_THROW(ellipticity_estimate(Tensor3D{}, 100), NonEllipticError);
}
