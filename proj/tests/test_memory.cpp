#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "shellmem/memory.hpp"

using namespace shellmem;

namespace {

// int_a^b e^{-k(b-s)} f(s) ds for linear f, by high-order Gauss quadrature
double segment_reference(double fa, double fb, double k, double h) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  double s = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double tau = 0.5 * h * (x[i] + 1.0);  // distance from the left end
    s += w[i] * std::exp(-k * (h - tau)) * (fa + (fb - fa) * tau / h);
  }
  return 0.5 * h * s;
}

}  // namespace

TEST(TimeGrid, EndpointIsExact) {
  const TimeGrid g(0.3, 7);
  EXPECT_EQ(g.t(7), 0.3);
  EXPECT_DOUBLE_EQ(g.dt(), 0.3 / 7);
}

TEST(ConvStep, ZeroInputStaysZero) {
  for (double h : convolve(std::vector<double>(17, 0.0), 2.0, TimeGrid(1.0, 16))) EXPECT_EQ(h, 0.0);
}

TEST(ConvStep, UnitInputClosedForm) {
  const auto H = convolve(std::vector<double>(33, 1.0), 1.0, TimeGrid(1.0, 32));
  EXPECT_NEAR(H.back(), 0.6321206, 1e-7);
  EXPECT_NEAR(H.back(), 1.0 - std::exp(-1.0), 1e-14);
}

TEST(ConvStep, PiecewiseLinearExactness) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double k = 2.5;
  for (int N : {16, 1024}) {
    const TimeGrid g(1.0, N);
    std::vector<double> f(static_cast<std::size_t>(N + 1));
    for (auto& v : f) v = U(rng);
    const auto H = convolve(f, k, g);
    double ref = 0.0;
    for (int n = 0; n < N; ++n)
      ref = std::exp(-k * g.dt()) * ref + segment_reference(f[static_cast<std::size_t>(n)], f[static_cast<std::size_t>(n + 1)], k, g.dt());
    EXPECT_NEAR(H.back(), ref, 1e-12) << "N = " << N;
  }
}

TEST(ConvStep, SmallDecayLimitIsTrapezoid) {
  const ConvWeights w = conv_weights(1e-14, 0.1);
  EXPECT_NEAR(w.decay, 1.0, 1e-14);
  EXPECT_NEAR(w.w0, 0.05, 1e-14);
  EXPECT_NEAR(w.w1, 0.05, 1e-14);
}

TEST(MemoryAccumulator, MatchesScalarRecursion) {
  const double k = 0.8, dt = 0.05;
  MemoryAccumulator acc(2, k, dt);
  double h0 = 0.0, h1 = 0.0;
  for (int n = 0; n < 40; ++n) {
    const double f0[2] = {std::sin(n * dt), 1.0}, f1[2] = {std::sin((n + 1) * dt), 1.0};
    acc.step(f0, f1);
    h0 = conv_step(h0, f0[0], f1[0], k, dt);
    h1 = conv_step(h1, f0[1], f1[1], k, dt);
  }
  EXPECT_EQ(acc.value(0), h0);
  EXPECT_EQ(acc.value(1), h1);
  acc.reset();
  EXPECT_EQ(acc.value(0), 0.0);
}

TEST(ShearClosure, Examples) {
  const TimeGrid g(1.0, 64);
  const MaterialParams p(1.0, 1.0, 1.0, 2.0);
  for (const auto& e : shear_closure(std::vector<Vec2>(65, Vec2::Zero()), p, g)) EXPECT_EQ(e.norm(), 0.0);
  const auto e = shear_closure(std::vector<Vec2>(65, Vec2(1.0, 1.0)), p, g);
  EXPECT_NEAR(e.back()[0], 0.3160603, 1e-7);
  EXPECT_NEAR(e.back()[1], 0.5 * (1.0 - std::exp(-1.0)), 1e-12);
}

TEST(ShearClosure, SizeMismatchRejected) {
  EXPECT_THROW(shear_closure(std::vector<Vec2>(3), MaterialParams(1, 1, 1, 1), TimeGrid(1.0, 4)), std::invalid_argument);
}

TEST(NormalClosure, Examples) {
  const TimeGrid g(1.0, 64);
  const MaterialParams p(0.0, 1.0, 1.0, 1.0);
  const std::vector<double> zero(65, 0.0);
  for (double v : normal_closure(zero, zero, p, g)) EXPECT_EQ(v, 0.0);
  EXPECT_NEAR(normal_closure(std::vector<double>(65, 2.0), zero, p, g).back(), 0.6321206, 1e-7);
}

TEST(PhiAb, MembraneLoadOnly) {
  const TimeGrid g(1.0, 8);
  const ForceSampler F = [](double, const Vec2&, double) {
    Mat3 f = Mat3::Zero();
    f.topLeftCorner<2, 2>().setOnes();
    return f;
  };
  for (const auto& m : phi_ab(F, Vec2::Zero(), Mat2::Identity(), MaterialParams(0, 1, 1, 1), g))
    EXPECT_LT((m - 2.0 * Mat2::Ones()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PhiAb, NormalLoadBothConventions) {
  const TimeGrid g(3.0, 30);
  const ForceSampler F = [](double, const Vec2&, double) {
    Mat3 f = Mat3::Zero();
    f(2, 2) = 1.0;
    return f;
  };
  Mat2 a;
  a << 1.2, 0.1, 0.1, 0.9;
  const MaterialParams p(0.0, 1.0, 1.0, 1.0);
  const auto c = phi_ab(F, Vec2::Zero(), a, p, g, 4, PhiConvention::Consistent);
  const auto q = phi_ab(F, Vec2::Zero(), a, p, g, 4, PhiConvention::AsPrinted);
  for (int n = 0; n <= g.N(); ++n) {
    const double t = g.t(n);
    EXPECT_LT((c[static_cast<std::size_t>(n)] + std::exp(-t) * a).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((q[static_cast<std::size_t>(n)] + (2.0 - std::exp(-t)) * a).cwiseAbs().maxCoeff(), 1e-13);
  }
  // t = 0: no memory, phi = -2 theta / (theta + rho) F33 a
  EXPECT_LT((c[0] + a).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((q[0] + a).cwiseAbs().maxCoeff(), 1e-15);
}
