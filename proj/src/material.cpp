#include "shellmem/material.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

namespace shellmem {

MaterialParams::MaterialParams(double lambda, double mu, double theta, double rho)
    : lambda_(lambda), mu_(mu), theta_(theta), rho_(rho) {
  std::ostringstream msg;
  if (!(lambda >= 0.0)) msg << "lambda must be >= 0 (got " << lambda << "); ";
  if (!(mu > 0.0)) msg << "mu must be > 0 (got " << mu << "); ";
  if (!(theta > 0.0)) msg << "theta must be > 0 (got " << theta << "); ";
  if (!(rho > 0.0)) msg << "rho must be > 0 (got " << rho << "); ";
  if (!msg.str().empty()) throw std::invalid_argument("invalid material parameters: " + msg.str());
}

double Tensor3D::contract(const Mat3& t) const {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += (*this)(i, j, k, l) * t(k, l) * t(i, j);
  return s;
}

double Tensor3D::max_abs_diff(const Tensor3D& other) const {
  double m = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) m = std::max(m, std::abs(c[n] - other.c[n]));
  return m;
}

double Tensor2D::contract(const Mat2& t) const {
  double s = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int g = 0; g < 2; ++g)
        for (int d = 0; d < 2; ++d) s += (*this)(a, b, g, d) * t(g, d) * t(a, b);
  return s;
}

Tensor3D isotropic_tensor3d(const Mat3& g, double p, double q) {
  Tensor3D t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          t(i, j, k, l) = p * g(i, j) * g(k, l) + q * (g(i, k) * g(j, l) + g(i, l) * g(j, k));
  return t;
}

Tensor3D tensor3d_elastic(const Mat3& gctr, const MaterialParams& params) {
  return isotropic_tensor3d(gctr, params.lambda(), params.mu());
}

Tensor3D tensor3d_viscous(const Mat3& gctr, const MaterialParams& params) {
  return isotropic_tensor3d(gctr, params.theta(), 0.5 * params.rho());
}

TensorLimits tensor3d_limits(const Mat2& a_ctr, const MaterialParams& params) {
  // The limit table coincides with the isotropic formula evaluated on diag(a^{ab}, 1).
  Mat3 ext = Mat3::Zero();
  ext.topLeftCorner<2, 2>() = a_ctr;
  ext(2, 2) = 1.0;
  return {tensor3d_elastic(ext, params), tensor3d_viscous(ext, params)};
}

namespace {

Tensor2D iso2(const Mat2& g, double p, double q) {
  Tensor2D t;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int s = 0; s < 2; ++s)
        for (int u = 0; u < 2; ++u)
          t(a, b, s, u) = p * g(a, b) * g(s, u) + q * (g(a, s) * g(b, u) + g(a, u) * g(b, s));
  return t;
}

}  // namespace

MembraneTensors2D membrane_tensors(const Mat2& a_ctr, const MaterialParams& m) {
  const double lam = m.lambda(), mu = m.mu(), th = m.theta(), rh = m.rho();
  const double sum = th + rh;
  MembraneTensors2D out;
  out.a = iso2(a_ctr, (2.0 * lam * rh * rh + 4.0 * mu * th * th) / (sum * sum), 2.0 * mu);
  out.b = iso2(a_ctr, 2.0 * th * rh / sum, rh);
  const double tl = th * m.Lambda();
  out.c = iso2(a_ctr, 2.0 * tl * tl / sum, 0.0);
  return out;
}

Mat6 voigt(const Tensor3D& t) {
  static constexpr int I[6] = {0, 1, 2, 0, 0, 1};
  static constexpr int J[6] = {0, 1, 2, 1, 2, 2};
  Mat6 d;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) {
      const double mp = p < 3 ? 1.0 : 2.0;
      const double mq = q < 3 ? 1.0 : 2.0;
      d(p, q) = mp * mq * t(I[p], J[p], I[q], J[q]);
    }
  return d;
}

Eigen::Matrix3d voigt(const Tensor2D& t) {
  static constexpr int I[3] = {0, 1, 0};
  static constexpr int J[3] = {0, 1, 1};
  Eigen::Matrix3d d;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) {
      const double mp = p < 2 ? 1.0 : 2.0;
      const double mq = q < 2 ? 1.0 : 2.0;
      d(p, q) = mp * mq * t(I[p], J[p], I[q], J[q]);
    }
  return d;
}

namespace {

template <int N>
Eigen::Matrix<double, N, N> random_unit_sym(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::Matrix<double, N, N> t;
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) t(i, j) = t(j, i) = nd(rng);
  return t / t.norm();
}

}  // namespace

double ellipticity_estimate(const Tensor3D& t, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("ellipticity_estimate: n_samples must be positive");
  std::mt19937_64 rng(seed);
  double mn = std::numeric_limits<double>::infinity();
  for (int n = 0; n < n_samples; ++n) mn = std::min(mn, t.contract(random_unit_sym<3>(rng)));
  if (!(mn > 0.0)) {
    std::ostringstream msg;
    msg << "tensor is not elliptic: sampled minimum " << mn;
    throw NonEllipticError(msg.str());
  }
  return mn;
}

double ellipticity_estimate(const Tensor2D& t, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("ellipticity_estimate: n_samples must be positive");
  std::mt19937_64 rng(seed);
  double mn = std::numeric_limits<double>::infinity();
  for (int n = 0; n < n_samples; ++n) mn = std::min(mn, t.contract(random_unit_sym<2>(rng)));
  return mn;
}

double ellipticity_exact(const Tensor3D& t) {
  // Orthonormal basis of symmetric 3x3 matrices under the Frobenius product.
  std::vector<Mat3> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 3; ++i) {
    Mat3 e = Mat3::Zero();
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      Mat3 e = Mat3::Zero();
      e(i, j) = e(j, i) = r;
      basis.push_back(e);
    }
  Mat6 q;
  for (int p = 0; p < 6; ++p)
    for (int s = 0; s < 6; ++s) {
      double v = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) v += t(i, j, k, l) * basis[s](k, l) * basis[p](i, j);
      q(p, s) = v;
    }
  return Eigen::SelfAdjointEigenSolver<Mat6>(0.5 * (q + q.transpose()), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double ellipticity_exact(const Tensor2D& t) {
  const double r = 1.0 / std::sqrt(2.0);
  std::array<Mat2, 3> basis;
  basis[0] << 1, 0, 0, 0;
  basis[1] << 0, 0, 0, 1;
  basis[2] << 0, r, r, 0;
  Eigen::Matrix3d q;
  for (int p = 0; p < 3; ++p)
    for (int s = 0; s < 3; ++s) {
      double v = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int g = 0; g < 2; ++g)
            for (int d = 0; d < 2; ++d) v += t(a, b, g, d) * basis[s](g, d) * basis[p](a, b);
      q(p, s) = v;
    }
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(0.5 * (q + q.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()(0);
}

}  // namespace shellmem
