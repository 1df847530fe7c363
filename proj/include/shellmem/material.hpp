#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

#include "shellmem/geometry.hpp"

namespace shellmem {

using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Lame coefficients (lambda, mu) and viscosity coefficients (theta, rho).
/// The decay rate k and the coupling constant Lambda are always derived.
class MaterialParams {
 public:
  MaterialParams(double lambda, double mu, double theta, double rho);

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  double theta() const { return theta_; }
  double rho() const { return rho_; }

  /// k = (lambda + 2 mu) / (theta + rho)
  double k() const { return (lambda_ + 2.0 * mu_) / (theta_ + rho_); }
  /// Lambda = lambda / theta - (lambda + 2 mu) / (theta + rho)
  double Lambda() const { return lambda_ / theta_ - k(); }

 private:
  double lambda_, mu_, theta_, rho_;
};

/// Pointwise fourth-order tensor T^{ijkl} on R^3.
struct Tensor3D {
  std::array<double, 81> c{};
  double& operator()(int i, int j, int k, int l) { return c[((i * 3 + j) * 3 + k) * 3 + l]; }
  double operator()(int i, int j, int k, int l) const { return c[((i * 3 + j) * 3 + k) * 3 + l]; }
  /// T^{ijkl} t_kl t_ij
  double contract(const Mat3& t) const;
  double max_abs_diff(const Tensor3D& other) const;
};

/// Pointwise fourth-order tensor on the tangent plane.
struct Tensor2D {
  std::array<double, 16> c{};
  double& operator()(int a, int b, int s, int t) { return c[((a * 2 + b) * 2 + s) * 2 + t]; }
  double operator()(int a, int b, int s, int t) const { return c[((a * 2 + b) * 2 + s) * 2 + t]; }
  double contract(const Mat2& t) const;
};

struct MembraneTensors2D {
  Tensor2D a, b, c;
};

/// Isotropic tensor  p g^{ij} g^{kl} + q (g^{ik} g^{jl} + g^{il} g^{jk}).
Tensor3D isotropic_tensor3d(const Mat3& gctr, double p, double q);

/// A^{ijkl}(eps) = lambda g^{ij} g^{kl} + mu (g^{ik} g^{jl} + g^{il} g^{jk})
Tensor3D tensor3d_elastic(const Mat3& gctr, const MaterialParams& params);
/// B^{ijkl}(eps) = theta g^{ij} g^{kl} + (rho/2) (g^{ik} g^{jl} + g^{il} g^{jk})
Tensor3D tensor3d_viscous(const Mat3& gctr, const MaterialParams& params);

/// Limits A(0), B(0) as eps -> 0, built from the contravariant surface metric.
struct TensorLimits {
  Tensor3D elastic, viscous;
};
TensorLimits tensor3d_limits(const Mat2& a_ctr, const MaterialParams& params);

MembraneTensors2D membrane_tensors(const Mat2& a_ctr, const MaterialParams& params);

/// Voigt matrix D with e^T D e = T^{ijkl} e_kl e_ij for e = (e11, e22, e33, e12, e13, e23).
Mat6 voigt(const Tensor3D& t);
/// Voigt matrix for (g11, g22, g12).
Eigen::Matrix3d voigt(const Tensor2D& t);

class NonEllipticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimum of T^{ijkl} t_kl t_ij over `n_samples` random symmetric t with unit
/// Frobenius norm.  Throws NonEllipticError when the minimum is not positive.
double ellipticity_estimate(const Tensor3D& t, int n_samples, std::uint64_t seed = 1);
/// Same for a 2D tensor; no error is raised since c^{abst} is only semidefinite.
double ellipticity_estimate(const Tensor2D& t, int n_samples, std::uint64_t seed = 1);

/// Exact minimum of T t t over unit symmetric arguments (smallest eigenvalue of
/// the quadratic form in an orthonormal basis of symmetric matrices).
double ellipticity_exact(const Tensor3D& t);
double ellipticity_exact(const Tensor2D& t);

}  // namespace shellmem
