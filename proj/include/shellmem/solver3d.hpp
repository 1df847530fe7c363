#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "shellmem/kinematics.hpp"
#include "shellmem/material.hpp"
#include "shellmem/memory.hpp"
#include "shellmem/mesh.hpp"
#include "shellmem/solver2d.hpp"

namespace shellmem {

using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Scaled 3D problem on Omega = omega x (-1, 1) for one eps.
struct ShellSystem3D {
  const Mesh3D* mesh = nullptr;
  SurfaceQuadrature surf;  // in-plane quadrature with curvature derivatives
  MaterialParams params{0.0, 1.0, 1.0, 1.0};
  double eps = 0.0;
  QuadRule1D thickness_rule;  // per layer, on [-1, 1]
  DofMap dofs;
  SpMat K, C;  // elastic and viscous forms on free dofs
};

/// Everything known at one volume quadrature point.
struct VolumeQuadPoint {
  std::size_t tri = 0;
  int layer = 0;
  std::size_t surf_index = 0;  // index into ShellSystem3D::surf.points
  double x3 = 0.0;
  double weight = 0.0;  // dy dx3 measure
  const std::vector<int>* nodes = nullptr;
  Eigen::VectorXd N;               // shape values
  Eigen::Matrix<double, Eigen::Dynamic, 3> dN;  // d/dy1, d/dy2, d/dx3
  VolumeGeometry geom;
};

/// Visits every volume quadrature point in a fixed element-major order.
void for_each_volume_point(const ShellSystem3D& sys, const std::function<void(const VolumeQuadPoint&)>& fn);

/// Voigt rows (e11, e22, e33, e12, e13, e23) of e_{i||j}(eps; .) against element dofs (3 per node).
Mat6X strain_B(const VolumeQuadPoint& qp, double eps);

/// Local jet of a full nodal field at a volume quadrature point.
Jet3 interpolate(const VolumeQuadPoint& qp, const Eigen::VectorXd& u);

ShellSystem3D assemble_3d(const Mesh3D& mesh, const MidsurfaceChart& chart, double eps, const MaterialParams& params);

/// int F^{ij} e_{i||j}(eps; v) sqrt(g) dx on free dofs.
Eigen::VectorXd assemble_admissible_rhs(const ShellSystem3D& sys, const ForceSampler& F, double t);

/// Load vector on free dofs for time level n.
using LoadSampler = std::function<Eigen::VectorXd(int n, double t)>;

class NonSPDError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse Cholesky factorization of an SPD matrix (AMD ordering).
class SPDSolver {
 public:
  explicit SPDSolver(const SpMat& A);
  ~SPDSolver();
  SPDSolver(const SPDSolver&) = delete;
  SPDSolver& operator=(const SPDSolver&) = delete;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  static const char* backend();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Backward Euler (C/dt + K) u^{n+1} = L^{n+1} + C u^n / dt with one factorization.
DisplacementHistory solve_3d(const ShellSystem3D& sys, const LoadSampler& load, const TimeGrid& grid,
                             const Eigen::VectorXd& u0);

/// sigma^{ij} = A e + B e_dot at every volume quadrature point for time level n,
/// with e_dot by backward difference (zero at n = 0).
std::vector<Mat3> stress_recovery(const ShellSystem3D& sys, const DisplacementHistory& hist, const TimeGrid& grid,
                                  int n);

/// Scaled strains at every volume quadrature point.
std::vector<Mat3> strain_field(const ShellSystem3D& sys, const Eigen::VectorXd& u);

/// Average of a 3D history onto the base mesh (one entry per time level).
std::vector<Eigen::VectorXd> average_to_2d(const std::vector<Eigen::VectorXd>& history, const Mesh3D& mesh3d,
                                           const Mesh2D& mesh2d);

/// |d_3 u|_{0,Omega}
double d3_norm(const ShellSystem3D& sys, const Eigen::VectorXd& u);
/// ||u||_{1,Omega} over components u_i and derivatives in (y1, y2, x3)
double h1_norm(const ShellSystem3D& sys, const Eigen::VectorXd& u);
/// (sum_ij |e_{i||j}(eps; u)|^2_{0,Omega})^{1/2}
double strain_norm(const ShellSystem3D& sys, const Eigen::VectorXd& u);

}  // namespace shellmem
