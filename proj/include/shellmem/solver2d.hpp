#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "shellmem/kinematics.hpp"
#include "shellmem/material.hpp"
#include "shellmem/memory.hpp"
#include "shellmem/mesh.hpp"

namespace shellmem {

using SpMat = Eigen::SparseMatrix<double>;
using Mat3x18 = Eigen::Matrix<double, 3, 18>;

/// Map between full nodal vectors (ndim dofs per node, clamped dofs included)
/// and the reduced vector of free dofs.
struct DofMap {
  std::vector<int> free_index;  // full dof -> free dof, -1 when constrained
  std::vector<int> full_index;  // free dof -> full dof
  std::size_t n_full() const { return free_index.size(); }
  std::size_t n_free() const { return full_index.size(); }
  Eigen::VectorXd expand(const Eigen::VectorXd& free) const;
  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;

  static DofMap from_clamped_nodes(const std::vector<bool>& clamped, int dofs_per_node);
};

/// Strain-displacement matrix of gamma at a quadrature point: (g11, g22, g12) = B * xi_e,
/// xi_e ordered (node a, component i) -> 3a + i.
Mat3x18 membrane_B(const SurfaceQuadPoint& qp);

struct MembraneSystem {
  const Mesh2D* mesh = nullptr;
  SurfaceQuadrature quad;
  MaterialParams params{0.0, 1.0, 1.0, 1.0};
  DofMap dofs;
  SpMat Ka, Kb, Kc, M;              // on free dofs
  std::vector<Mat3x18> B;           // per quadrature point
  std::vector<double> wa;           // weight * sqrt(a) per quadrature point
  std::vector<Eigen::Matrix3d> Da, Db, Dc;  // Voigt tensors per quadrature point
};

MembraneSystem assemble_membrane(const Mesh2D& mesh, const MidsurfaceChart& chart, const MaterialParams& params);

/// a(xi, xi) by quadrature of per-point strains, for a full nodal vector. Free of
/// the cancellation in K_a x . x, so kernel members evaluate to roundoff squared.
double membrane_energy_quadrature(const MembraneSystem& sys, const Eigen::VectorXd& full);

/// Load vector on free dofs: int phi^{ab} gamma_ab(eta) sqrt(a) dy, phi given per quadrature point.
Eigen::VectorXd membrane_load(const MembraneSystem& sys, const std::vector<Mat2>& phi);

enum class ShellKind { FirstKind, Degenerate };
std::string kind_name(ShellKind k);

struct KernelReport {
  double sigma_min = 0.0;   // smallest eigenvalue of K_a on free dofs
  double norm_Ka = 0.0;     // infinity norm
  double tol = 0.0;         // classification threshold
  ShellKind kind = ShellKind::Degenerate;
};

struct KernelOptions {
  double rel_tol = 1e-10;
  int block = 4;
  int max_iter = 300;
};

KernelReport kernel_diagnostic(const MembraneSystem& sys, const KernelOptions& opts = {});

/// Dense reference: smallest eigenvalue of K_a by a full symmetric eigensolve.
double smallest_eigenvalue_dense(const SpMat& K);

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DisplacementHistory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> u;  // full nodal vectors
  std::vector<double> seminorm;    // |u(t_n)|^M (2D only)
  std::vector<double> energy;      // 1/2 K u . u
};

/// phi^{ab} at every quadrature point of the system for time level n (called in order).
using PhiSampler = std::function<std::vector<Mat2>(int n, double t)>;

struct MembraneSolveOptions {
  bool memory = true;
  std::optional<double> delta;          // regularization override
  std::optional<KernelReport> kernel;   // reuse a diagnostic instead of recomputing
};

DisplacementHistory solve_membrane(const MembraneSystem& sys, const PhiSampler& phi, const TimeGrid& grid,
                                   const Eigen::VectorXd& xi0, const MembraneSolveOptions& opts = {});

/// All three bilinear forms carry the prefactor eps.
DisplacementHistory solve_descaled(const MembraneSystem& sys, const PhiSampler& phi_eps, double eps,
                                   const TimeGrid& grid, const Eigen::VectorXd& xi0,
                                   const MembraneSolveOptions& opts = {});

/// Sampler for phi^{ab} computed from admissible forces at the system quadrature points.
PhiSampler admissible_phi(const MembraneSystem& sys, const ForceSampler& F, const TimeGrid& grid,
                          int n_gauss = 4, PhiConvention conv = PhiConvention::Consistent);

}  // namespace shellmem
