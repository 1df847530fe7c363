#include "shellmem/solver2d.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace shellmem {

Eigen::VectorXd DofMap::expand(const Eigen::VectorXd& free) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_full()));
  for (std::size_t i = 0; i < full_index.size(); ++i) full[full_index[i]] = free[static_cast<Eigen::Index>(i)];
  return full;
}

Eigen::VectorXd DofMap::restrict(const Eigen::VectorXd& full) const {
  Eigen::VectorXd free(static_cast<Eigen::Index>(n_free()));
  for (std::size_t i = 0; i < full_index.size(); ++i) free[static_cast<Eigen::Index>(i)] = full[full_index[i]];
  return free;
}

DofMap DofMap::from_clamped_nodes(const std::vector<bool>& clamped, int dpn) {
  DofMap d;
  d.free_index.assign(clamped.size() * static_cast<std::size_t>(dpn), -1);
  for (std::size_t n = 0; n < clamped.size(); ++n) {
    if (clamped[n]) continue;
    for (int i = 0; i < dpn; ++i) {
      const std::size_t full = n * static_cast<std::size_t>(dpn) + static_cast<std::size_t>(i);
      d.free_index[full] = static_cast<int>(d.full_index.size());
      d.full_index.push_back(static_cast<int>(full));
    }
  }
  return d;
}

Mat3x18 membrane_B(const SurfaceQuadPoint& qp) {
  const auto& G = qp.geom.christoffel;
  const Mat2& b = qp.geom.curv_cov;
  Mat3x18 B = Mat3x18::Zero();
  for (int a = 0; a < 6; ++a) {
    const double N = qp.N[static_cast<std::size_t>(a)];
    const Vec2& d = qp.dN[static_cast<std::size_t>(a)];
    for (int s = 0; s < 2; ++s) {
      const int c = 3 * a + s;
      B(0, c) = (s == 0 ? d[0] : 0.0) - G[static_cast<std::size_t>(s)](0, 0) * N;
      B(1, c) = (s == 1 ? d[1] : 0.0) - G[static_cast<std::size_t>(s)](1, 1) * N;
      B(2, c) = 0.5 * (s == 0 ? d[1] : d[0]) - G[static_cast<std::size_t>(s)](0, 1) * N;
    }
    B(0, 3 * a + 2) = -b(0, 0) * N;
    B(1, 3 * a + 2) = -b(1, 1) * N;
    B(2, 3 * a + 2) = -b(0, 1) * N;
  }
  return B;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(const DofMap& dofs, const std::array<int, 6>& tri, const Eigen::Matrix<double, 18, 18>& Ke,
             Triplets& out) {
  for (int a = 0; a < 18; ++a) {
    const int ra = dofs.free_index[static_cast<std::size_t>(3 * tri[static_cast<std::size_t>(a / 3)] + a % 3)];
    if (ra < 0) continue;
    for (int c = 0; c < 18; ++c) {
      const int rc = dofs.free_index[static_cast<std::size_t>(3 * tri[static_cast<std::size_t>(c / 3)] + c % 3)];
      if (rc < 0) continue;
      out.emplace_back(ra, rc, Ke(a, c));
    }
  }
}

SpMat build(std::size_t n, const Triplets& t) {
  SpMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

double inf_norm(const SpMat& K) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(K.rows());
  for (Eigen::Index c = 0; c < K.outerSize(); ++c)
    for (SpMat::InnerIterator it(K, c); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

MembraneSystem assemble_membrane(const Mesh2D& mesh, const MidsurfaceChart& chart, const MaterialParams& params) {
  MembraneSystem sys;
  sys.mesh = &mesh;
  sys.params = params;
  sys.quad = SurfaceQuadrature::build(mesh, chart, false);
  sys.dofs = DofMap::from_clamped_nodes(mesh.node_clamped, 3);
  const std::size_t nq = sys.quad.points.size();
  sys.B.resize(nq);
  sys.wa.resize(nq);
  sys.Da.resize(nq);
  sys.Db.resize(nq);
  sys.Dc.resize(nq);
  Triplets ta, tb, tc, tm;
  const std::size_t ppe = sys.quad.points_per_element();
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    Eigen::Matrix<double, 18, 18> Ka = Eigen::Matrix<double, 18, 18>::Zero();
    Eigen::Matrix<double, 18, 18> Kb = Ka, Kc = Ka, Me = Ka;
    for (std::size_t q = e * ppe; q < (e + 1) * ppe; ++q) {
      const auto& qp = sys.quad.points[q];
      const MembraneTensors2D T = membrane_tensors(qp.geom.metric_ctr, params);
      sys.B[q] = membrane_B(qp);
      sys.wa[q] = qp.weight * qp.geom.sqrt_a;
      sys.Da[q] = voigt(T.a);
      sys.Db[q] = voigt(T.b);
      sys.Dc[q] = voigt(T.c);
      const auto& B = sys.B[q];
      const double w = sys.wa[q];
      Ka.noalias() += w * B.transpose() * sys.Da[q] * B;
      Kb.noalias() += w * B.transpose() * sys.Db[q] * B;
      Kc.noalias() += w * B.transpose() * sys.Dc[q] * B;
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < 6; ++c)
          for (int i = 0; i < 3; ++i) Me(3 * a + i, 3 * c + i) += w * qp.N[static_cast<std::size_t>(a)] * qp.N[static_cast<std::size_t>(c)];
    }
    // exact symmetry before scattering
    Ka = 0.5 * (Ka + Ka.transpose()).eval();
    Kb = 0.5 * (Kb + Kb.transpose()).eval();
    Kc = 0.5 * (Kc + Kc.transpose()).eval();
    const auto& tri = mesh.triangles[e];
    scatter(sys.dofs, tri, Ka, ta);
    scatter(sys.dofs, tri, Kb, tb);
    scatter(sys.dofs, tri, Kc, tc);
    scatter(sys.dofs, tri, Me, tm);
  }
  const std::size_t n = sys.dofs.n_free();
  sys.Ka = build(n, ta);
  sys.Kb = build(n, tb);
  sys.Kc = build(n, tc);
  sys.M = build(n, tm);
  return sys;
}

Eigen::VectorXd membrane_load(const MembraneSystem& sys, const std::vector<Mat2>& phi) {
  if (phi.size() != sys.quad.points.size()) throw std::invalid_argument("membrane_load: one phi per quadrature point");
  Eigen::VectorXd L = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dofs.n_free()));
  const std::size_t ppe = sys.quad.points_per_element();
  for (std::size_t q = 0; q < phi.size(); ++q) {
    const Eigen::Vector3d f(phi[q](0, 0), phi[q](1, 1), phi[q](0, 1) + phi[q](1, 0));
    const Eigen::Matrix<double, 18, 1> le = sys.wa[q] * sys.B[q].transpose() * f;
    const auto& tri = sys.mesh->triangles[q / ppe];
    for (int a = 0; a < 18; ++a) {
      const int r = sys.dofs.free_index[static_cast<std::size_t>(3 * tri[static_cast<std::size_t>(a / 3)] + a % 3)];
      if (r >= 0) L[r] += le[a];
    }
  }
  return L;
}

double membrane_energy_quadrature(const MembraneSystem& sys, const Eigen::VectorXd& full) {
  if (static_cast<std::size_t>(full.size()) != sys.dofs.n_full())
    throw std::invalid_argument("membrane_energy_quadrature: full nodal vector expected");
  const std::size_t ppe = sys.quad.points_per_element();
  double e = 0.0;
  for (std::size_t q = 0; q < sys.B.size(); ++q) {
    const auto& tri = sys.mesh->triangles[q / ppe];
    Eigen::Matrix<double, 18, 1> xe;
    for (int a = 0; a < 18; ++a) xe[a] = full[3 * tri[static_cast<std::size_t>(a / 3)] + a % 3];
    const Eigen::Vector3d g = sys.B[q] * xe;
    e += sys.wa[q] * g.dot(sys.Da[q] * g);
  }
  return e;
}

std::string kind_name(ShellKind k) { return k == ShellKind::FirstKind ? "first-kind" : "degenerate"; }

double smallest_eigenvalue_dense(const SpMat& K) {
  const Eigen::MatrixXd D = Eigen::MatrixXd(K);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(D, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

KernelReport kernel_diagnostic(const MembraneSystem& sys, const KernelOptions& opts) {
  KernelReport r;
  const SpMat& K = sys.Ka;
  const Eigen::Index n = K.rows();
  r.norm_Ka = inf_norm(K);
  r.tol = opts.rel_tol * r.norm_Ka;
  if (n == 0) {
    r.kind = ShellKind::FirstKind;
    return r;
  }
  // Shifted inverse subspace iteration: the shift keeps the factorization
  // regular when K_a has a kernel; Rayleigh-Ritz on K_a recovers the eigenvalues.
  const double shift = 1e-9 * r.norm_Ka;
  SpMat Ks = K;
  for (Eigen::Index i = 0; i < n; ++i) Ks.coeffRef(i, i) += shift;
  Eigen::SimplicialLDLT<SpMat> ldlt(Ks);
  if (ldlt.info() != Eigen::Success) throw SingularSystemError("kernel_diagnostic: shifted factorization failed");
  const int m = static_cast<int>(std::min<Eigen::Index>(opts.block, n));
  Eigen::MatrixXd X(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) X(i, j) = std::sin(1.0 + 0.37 * static_cast<double>(i) * (j + 1) + 0.11 * j);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iter; ++it) {
    Eigen::MatrixXd Y = ldlt.solve(X);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    const Eigen::MatrixXd H = X.transpose() * (K * X);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
    X = X * es.eigenvectors();
    const double lam = es.eigenvalues()(0);
    if (std::abs(lam - prev) <= 1e-12 * std::max(std::abs(lam), r.norm_Ka * 1e-6)) {
      prev = lam;
      break;
    }
    prev = lam;
  }
  r.sigma_min = std::max(prev, 0.0);
  r.kind = r.sigma_min > r.tol ? ShellKind::FirstKind : ShellKind::Degenerate;
  return r;
}

namespace {

DisplacementHistory run_membrane(const MembraneSystem& sys, const PhiSampler& phi, double form_scale,
                                 const TimeGrid& grid, const Eigen::VectorXd& xi0, const MembraneSolveOptions& opts) {
  if (static_cast<std::size_t>(xi0.size()) != sys.dofs.n_full())
    throw std::invalid_argument("solve_membrane: xi0 must be a full nodal vector");
  const KernelReport kr = opts.kernel ? *opts.kernel : kernel_diagnostic(sys);
  const std::size_t n = sys.dofs.n_free();
  double delta = 0.0;
  if (opts.delta) {
    delta = *opts.delta;
  } else if (kr.kind == ShellKind::Degenerate && n > 0) {
    delta = 1e-8 * sys.Kb.diagonal().sum() / static_cast<double>(n);
  }
  const double dt = grid.dt();
  const ConvWeights w = conv_weights(sys.params.k(), dt);
  const double s = form_scale;

  SpMat Kbd = sys.Kb;
  if (delta != 0.0) Kbd += delta * sys.M;
  SpMat A = (s / dt) * Kbd + s * sys.Ka;
  if (opts.memory) A -= (s * w.w1) * sys.Kc;
  Eigen::SimplicialLDLT<SpMat> solver(A);
  if (solver.info() != Eigen::Success || (n > 0 && !(solver.vectorD().array().abs().minCoeff() > 0.0))) {
    std::ostringstream msg;
    msg << "membrane system is singular (sigma_min = " << kr.sigma_min << ", classified "
        << kind_name(kr.kind) << ", delta = " << delta << ")";
    throw SingularSystemError(msg.str());
  }

  DisplacementHistory h;
  Eigen::VectorXd x = sys.dofs.restrict(xi0);
  Eigen::VectorXd mem = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));  // nodal convolution of xi
  auto record = [&](int k, const Eigen::VectorXd& xf) {
    h.t.push_back(grid.t(k));
    const Eigen::VectorXd full = sys.dofs.expand(xf);
    h.seminorm.push_back(membrane_seminorm(sys.quad, full));
    h.energy.push_back(0.5 * xf.dot(sys.Ka * xf));
    h.u.push_back(full);
  };
  record(0, x);
  (void)phi(0, grid.t(0));  // keeps streaming samplers in step with the grid
  for (int k = 0; k < grid.N(); ++k) {
    const Eigen::VectorXd L = membrane_load(sys, phi(k + 1, grid.t(k + 1)));
    Eigen::VectorXd rhs = L + (s / dt) * (Kbd * x);
    if (opts.memory) rhs += s * (sys.Kc * (w.decay * mem + w.w0 * x));
    Eigen::VectorXd xn = solver.solve(rhs);
    if (opts.memory) mem = w.decay * mem + w.w0 * x + w.w1 * xn;
    x = std::move(xn);
    record(k + 1, x);
  }
  return h;
}

}  // namespace

DisplacementHistory solve_membrane(const MembraneSystem& sys, const PhiSampler& phi, const TimeGrid& grid,
                                   const Eigen::VectorXd& xi0, const MembraneSolveOptions& opts) {
  return run_membrane(sys, phi, 1.0, grid, xi0, opts);
}

DisplacementHistory solve_descaled(const MembraneSystem& sys, const PhiSampler& phi_eps, double eps,
                                   const TimeGrid& grid, const Eigen::VectorXd& xi0,
                                   const MembraneSolveOptions& opts) {
  if (!(eps > 0.0)) throw std::invalid_argument("solve_descaled: eps must be > 0");
  return run_membrane(sys, phi_eps, eps, grid, xi0, opts);
}

PhiSampler admissible_phi(const MembraneSystem& sys, const ForceSampler& F, const TimeGrid& grid, int n_gauss,
                          PhiConvention conv) {
  std::vector<PhiStream::Point> pts;
  pts.reserve(sys.quad.points.size());
  for (const auto& qp : sys.quad.points) pts.push_back({qp.y, qp.geom.metric_ctr});
  auto stream = std::make_shared<PhiStream>(F, std::move(pts), sys.params, grid, n_gauss, conv);
  return [stream](int n, double) { return stream->at(n); };
}

}  // namespace shellmem
