#include "shellmem/solver3d.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

namespace shellmem {

void for_each_volume_point(const ShellSystem3D& sys, const std::function<void(const VolumeQuadPoint&)>& fn) {
  const Mesh3D& m = *sys.mesh;
  const int p = m.order;
  const std::size_t ppe = sys.surf.points_per_element();
  const double h = m.layer_height();
  const std::size_t nloc = m.nodes_per_element();
  VolumeQuadPoint qp;
  qp.N.resize(static_cast<Eigen::Index>(nloc));
  qp.dN.resize(static_cast<Eigen::Index>(nloc), 3);
  std::vector<int> nodes;
  for (std::size_t tri = 0; tri < m.base.n_elements(); ++tri)
    for (int layer = 0; layer < m.layers; ++layer) {
      nodes = m.element_nodes(tri, layer);
      qp.tri = tri;
      qp.layer = layer;
      qp.nodes = &nodes;
      for (std::size_t sq = tri * ppe; sq < (tri + 1) * ppe; ++sq) {
        const SurfaceQuadPoint& s = sys.surf.points[sq];
        qp.surf_index = sq;
        for (std::size_t tq = 0; tq < sys.thickness_rule.points.size(); ++tq) {
          const double r = sys.thickness_rule.points[tq];
          qp.x3 = m.layer_bottom(layer) + 0.5 * (r + 1.0) * h;
          qp.weight = s.weight * 0.5 * h * sys.thickness_rule.weights[tq];
          const auto l = lagrange_values(p, r);
          const auto dl = lagrange_derivatives(p, r);
          for (int lp = 0; lp <= p; ++lp)
            for (int a = 0; a < 6; ++a) {
              const Eigen::Index i = lp * 6 + a;
              const double Na = s.N[static_cast<std::size_t>(a)];
              qp.N[i] = Na * l[static_cast<std::size_t>(lp)];
              qp.dN(i, 0) = s.dN[static_cast<std::size_t>(a)][0] * l[static_cast<std::size_t>(lp)];
              qp.dN(i, 1) = s.dN[static_cast<std::size_t>(a)][1] * l[static_cast<std::size_t>(lp)];
              qp.dN(i, 2) = Na * dl[static_cast<std::size_t>(lp)] * 2.0 / h;
            }
          qp.geom = volume_metrics(s.geom, sys.eps, qp.x3);
          fn(qp);
        }
      }
    }
}

Mat6X strain_B(const VolumeQuadPoint& qp, double eps) {
  static constexpr int I[6] = {0, 1, 2, 0, 0, 1};
  static constexpr int J[6] = {0, 1, 2, 1, 2, 2};
  const Eigen::Index n = qp.N.size();
  const double inv = 1.0 / eps;
  const auto& G = qp.geom.christoffel;
  Mat6X B = Mat6X::Zero(6, 3 * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const double N = qp.N[a];
    // scaled derivative d_j with 1/eps on x3
    const double d[3] = {qp.dN(a, 0), qp.dN(a, 1), qp.dN(a, 2) * inv};
    for (int c = 0; c < 3; ++c) {
      const Eigen::Index col = 3 * a + c;
      for (int r = 0; r < 6; ++r) {
        const int i = I[r], j = J[r];
        double v = 0.5 * ((c == i ? d[j] : 0.0) + (c == j ? d[i] : 0.0));
        if (j < 2) {
          v -= G[static_cast<std::size_t>(c)](i, j) * N;
        } else if (i < 2 && c < 2) {
          v -= G[static_cast<std::size_t>(c)](i, 2) * N;
        }
        B(r, col) = v;
      }
    }
  }
  // e33 = (1/eps) d_3 v_3: the generic rule above already gives it since Gamma^p_33 = 0.
  return B;
}

Jet3 interpolate(const VolumeQuadPoint& qp, const Eigen::VectorXd& u) {
  Jet3 j;
  const auto& nodes = *qp.nodes;
  for (Eigen::Index a = 0; a < qp.N.size(); ++a) {
    const Vec3 v = u.segment<3>(3 * nodes[static_cast<std::size_t>(a)]);
    j.value += qp.N[a] * v;
    j.grad += v * qp.dN.row(a);
  }
  return j;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

std::vector<int> element_dofs(const DofMap& dofs, const std::vector<int>& nodes) {
  std::vector<int> d(3 * nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (int c = 0; c < 3; ++c) d[3 * a + static_cast<std::size_t>(c)] = dofs.free_index[3 * static_cast<std::size_t>(nodes[a]) + static_cast<std::size_t>(c)];
  return d;
}

Eigen::Matrix<double, 6, 1> voigt_stress_load(const Mat3& F) {
  Eigen::Matrix<double, 6, 1> f;
  f << F(0, 0), F(1, 1), F(2, 2), F(0, 1) + F(1, 0), F(0, 2) + F(2, 0), F(1, 2) + F(2, 1);
  return f;
}

}  // namespace

ShellSystem3D assemble_3d(const Mesh3D& mesh, const MidsurfaceChart& chart, double eps, const MaterialParams& params) {
  if (!(eps > 0.0)) throw std::invalid_argument("assemble_3d: eps must be > 0");
  ShellSystem3D sys;
  sys.mesh = &mesh;
  sys.params = params;
  sys.eps = eps;
  sys.surf = SurfaceQuadrature::build(mesh.base, chart, true);
  sys.thickness_rule = gauss_legendre(mesh.order + 1);
  std::vector<bool> clamped(mesh.n_nodes());
  for (std::size_t n = 0; n < clamped.size(); ++n) clamped[n] = mesh.node_clamped(n);
  sys.dofs = DofMap::from_clamped_nodes(clamped, 3);

  const Eigen::Index ne = static_cast<Eigen::Index>(3 * mesh.nodes_per_element());
  Triplets tk, tc;
  Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(ne, ne), Ce = Ke;
  std::size_t cur_tri = static_cast<std::size_t>(-1);
  int cur_layer = -1;
  std::vector<int> cur_dofs;
  auto flush = [&]() {
    if (cur_layer < 0) return;
    Ke = 0.5 * (Ke + Ke.transpose()).eval();
    Ce = 0.5 * (Ce + Ce.transpose()).eval();
    for (Eigen::Index a = 0; a < ne; ++a) {
      const int ra = cur_dofs[static_cast<std::size_t>(a)];
      if (ra < 0) continue;
      for (Eigen::Index b = 0; b < ne; ++b) {
        const int rb = cur_dofs[static_cast<std::size_t>(b)];
        if (rb < 0) continue;
        tk.emplace_back(ra, rb, Ke(a, b));
        tc.emplace_back(ra, rb, Ce(a, b));
      }
    }
    Ke.setZero();
    Ce.setZero();
  };
  for_each_volume_point(sys, [&](const VolumeQuadPoint& qp) {
    if (qp.tri != cur_tri || qp.layer != cur_layer) {
      flush();
      cur_tri = qp.tri;
      cur_layer = qp.layer;
      cur_dofs = element_dofs(sys.dofs, *qp.nodes);
    }
    const Mat6X B = strain_B(qp, eps);
    const double w = qp.weight * qp.geom.sqrt_g;
    const Mat6 DA = voigt(tensor3d_elastic(qp.geom.metric_ctr, params));
    const Mat6 DB = voigt(tensor3d_viscous(qp.geom.metric_ctr, params));
    Ke.noalias() += w * B.transpose() * DA * B;
    Ce.noalias() += w * B.transpose() * DB * B;
  });
  flush();
  const Eigen::Index n = static_cast<Eigen::Index>(sys.dofs.n_free());
  sys.K.resize(n, n);
  sys.C.resize(n, n);
  sys.K.setFromTriplets(tk.begin(), tk.end());
  sys.C.setFromTriplets(tc.begin(), tc.end());
  sys.K.makeCompressed();
  sys.C.makeCompressed();
  return sys;
}

Eigen::VectorXd assemble_admissible_rhs(const ShellSystem3D& sys, const ForceSampler& F, double t) {
  Eigen::VectorXd L = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dofs.n_free()));
  std::vector<int> dofs;
  std::size_t cur_tri = static_cast<std::size_t>(-1);
  int cur_layer = -1;
  for_each_volume_point(sys, [&](const VolumeQuadPoint& qp) {
    if (qp.tri != cur_tri || qp.layer != cur_layer) {
      cur_tri = qp.tri;
      cur_layer = qp.layer;
      dofs = element_dofs(sys.dofs, *qp.nodes);
    }
    const Vec2& y = sys.surf.points[qp.surf_index].y;
    const Mat3 f = F(t, y, qp.x3);
    if (f.isZero(0.0)) return;
    const Eigen::VectorXd le = (qp.weight * qp.geom.sqrt_g) * (strain_B(qp, sys.eps).transpose() * voigt_stress_load(f));
    for (Eigen::Index a = 0; a < le.size(); ++a) {
      const int r = dofs[static_cast<std::size_t>(a)];
      if (r >= 0) L[r] += le[a];
    }
  });
  return L;
}

struct SPDSolver::Impl {
  Eigen::SimplicialLLT<SpMat> llt;
};

SPDSolver::SPDSolver(const SpMat& A) : impl_(std::make_unique<Impl>()) {
  impl_->llt.compute(A);
  if (impl_->llt.info() != Eigen::Success) throw NonSPDError("Cholesky factorization failed: matrix is not SPD");
}

SPDSolver::~SPDSolver() = default;

Eigen::VectorXd SPDSolver::solve(const Eigen::VectorXd& b) const { return impl_->llt.solve(b); }

const char* SPDSolver::backend() { return "eigen-simplicial-llt"; }

DisplacementHistory solve_3d(const ShellSystem3D& sys, const LoadSampler& load, const TimeGrid& grid,
                             const Eigen::VectorXd& u0) {
  if (static_cast<std::size_t>(u0.size()) != sys.dofs.n_full())
    throw std::invalid_argument("solve_3d: u0 must be a full nodal vector");
  const double dt = grid.dt();
  const SpMat A = (1.0 / dt) * sys.C + sys.K;
  std::unique_ptr<SPDSolver> solver;
  try {
    solver = std::make_unique<SPDSolver>(A);
  } catch (const NonSPDError& e) {
    std::ostringstream msg;
    msg << e.what() << " (C/dt + K at eps = " << sys.eps << ")";
    throw NonSPDError(msg.str());
  }
  DisplacementHistory h;
  Eigen::VectorXd u = sys.dofs.restrict(u0);
  auto record = [&](int n) {
    h.t.push_back(grid.t(n));
    h.energy.push_back(0.5 * u.dot(sys.K * u));
    h.u.push_back(sys.dofs.expand(u));
  };
  record(0);
  for (int n = 0; n < grid.N(); ++n) {
    const Eigen::VectorXd rhs = load(n + 1, grid.t(n + 1)) + (1.0 / dt) * (sys.C * u);
    u = solver->solve(rhs);
    record(n + 1);
  }
  return h;
}

std::vector<Mat3> strain_field(const ShellSystem3D& sys, const Eigen::VectorXd& u) {
  std::vector<Mat3> out;
  for_each_volume_point(sys, [&](const VolumeQuadPoint& qp) { out.push_back(scaled_strains(interpolate(qp, u), sys.eps, qp.geom)); });
  return out;
}

std::vector<Mat3> stress_recovery(const ShellSystem3D& sys, const DisplacementHistory& hist, const TimeGrid& grid,
                                  int n) {
  if (n < 0 || static_cast<std::size_t>(n) >= hist.u.size()) throw std::out_of_range("stress_recovery: bad time level");
  const Eigen::VectorXd& un = hist.u[static_cast<std::size_t>(n)];
  const Eigen::VectorXd* up = n > 0 ? &hist.u[static_cast<std::size_t>(n - 1)] : nullptr;
  std::vector<Mat3> out;
  for_each_volume_point(sys, [&](const VolumeQuadPoint& qp) {
    const Mat3 e = scaled_strains(interpolate(qp, un), sys.eps, qp.geom);
    Mat3 edot = Mat3::Zero();
    if (up) edot = (e - scaled_strains(interpolate(qp, *up), sys.eps, qp.geom)) / grid.dt();
    const Tensor3D A = tensor3d_elastic(qp.geom.metric_ctr, sys.params);
    const Tensor3D B = tensor3d_viscous(qp.geom.metric_ctr, sys.params);
    Mat3 s = Mat3::Zero();
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        double v = 0.0;
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) v += A(i, j, k, l) * e(k, l) + B(i, j, k, l) * edot(k, l);
        s(i, j) = s(j, i) = v;
      }
    out.push_back(s);
  });
  return out;
}

std::vector<Eigen::VectorXd> average_to_2d(const std::vector<Eigen::VectorXd>& history, const Mesh3D& mesh3d,
                                           const Mesh2D& mesh2d) {
  if (mesh2d.n_nodes() != mesh3d.base.n_nodes() || mesh2d.n_elements() != mesh3d.base.n_elements() ||
      mesh2d.node_clamped != mesh3d.base.node_clamped)
    throw std::invalid_argument("average_to_2d: 3D mesh is not an extrusion of the given 2D mesh");
  std::vector<Eigen::VectorXd> out;
  out.reserve(history.size());
  for (const auto& u : history) out.push_back(transversal_average(mesh3d, u));
  return out;
}

double d3_norm(const ShellSystem3D& sys, const Eigen::VectorXd& u) {
  double s = 0.0;
  for_each_volume_point(sys, [&](const VolumeQuadPoint& qp) { s += qp.weight * interpolate(qp, u).grad.col(2).squaredNorm(); });
  return std::sqrt(s);
}

double h1_norm(const ShellSystem3D& sys, const Eigen::VectorXd& u) {
  double s = 0.0;
  for_each_volume_point(sys, [&](const VolumeQuadPoint& qp) {
    const Jet3 j = interpolate(qp, u);
    s += qp.weight * (j.value.squaredNorm() + j.grad.squaredNorm());
  });
  return std::sqrt(s);
}

double strain_norm(const ShellSystem3D& sys, const Eigen::VectorXd& u) {
  double s = 0.0;
  for_each_volume_point(sys, [&](const VolumeQuadPoint& qp) {
    s += qp.weight * scaled_strains(interpolate(qp, u), sys.eps, qp.geom).squaredNorm();
  });
  return std::sqrt(s);
}

}  // namespace shellmem
