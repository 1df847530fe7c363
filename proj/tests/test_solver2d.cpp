#include <cmath>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "shellmem/solver2d.hpp"

using namespace shellmem;

namespace {

Mesh2D single_triangle() {
  return Mesh2D::from_triangulation({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{0, 1, 2}},
                                    [](const Vec2&) { return false; });
}

Eigen::VectorXd zeros(const Mesh2D& m) { return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * m.n_nodes())); }

PhiSampler uniform_phi(const MembraneSystem& ms, const Mat2& phi, double (*profile)(double)) {
  return [n = ms.quad.points.size(), phi, profile](int, double t) { return std::vector<Mat2>(n, profile(t) * phi); };
}

double one(double) { return 1.0; }

}  // namespace

TEST(AssembleMembrane, SingleElementAgainstDenseOracle) {
  const Mesh2D mesh = single_triangle();
  ASSERT_EQ(mesh.n_nodes(), 6u);
  const MembraneSystem ms = assemble_membrane(mesh, PlaneChart(), MaterialParams(0.0, 1.0, 1.0, 1.0));
  std::array<Vec2, 6> nodes;
  for (int i = 0; i < 6; ++i) nodes[static_cast<std::size_t>(i)] = mesh.nodes[static_cast<std::size_t>(mesh.triangles[0][static_cast<std::size_t>(i)])];
  const oracle::P2Basis basis(nodes);

  // identity metric, lambda = 0, mu = theta = rho = 1: a gamma.gamma = (tr gamma)^2 + 4 gamma:gamma
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(18, 18);
  for (const auto& qp : oracle::triangle_rule()) {
    std::array<Mat2, 18> g;
    for (int a = 0; a < 6; ++a)
      for (int c = 0; c < 3; ++c) {
        Mat2 m = Mat2::Zero();
        if (c < 2) {
          const Vec2 d = basis.grad(a, qp.y);
          m.row(c) += 0.5 * d.transpose();
          m.col(c) += 0.5 * d;
        }
        g[static_cast<std::size_t>(3 * a + c)] = m;
      }
    for (int i = 0; i < 18; ++i)
      for (int j = 0; j < 18; ++j) {
        const Mat2& gi = g[static_cast<std::size_t>(i)];
        const Mat2& gj = g[static_cast<std::size_t>(j)];
        K(i, j) += qp.w * (gi.trace() * gj.trace() + 4.0 * (gi.array() * gj.array()).sum());
      }
  }
  // oracle is in local ordering; map to global dof numbers
  Eigen::MatrixXd Kg = Eigen::MatrixXd::Zero(18, 18);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d)
          Kg(3 * mesh.triangles[0][static_cast<std::size_t>(a)] + c, 3 * mesh.triangles[0][static_cast<std::size_t>(b)] + d) =
              K(3 * a + c, 3 * b + d);
  EXPECT_LT((Eigen::MatrixXd(ms.Ka) - Kg).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AssembleMembrane, SymmetricPositiveSemidefinite) {
  const Mesh2D mesh = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {Side::Bottom});
  const MembraneSystem ms = assemble_membrane(mesh, HyparChart(0.5), MaterialParams(1, 1, 1, 1));
  EXPECT_LT(SpMat(ms.Ka - SpMat(ms.Ka.transpose())).norm(), 1e-12);
  EXPECT_GT(smallest_eigenvalue_dense(ms.Ka), -1e-12 * ms.Ka.norm());
  EXPECT_GT(smallest_eigenvalue_dense(ms.M), 0.0);
}

TEST(AssembleMembrane, InPlaneRotationInKernel) {
  const Mesh2D mesh = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {});
  const MembraneSystem ms = assemble_membrane(mesh, PlaneChart(), MaterialParams(0.0, 1.0, 1.0, 1.0));
  Eigen::VectorXd x = zeros(mesh);
  for (std::size_t n = 0; n < mesh.n_nodes(); ++n) {
    x[static_cast<Eigen::Index>(3 * n)] = mesh.nodes[n][1];
    x[static_cast<Eigen::Index>(3 * n + 1)] = -mesh.nodes[n][0];
  }
  EXPECT_LE(membrane_energy_quadrature(ms, x), 1e-20);
  const Eigen::VectorXd xf = ms.dofs.restrict(x);
  EXPECT_LE(xf.dot(ms.Ka * xf), 1e-14 * ms.Ka.norm() * xf.squaredNorm());
}

TEST(MembraneEnergy, MatchesAssembledForm) {
  const Mesh2D mesh = Mesh2D::rectangle({0, 0}, {1, 1}, 2, 2, {Side::Left});
  const MembraneSystem ms = assemble_membrane(mesh, CylinderChart(1.0), MaterialParams(1, 1, 1, 1));
  Eigen::VectorXd x = zeros(mesh);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::sin(0.7 * static_cast<double>(i));
  x = ms.dofs.expand(ms.dofs.restrict(x));
  const Eigen::VectorXd xf = ms.dofs.restrict(x);
  EXPECT_NEAR(membrane_energy_quadrature(ms, x), xf.dot(ms.Ka * xf), 1e-10);
}

TEST(KernelDiagnostic, Classification) {
  const MaterialParams p(1, 1, 1, 1);
  const Mesh2D curved_edge = Mesh2D::rectangle({0, 0}, {1, 1}, 4, 4, {Side::Bottom});
  EXPECT_EQ(kernel_diagnostic(assemble_membrane(curved_edge, CylinderChart(1.0), p)).kind, ShellKind::FirstKind);
  const Mesh2D left = Mesh2D::rectangle({0, 0}, {1, 1}, 4, 4, {Side::Left});
  EXPECT_EQ(kernel_diagnostic(assemble_membrane(left, PlaneChart(), p)).kind, ShellKind::Degenerate);
  const Mesh2D all = Mesh2D::rectangle({0, 0}, {1, 1}, 4, 4, {Side::Left, Side::Right, Side::Bottom, Side::Top});
  EXPECT_EQ(kernel_diagnostic(assemble_membrane(all, PlaneChart(), p)).kind, ShellKind::Degenerate);
  EXPECT_EQ(kernel_diagnostic(assemble_membrane(all, EllipticCapChart(0.5), p)).kind, ShellKind::FirstKind);
}

TEST(KernelDiagnostic, CylinderClampedOnGeneratorIsDegenerate) {
  // xi = (-int f, 0, f(y1)) has gamma = 0 on the unit cylinder, so clamping a
  // generator leaves inextensional motions.
  const Mesh2D gen = Mesh2D::rectangle({0, 0}, {1, 1}, 4, 4, {Side::Left});
  const MembraneSystem ms = assemble_membrane(gen, CylinderChart(1.0), MaterialParams(1, 1, 1, 1));
  EXPECT_EQ(kernel_diagnostic(ms).kind, ShellKind::Degenerate);
  Eigen::VectorXd x = zeros(gen);
  for (std::size_t n = 0; n < gen.n_nodes(); ++n) {
    const double y1 = gen.nodes[n][0];
    x[static_cast<Eigen::Index>(3 * n)] = -0.5 * y1 * y1;  // f = y1
    x[static_cast<Eigen::Index>(3 * n + 2)] = y1;
  }
  EXPECT_LT(membrane_energy_quadrature(ms, x), 1e-20);
}

TEST(KernelDiagnostic, DenseAgreement) {
  const Mesh2D mesh = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {Side::Bottom});
  const MembraneSystem ms = assemble_membrane(mesh, CylinderChart(1.0), MaterialParams(1, 1, 1, 1));
  EXPECT_NEAR(kernel_diagnostic(ms).sigma_min, smallest_eigenvalue_dense(ms.Ka), 1e-8);
}

TEST(SolveMembrane, ZeroDataGivesZero) {
  const Mesh2D mesh = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {Side::Bottom});
  const MembraneSystem ms = assemble_membrane(mesh, CylinderChart(1.0), MaterialParams(1, 1, 1, 1));
  const auto h = solve_membrane(ms, uniform_phi(ms, Mat2::Zero(), one), TimeGrid(1.0, 5), zeros(mesh));
  ASSERT_EQ(h.u.size(), 6u);
  for (const auto& u : h.u) EXPECT_EQ(u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SolveMembrane, ClampedDofsStayZero) {
  const Mesh2D mesh = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {Side::Bottom});
  const MembraneSystem ms = assemble_membrane(mesh, CylinderChart(1.0), MaterialParams(1, 1, 1, 1));
  const auto h = solve_membrane(ms, uniform_phi(ms, Mat2::Identity(), one), TimeGrid(1.0, 5), zeros(mesh));
  for (std::size_t n = 0; n < mesh.n_nodes(); ++n)
    if (mesh.node_clamped[n]) EXPECT_EQ(h.u.back().segment<3>(static_cast<Eigen::Index>(3 * n)).norm(), 0.0);
  EXPECT_GT(h.u.back().norm(), 0.0);
}

TEST(SolveDescaled, ScalingIdentities) {
  const Mesh2D mesh = Mesh2D::rectangle({0, 0}, {1, 1}, 3, 3, {Side::Bottom});
  const MembraneSystem ms = assemble_membrane(mesh, CylinderChart(1.0), MaterialParams(1, 1, 1, 1));
  const TimeGrid g(1.0, 6);
  Mat2 phi;
  phi << 1.0, 0.2, 0.2, -0.5;
  const auto ref = solve_membrane(ms, uniform_phi(ms, phi, one), g, zeros(mesh));
  const auto same = solve_descaled(ms, uniform_phi(ms, phi, one), 1.0, g, zeros(mesh));
  const auto scaled = solve_descaled(ms, uniform_phi(ms, 0.1 * phi, one), 0.1, g, zeros(mesh));
  const auto unscaled = solve_descaled(ms, uniform_phi(ms, phi, one), 0.1, g, zeros(mesh));
  const double s = ref.u.back().cwiseAbs().maxCoeff();
  for (std::size_t n = 0; n < ref.u.size(); ++n) {
    EXPECT_LE((same.u[n] - ref.u[n]).cwiseAbs().maxCoeff(), 1e-12 * s);
    EXPECT_LE((scaled.u[n] - ref.u[n]).cwiseAbs().maxCoeff(), 1e-10 * s);
    EXPECT_LE((unscaled.u[n] - 10.0 * ref.u[n]).cwiseAbs().maxCoeff(), 1e-10 * 10.0 * s);
  }
}
