#include "shellmem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace shellmem {

QuadRule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadRule1D r;
  r.points.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const double pi = std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    r.points[static_cast<std::size_t>(n - 1 - i)] = x;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

const std::array<TriangleQuadPoint, 6>& triangle_rule6() {
  static const std::array<TriangleQuadPoint, 6> rule = [] {
    const double a1 = 0.445948490915965, w1 = 0.223381589678011 / 2.0;
    const double a2 = 0.091576213509771, w2 = 0.109951743655322 / 2.0;
    return std::array<TriangleQuadPoint, 6>{{{a1, a1, w1},
                                             {1.0 - 2.0 * a1, a1, w1},
                                             {a1, 1.0 - 2.0 * a1, w1},
                                             {a2, a2, w2},
                                             {1.0 - 2.0 * a2, a2, w2},
                                             {a2, 1.0 - 2.0 * a2, w2}}};
  }();
  return rule;
}

std::array<double, 6> p2_values(double xi, double eta) {
  const double l1 = 1.0 - xi - eta, l2 = xi, l3 = eta;
  return {l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0), l3 * (2.0 * l3 - 1.0),
          4.0 * l1 * l2,         4.0 * l2 * l3,         4.0 * l3 * l1};
}

std::array<Vec2, 6> p2_gradients(double xi, double eta) {
  const double l1 = 1.0 - xi - eta, l2 = xi, l3 = eta;
  // dl1 = (-1,-1), dl2 = (1,0), dl3 = (0,1)
  return {Vec2(-(4.0 * l1 - 1.0), -(4.0 * l1 - 1.0)),
          Vec2(4.0 * l2 - 1.0, 0.0),
          Vec2(0.0, 4.0 * l3 - 1.0),
          Vec2(4.0 * (l1 - l2), -4.0 * l2),
          Vec2(4.0 * l3, 4.0 * l2),
          Vec2(-4.0 * l3, 4.0 * (l1 - l3))};
}

std::vector<double> lagrange_values(int order, double s) {
  if (order == 1) return {0.5 * (1.0 - s), 0.5 * (1.0 + s)};
  if (order == 2) return {0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)};
  throw std::invalid_argument("lagrange_values: order must be 1 or 2");
}

std::vector<double> lagrange_derivatives(int order, double s) {
  if (order == 1) return {-0.5, 0.5};
  if (order == 2) return {s - 0.5, -2.0 * s, s + 0.5};
  throw std::invalid_argument("lagrange_derivatives: order must be 1 or 2");
}

Side parse_side(const std::string& name) {
  if (name == "left") return Side::Left;
  if (name == "right") return Side::Right;
  if (name == "bottom") return Side::Bottom;
  if (name == "top") return Side::Top;
  throw std::invalid_argument("unknown boundary side '" + name + "' (expected left/right/bottom/top)");
}

std::string side_name(Side s) {
  switch (s) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "?";
}

bool Mesh2D::has_clamped_boundary() const {
  return std::any_of(boundary_edge_clamped.begin(), boundary_edge_clamped.end(), [](bool b) { return b; });
}

Mesh2D Mesh2D::from_triangulation(const std::vector<Vec2>& vertices,
                                  const std::vector<std::array<int, 3>>& tris,
                                  const std::function<bool(const Vec2&)>& clamped) {
  Mesh2D m;
  m.nodes = vertices;
  std::map<std::pair<int, int>, int> midpoint;
  std::map<std::pair<int, int>, int> edge_count;
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  auto mid = [&](int a, int b) {
    const auto k = key(a, b);
    ++edge_count[k];
    auto it = midpoint.find(k);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(m.nodes.size());
    m.nodes.push_back(0.5 * (vertices[static_cast<std::size_t>(a)] + vertices[static_cast<std::size_t>(b)]));
    midpoint.emplace(k, id);
    return id;
  };
  for (auto t : tris) {
    const Vec2 e1 = vertices[static_cast<std::size_t>(t[1])] - vertices[static_cast<std::size_t>(t[0])];
    const Vec2 e2 = vertices[static_cast<std::size_t>(t[2])] - vertices[static_cast<std::size_t>(t[0])];
    const double det = e1[0] * e2[1] - e1[1] * e2[0];
    if (det == 0.0) throw std::invalid_argument("degenerate triangle in triangulation");
    if (det < 0.0) std::swap(t[1], t[2]);
    const int m01 = mid(t[0], t[1]);
    const int m12 = mid(t[1], t[2]);
    const int m20 = mid(t[2], t[0]);
    m.triangles.push_back({t[0], t[1], t[2], m01, m12, m20});
  }
  m.node_clamped.assign(m.nodes.size(), false);
  for (const auto& t : m.triangles) {
    const std::array<std::array<int, 3>, 3> edges = {{{t[0], t[1], t[3]}, {t[1], t[2], t[4]}, {t[2], t[0], t[5]}}};
    for (const auto& e : edges) {
      if (edge_count[key(e[0], e[1])] != 1) continue;
      const bool c = clamped(m.nodes[static_cast<std::size_t>(e[2])]);
      m.boundary_edges.push_back(e);
      m.boundary_edge_clamped.push_back(c);
      if (c)
        for (int n : e) m.node_clamped[static_cast<std::size_t>(n)] = true;
    }
  }
  return m;
}

Mesh2D Mesh2D::rectangle(const Vec2& lo, const Vec2& hi, int nx, int ny, const std::set<Side>& clamped_sides) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("rectangle mesh needs nx, ny >= 1");
  if (!(hi[0] > lo[0] && hi[1] > lo[1])) throw std::invalid_argument("rectangle mesh needs hi > lo");
  std::vector<Vec2> verts;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      verts.emplace_back(lo[0] + (hi[0] - lo[0]) * i / nx, lo[1] + (hi[1] - lo[1]) * j / ny);
  std::vector<std::array<int, 3>> tris;
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  const double tol = 1e-12 * std::max(hi[0] - lo[0], hi[1] - lo[1]);
  return from_triangulation(verts, tris, [&](const Vec2& p) {
    return (clamped_sides.count(Side::Left) && std::abs(p[0] - lo[0]) < tol) ||
           (clamped_sides.count(Side::Right) && std::abs(p[0] - hi[0]) < tol) ||
           (clamped_sides.count(Side::Bottom) && std::abs(p[1] - lo[1]) < tol) ||
           (clamped_sides.count(Side::Top) && std::abs(p[1] - hi[1]) < tol);
  });
}

Mesh3D::Mesh3D(Mesh2D base_mesh, int n_layers, int p) : base(std::move(base_mesh)), layers(n_layers), order(p) {
  if (layers < 1) throw std::invalid_argument("Mesh3D needs at least one layer");
  if (order != 1 && order != 2) throw std::invalid_argument("Mesh3D thickness order must be 1 or 2");
  const int n = layers * order;
  for (int k = 0; k <= n; ++k) planes.push_back(-1.0 + 2.0 * k / n);
}

std::vector<int> Mesh3D::element_nodes(std::size_t tri, int layer) const {
  std::vector<int> out;
  out.reserve(nodes_per_element());
  const auto& t = base.triangles[tri];
  for (int lp = 0; lp <= order; ++lp) {
    const std::size_t plane = static_cast<std::size_t>(layer * order + lp);
    for (int a = 0; a < 6; ++a) out.push_back(node(plane, static_cast<std::size_t>(t[static_cast<std::size_t>(a)])));
  }
  return out;
}

}  // namespace shellmem
