#pragma once

#include <array>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "shellmem/geometry.hpp"

namespace shellmem {

// ---------------------------------------------------------------------------
// Quadrature

struct QuadRule1D {
  std::vector<double> points;   // on [-1, 1]
  std::vector<double> weights;  // sum = 2
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadRule1D gauss_legendre(int n);

struct TriangleQuadPoint {
  double xi, eta, weight;  // reference triangle (0,0)-(1,0)-(0,1), weights sum to 1/2
};

/// Symmetric 6-point rule, exact for degree 4.
const std::array<TriangleQuadPoint, 6>& triangle_rule6();

// ---------------------------------------------------------------------------
// Quadratic (6-node) triangle.  Local order: vertices 0,1,2 then midpoints of
// edges (0,1), (1,2), (2,0).

std::array<double, 6> p2_values(double xi, double eta);
/// Reference gradients: [node] -> (d/dxi, d/deta).
std::array<Vec2, 6> p2_gradients(double xi, double eta);

/// 1D Lagrange basis of the given order (1 or 2) on [-1, 1] with equispaced nodes.
std::vector<double> lagrange_values(int order, double s);
std::vector<double> lagrange_derivatives(int order, double s);

// ---------------------------------------------------------------------------
// Meshes

enum class Side { Left, Right, Bottom, Top };
Side parse_side(const std::string& name);
std::string side_name(Side s);

/// Quadratic triangle mesh of the parameter domain omega, with the boundary
/// split into a clamped part gamma_0 and a free part gamma_1.
struct Mesh2D {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 6>> triangles;
  std::vector<std::array<int, 3>> boundary_edges;  // (vertex, vertex, midpoint)
  std::vector<bool> boundary_edge_clamped;
  std::vector<bool> node_clamped;

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_elements() const { return triangles.size(); }
  bool has_clamped_boundary() const;

  /// Builds P2 connectivity from a linear triangulation of a polygon.  A boundary
  /// edge is clamped when `clamped(midpoint)` is true.
  static Mesh2D from_triangulation(const std::vector<Vec2>& vertices,
                                   const std::vector<std::array<int, 3>>& triangles,
                                   const std::function<bool(const Vec2&)>& clamped);

  /// Structured mesh of [lo, hi] with nx * ny cells, each split into two triangles.
  static Mesh2D rectangle(const Vec2& lo, const Vec2& hi, int nx, int ny, const std::set<Side>& clamped_sides);
};

/// Extrusion of a Mesh2D through x3 in [-1, 1] into prism elements with
/// `layers` layers and Lagrange order `order` (1 or 2) in x3.
struct Mesh3D {
  Mesh2D base;
  int layers = 4;
  int order = 2;
  std::vector<double> planes;  // x3 of each node plane

  Mesh3D(Mesh2D base_mesh, int layers, int order);

  std::size_t n_planes() const { return planes.size(); }
  std::size_t n_nodes() const { return planes.size() * base.n_nodes(); }
  std::size_t n_elements() const { return base.n_elements() * static_cast<std::size_t>(layers); }
  std::size_t nodes_per_element() const { return 6 * static_cast<std::size_t>(order + 1); }
  int node(std::size_t plane, std::size_t node2d) const {
    return static_cast<int>(plane * base.n_nodes() + node2d);
  }
  bool node_clamped(std::size_t n) const { return base.node_clamped[n % base.n_nodes()]; }
  /// Global node ids of element (tri, layer): plane-major, triangle-local minor.
  std::vector<int> element_nodes(std::size_t tri, int layer) const;
  double layer_bottom(int layer) const { return planes[static_cast<std::size_t>(layer * order)]; }
  double layer_height() const { return 2.0 / layers; }
};

}  // namespace shellmem
