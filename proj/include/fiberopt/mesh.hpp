#pragma once

// Structured rectangular grid of bilinear quads. Nodes are numbered row-major
// from the bottom-left corner; element e = ey*nx + ex owns the cell with lower
// left node (ex, ey). All elements are congruent rectangles.

#include <array>
#include <cstdint>
#include <vector>

namespace fiberopt {

struct StructuredMesh {
  double width = 2.0;
  double height = 1.0;
  int nx = 160;
  int ny = 80;

  int node_count() const { return (nx + 1) * (ny + 1); }
  int elem_count() const { return nx * ny; }
  double dx() const { return width / nx; }
  double dy() const { return height / ny; }
  double elem_area() const { return dx() * dy(); }

  int node_id(int ix, int iy) const { return iy * (nx + 1) + ix; }
  double node_x(int node) const { return (node % (nx + 1)) * dx(); }
  double node_y(int node) const { return (node / (nx + 1)) * dy(); }

  int elem_id(int ex, int ey) const { return ey * nx + ex; }
  /// Counter-clockwise corner nodes starting at the lower left.
  std::array<int, 4> elem_nodes(int e) const {
    const int ex = e % nx, ey = e / nx;
    const int n0 = node_id(ex, ey);
    return {n0, n0 + 1, n0 + nx + 2, n0 + nx + 1};
  }
  double elem_cx(int e) const { return (e % nx + 0.5) * dx(); }
  double elem_cy(int e) const { return (e / nx + 0.5) * dy(); }
};

/// Dirichlet data per dof plus assembled nodal loads (2 dofs per node, x then y).
struct BoundaryConditions {
  std::vector<std::uint8_t> fixed;   // size 2N, 1 = constrained
  std::vector<double> fixed_value;   // size 2N, prescribed displacement
  std::vector<double> load;          // size 2N, consistent nodal forces

  explicit BoundaryConditions(int node_count = 0)
      : fixed(2 * node_count, 0), fixed_value(2 * node_count, 0.0), load(2 * node_count, 0.0) {}

  void fix_dof(int node, int dof, double value = 0.0) {
    fixed[2 * node + dof] = 1;
    fixed_value[2 * node + dof] = value;
  }
  bool any_fixed() const;
};

/// Clamped left edge; downward unit-magnitude traction on a centered band of
/// the right edge of the given height (consistent nodal loads).
BoundaryConditions cantilever_bc(const StructuredMesh& mesh, double load_height,
                                 double traction = 1.0);

/// Rollers on the left edge (u_x = 0), bottom-left corner pinned in y, uniform
/// horizontal traction t on the whole right edge. Produces an exact uniform
/// uniaxial stress state on homogeneous material.
BoundaryConditions uniaxial_bc(const StructuredMesh& mesh, double t = 1.0);

/// Adds consistent nodal loads for a constant traction on the right-edge strip
/// y in [y0, y1] (per-segment trapezoid weights, partial segments included).
void add_right_edge_traction(BoundaryConditions& bc, const StructuredMesh& mesh, double y0,
                             double y1, double tx, double ty);

/// Area-weighted scatter of an element field to nodes (each node averages its
/// adjacent elements; uniform elements make the weights equal).
std::vector<double> element_to_node_average(const StructuredMesh& mesh,
                                            const std::vector<double>& elem_field);

/// Centroid value of a nodal field on each element (mean of the 4 corners).
std::vector<double> node_to_element_centroid(const StructuredMesh& mesh,
                                             const std::vector<double>& node_field);

}  // namespace fiberopt
