#include "fiberopt/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace fiberopt {

bool BoundaryConditions::any_fixed() const {
  return std::any_of(fixed.begin(), fixed.end(), [](std::uint8_t f) { return f != 0; });
}

void add_right_edge_traction(BoundaryConditions& bc, const StructuredMesh& mesh, double y0,
                             double y1, double tx, double ty) {
  // Integrate the constant traction against the linear edge shape functions
  // segment by segment; a partially covered segment contributes the exact
  // moments of the covered sub-interval.
  const double dy = mesh.dy();
  for (int ey = 0; ey < mesh.ny; ++ey) {
    const double a = ey * dy, b = a + dy;
    const double lo = std::max(a, y0), hi = std::min(b, y1);
    if (hi <= lo) continue;
    // Shape functions on the segment: N0 = (b - y)/dy, N1 = (y - a)/dy.
    const double len = hi - lo;
    const double mid = 0.5 * (lo + hi);
    const double w1 = len * (mid - a) / dy;  // integral of N1 over [lo, hi]
    const double w0 = len - w1;
    const int n0 = mesh.node_id(mesh.nx, ey);
    const int n1 = mesh.node_id(mesh.nx, ey + 1);
    bc.load[2 * n0 + 0] += tx * w0;
    bc.load[2 * n0 + 1] += ty * w0;
    bc.load[2 * n1 + 0] += tx * w1;
    bc.load[2 * n1 + 1] += ty * w1;
  }
}

BoundaryConditions cantilever_bc(const StructuredMesh& mesh, double load_height,
                                 double traction) {
  BoundaryConditions bc(mesh.node_count());
  for (int iy = 0; iy <= mesh.ny; ++iy) {
    const int n = mesh.node_id(0, iy);
    bc.fix_dof(n, 0);
    bc.fix_dof(n, 1);
  }
  const double y0 = 0.5 * (mesh.height - load_height);
  add_right_edge_traction(bc, mesh, y0, y0 + load_height, 0.0, -traction);
  return bc;
}

BoundaryConditions uniaxial_bc(const StructuredMesh& mesh, double t) {
  BoundaryConditions bc(mesh.node_count());
  for (int iy = 0; iy <= mesh.ny; ++iy) bc.fix_dof(mesh.node_id(0, iy), 0);
  bc.fix_dof(mesh.node_id(0, 0), 1);
  add_right_edge_traction(bc, mesh, 0.0, mesh.height, t, 0.0);
  return bc;
}

std::vector<double> element_to_node_average(const StructuredMesh& mesh,
                                            const std::vector<double>& elem_field) {
  std::vector<double> acc(mesh.node_count(), 0.0);
  std::vector<double> wsum(mesh.node_count(), 0.0);
  const double w = mesh.elem_area();
  for (int e = 0; e < mesh.elem_count(); ++e) {
    for (int n : mesh.elem_nodes(e)) {
      acc[n] += w * elem_field[e];
      wsum[n] += w;
    }
  }
  for (int n = 0; n < mesh.node_count(); ++n) acc[n] /= wsum[n];
  return acc;
}

std::vector<double> node_to_element_centroid(const StructuredMesh& mesh,
                                             const std::vector<double>& node_field) {
  std::vector<double> out(mesh.elem_count());
  for (int e = 0; e < mesh.elem_count(); ++e) {
    const auto nd = mesh.elem_nodes(e);
    out[e] = 0.25 * (node_field[nd[0]] + node_field[nd[1]] + node_field[nd[2]] + node_field[nd[3]]);
  }
  return out;
}

}  // namespace fiberopt
