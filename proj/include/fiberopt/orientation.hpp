#pragma once

// Fiber orientation carried by the nodal auxiliary pair (xi, eta) ~
// (cos 2theta, sin 2theta) scaled by local fiber presence. The doubled angle
// makes the representation consistent with the material's head-tail symmetry.

#include <cstdint>
#include <vector>

#include "fiberopt/fem2d.hpp"
#include "fiberopt/mesh.hpp"

namespace fiberopt {

struct OrientationState {
  std::vector<double> xi;
  std::vector<double> eta;
  int n_sym = 1;

  explicit OrientationState(int node_count = 0, int n_sym_ = 1)
      : xi(node_count, 0.0), eta(node_count, 0.0), n_sym(n_sym_) {}
  int node_count() const { return static_cast<int>(xi.size()); }
};

struct ThetaValue {
  double theta = 0.0;
  bool indeterminate = false;
};

/// Angle in [0, pi) recovered from the auxiliary pair; the exact zero vector
/// is flagged indeterminate (angle reported as 0).
ThetaValue theta_from_aux(double xi, double eta);

struct ElementOrientation {
  std::vector<double> theta;
  std::vector<std::uint8_t> indeterminate;
};

/// Centroid (xi, eta) per element -> angle plus an indeterminate flag for
/// elements whose squared auxiliary magnitude falls below the threshold.
ElementOrientation element_orientation(const StructuredMesh& mesh, const OrientationState& state,
                                       double indeterminate_threshold = 0.05);

/// Radial projection of any nodal auxiliary pair outside the unit disc back
/// onto its boundary.
void project_unit_disc(OrientationState& state);

/// Relaxation toward the per-element targets (chi_F cos 2theta*, chi_F sin
/// 2theta*): element targets are averaged to nodes, blended with weight alpha,
/// regularized by the screened-Poisson smoother, then disc-projected.
void update_orientation(OrientationState& state, const StructuredMesh& mesh,
                        HelmholtzSmoother& smoother, const std::vector<double>& theta_star,
                        const std::vector<double>& chi_f, double alpha, double tau);

}  // namespace fiberopt
