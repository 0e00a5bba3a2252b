#pragma once

// Independent checks for the sensitivity machinery: a closed-form isotropic
// Eshelby tensor, a finite-radius insertion probe that re-solves the FEM
// problem with an exactly blended disc, and a brute-force dense-angle argmin.
// None of these share code with the quadrature/table path beyond the tensor
// primitives, so agreement is evidence rather than tautology.

#include "fiberopt/fem2d.hpp"
#include "fiberopt/tensor2d.hpp"

namespace fiberopt {

/// Plane-stress interior Eshelby tensor of a circular inclusion in an
/// isotropic matrix: S = c1 (d x d) + c2 (d x d + d x d) with c1 = (3 nu - 1)/8
/// and c2 = (3 - nu)/8. Independent of the Young modulus.
Tensor4 eshelby_closed_form(double nu);

/// Exact area of the intersection of the disc (cx, cy, r) with the axis-
/// aligned rectangle [x0, x1] x [y0, y1].
double circle_rect_overlap(double cx, double cy, double r, double x0, double y0, double x1,
                           double y1);

struct DiscInsertion {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
  Tensor4 target;
};

/// Finite-radius topological-derivative quotient (J_eps - J) / (pi eps^2):
/// every element partially covered by the disc gets the exact area-fraction
/// blend between its baseline tensor and the target, and the system is
/// re-solved. Returns exactly 0 when no element tensor changes.
double fd_topological_derivative(ElasticitySolver& solver, const std::vector<Tensor4>& base_C,
                                 double base_J, const DiscInsertion& ins);

/// Brute-force optimal insertion angle: direct elastic-moment evaluation of
/// the compliance derivative at `resolution` equally spaced angles in [0, pi),
/// returning the argmin (smallest angle on ties). theta_bg orients a fiber
/// background and is ignored for isotropic backgrounds.
double dense_theta_argmin(const Strain2& E, Phase a, int resolution, const MaterialCatalog& cat,
                          double theta_bg = 0.0);

}  // namespace fiberopt
