#include "fiberopt/orientation.hpp"

#include <cmath>
#include <stdexcept>

namespace fiberopt {

ThetaValue theta_from_aux(double xi, double eta) {
  if (xi == 0.0 && eta == 0.0) return {0.0, true};
  double theta = 0.5 * std::atan2(eta, xi);
  if (theta < 0.0) theta += M_PI;
  return {theta, false};
}

ElementOrientation element_orientation(const StructuredMesh& mesh, const OrientationState& state,
                                       double indeterminate_threshold) {
  if (state.node_count() != mesh.node_count())
    throw std::invalid_argument("orientation state sized for a different mesh");
  ElementOrientation out;
  out.theta.resize(mesh.elem_count());
  out.indeterminate.resize(mesh.elem_count());
  for (int e = 0; e < mesh.elem_count(); ++e) {
    const auto nd = mesh.elem_nodes(e);
    const double xi =
        0.25 * (state.xi[nd[0]] + state.xi[nd[1]] + state.xi[nd[2]] + state.xi[nd[3]]);
    const double eta =
        0.25 * (state.eta[nd[0]] + state.eta[nd[1]] + state.eta[nd[2]] + state.eta[nd[3]]);
    const ThetaValue t = theta_from_aux(xi, eta);
    out.theta[e] = t.theta;
    out.indeterminate[e] =
        (t.indeterminate || xi * xi + eta * eta < indeterminate_threshold) ? 1 : 0;
  }
  return out;
}

void project_unit_disc(OrientationState& state) {
  for (int k = 0; k < state.node_count(); ++k) {
    const double r2 = state.xi[k] * state.xi[k] + state.eta[k] * state.eta[k];
    if (r2 > 1.0) {
      const double inv = 1.0 / std::sqrt(r2);
      state.xi[k] *= inv;
      state.eta[k] *= inv;
    }
  }
}

void update_orientation(OrientationState& state, const StructuredMesh& mesh,
                        HelmholtzSmoother& smoother, const std::vector<double>& theta_star,
                        const std::vector<double>& chi_f, double alpha, double tau) {
  if (state.node_count() != mesh.node_count())
    throw std::invalid_argument("orientation state sized for a different mesh");
  if (static_cast<int>(theta_star.size()) != mesh.elem_count() ||
      static_cast<int>(chi_f.size()) != mesh.elem_count())
    throw std::invalid_argument("target fields sized for a different mesh");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("orientation step weight must lie in (0, 1]");

  std::vector<double> tgt_xi(mesh.elem_count()), tgt_eta(mesh.elem_count());
  for (int e = 0; e < mesh.elem_count(); ++e) {
    tgt_xi[e] = chi_f[e] * std::cos(2.0 * theta_star[e]);
    tgt_eta[e] = chi_f[e] * std::sin(2.0 * theta_star[e]);
  }
  const std::vector<double> node_xi = element_to_node_average(mesh, tgt_xi);
  const std::vector<double> node_eta = element_to_node_average(mesh, tgt_eta);

  std::vector<double> rhs_xi(mesh.node_count()), rhs_eta(mesh.node_count());
  for (int k = 0; k < mesh.node_count(); ++k) {
    rhs_xi[k] = (1.0 - alpha) * state.xi[k] + alpha * node_xi[k];
    rhs_eta[k] = (1.0 - alpha) * state.eta[k] + alpha * node_eta[k];
  }
  state.xi = smoother.solve(rhs_xi, tau);
  state.eta = smoother.solve(rhs_eta, tau);
  project_unit_disc(state);
}

}  // namespace fiberopt
