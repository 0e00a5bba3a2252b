#include "fiberopt/xls.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fiberopt/errors.hpp"

namespace fiberopt {

PairRef pair_ref(Phase a, Phase b) {
  if (a == b) throw std::invalid_argument("level-set pair requires distinct phases");
  for (int p = 0; p < kNumPairs; ++p) {
    if (kPairA[p] == a && kPairB[p] == b) return {p, 1.0};
    if (kPairA[p] == b && kPairB[p] == a) return {p, -1.0};
  }
  throw std::invalid_argument("unknown phase pair");
}

double approx_heaviside(double s) {
  if (s < -1.0) return 0.0;
  if (s > 1.0) return 1.0;
  const double s2 = s * s;
  return 0.5 + s * (15.0 / 16.0 - s2 * (5.0 / 8.0 - s2 * 3.0 / 16.0));
}

std::array<double, 3> hard_characteristic_point(double p_vi, double p_vf, double p_if) {
  const double chi_v = hard_heaviside(p_vi) * hard_heaviside(p_vf);
  const double chi_i = hard_heaviside(-p_vi) * hard_heaviside(p_if);
  const double chi_f = hard_heaviside(-p_vf) * hard_heaviside(-p_if);
  return {chi_v, chi_i, chi_f};
}

std::array<std::vector<double>, 3> characteristic(const XlsState& state) {
  const int n = state.node_count();
  std::array<std::vector<double>, 3> out;
  for (auto& f : out) f.resize(n);
  for (int k = 0; k < n; ++k) {
    const auto c = hard_characteristic_point(state.phi[0][k], state.phi[1][k], state.phi[2][k]);
    out[0][k] = c[0];
    out[1][k] = c[1];
    out[2][k] = c[2];
  }
  return out;
}

std::array<double, 3> smoothed_characteristic_point(double p_vi, double p_vf, double p_if,
                                                    double w_m, double eps_chi) {
  const double h_vi = approx_heaviside(p_vi / w_m);
  const double h_vf = approx_heaviside(p_vf / w_m);
  const double h_if = approx_heaviside(p_if / w_m);
  const double raw[3] = {h_vi * h_vf, (1.0 - h_vi) * h_if, (1.0 - h_vf) * (1.0 - h_if)};
  double corr[3];
  for (int a = 0; a < 3; ++a) {
    double prod = 1.0;
    for (int b = 0; b < 3; ++b)
      if (b != a) prod *= 1.0 - raw[b];
    corr[a] = raw[a] + eps_chi * prod;
  }
  const double sum = corr[0] + corr[1] + corr[2];
  if (!(sum > 1e-300)) throw DegenerateFraction("smoothed fractions sum to zero");
  return {corr[0] / sum, corr[1] / sum, corr[2] / sum};
}

PhaseFractions smoothed_characteristic(const StructuredMesh& mesh, const XlsState& state,
                                       double w_m, double eps_chi) {
  if (state.node_count() != mesh.node_count())
    throw std::invalid_argument("level-set state sized for a different mesh");
  if (!(w_m > 0.0)) throw std::invalid_argument("characteristic bandwidth must be positive");
  PhaseFractions out;
  for (auto& f : out.chi) f.resize(mesh.elem_count());
  for (int e = 0; e < mesh.elem_count(); ++e) {
    const auto nd = mesh.elem_nodes(e);
    double p[kNumPairs];
    for (int q = 0; q < kNumPairs; ++q) {
      const auto& f = state.phi[q];
      p[q] = 0.25 * (f[nd[0]] + f[nd[1]] + f[nd[2]] + f[nd[3]]);
    }
    const auto c = smoothed_characteristic_point(p[0], p[1], p[2], w_m, eps_chi);
    out.chi[0][e] = c[0];
    out.chi[1][e] = c[1];
    out.chi[2][e] = c[2];
  }
  return out;
}

std::array<double, 3> project_point(double p_vi, double p_vf, double p_if) {
  // psi_a = product over b != a of (phi_ba + 1)/2; small psi means phase a is
  // strongly present. New pair value phi_ab = psi_b - psi_a.
  const double psi_v = 0.5 * (-p_vi + 1.0) * 0.5 * (-p_vf + 1.0);
  const double psi_i = 0.5 * (p_vi + 1.0) * 0.5 * (-p_if + 1.0);
  const double psi_f = 0.5 * (p_vf + 1.0) * 0.5 * (p_if + 1.0);
  return {psi_i - psi_v, psi_f - psi_v, psi_f - psi_i};
}

void project_constraint(XlsState& state) {
  const int n = state.node_count();
  for (int k = 0; k < n; ++k) {
    const auto p = project_point(state.phi[0][k], state.phi[1][k], state.phi[2][k]);
    state.phi[0][k] = p[0];
    state.phi[1][k] = p[1];
    state.phi[2][k] = p[2];
  }
}

void clamp_state(XlsState& state) {
  for (auto& f : state.phi)
    for (double& v : f) v = std::clamp(v, -1.0, 1.0);
}

double update_levelsets(XlsState& state, const StructuredMesh& mesh, HelmholtzSmoother& smoother,
                        const std::array<std::vector<double>, kNumPairs>& drive,
                        const LevelSetStep& step) {
  if (state.node_count() != mesh.node_count())
    throw std::invalid_argument("level-set state sized for a different mesh");
  const XlsState before = state;
  for (int q = 0; q < kNumPairs; ++q) {
    if (static_cast<int>(drive[q].size()) != mesh.elem_count())
      throw std::invalid_argument("drive field sized for a different mesh");
    if (!(step.alpha[q] > 0.0)) throw std::invalid_argument("step scale must be positive");
    const std::vector<double> g = element_to_node_average(mesh, drive[q]);
    std::vector<double> rhs(mesh.node_count());
    for (int k = 0; k < mesh.node_count(); ++k) rhs[k] = state.phi[q][k] - step.alpha[q] * g[k];
    state.phi[q] = smoother.solve(rhs, step.tau[q]);
  }
  clamp_state(state);
  // Repair rankings only where the hard partition actually fails (a cycle or
  // a tie). The pointwise map sends any state whose third phase is fully
  // defeated to a tie on the surviving pair, so applying it at every node
  // would erase settled two-phase competition each step instead of repairing
  // anything; consistent nodes keep their amplitudes.
  for (int k = 0; k < mesh.node_count(); ++k) {
    const auto h = hard_characteristic_point(state.phi[0][k], state.phi[1][k], state.phi[2][k]);
    if (h[0] + h[1] + h[2] == 1.0) continue;
    const auto p = project_point(state.phi[0][k], state.phi[1][k], state.phi[2][k]);
    state.phi[0][k] = p[0];
    state.phi[1][k] = p[1];
    state.phi[2][k] = p[2];
  }

  double max_dphi = 0.0;
  for (int q = 0; q < kNumPairs; ++q)
    for (int k = 0; k < mesh.node_count(); ++k)
      max_dphi = std::max(max_dphi, std::abs(state.phi[q][k] - before.phi[q][k]));
  return max_dphi;
}

}  // namespace fiberopt
