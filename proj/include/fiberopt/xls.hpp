#pragma once

// Extended level-set description of the three-phase layout: one nodal field
// per unordered phase pair, antisymmetric under argument swap. Hard and
// smoothed characteristic functions, the pairwise-consistency projection,
// clamping, and the regularized level-set update.

#include <array>
#include <vector>

#include "fiberopt/fem2d.hpp"
#include "fiberopt/mesh.hpp"
#include "fiberopt/tensor2d.hpp"

namespace fiberopt {

inline constexpr int kNumPairs = 3;

/// Canonical unordered pairs: 0 = (V,I), 1 = (V,F), 2 = (I,F).
inline constexpr Phase kPairA[kNumPairs] = {Phase::V, Phase::V, Phase::I};
inline constexpr Phase kPairB[kNumPairs] = {Phase::I, Phase::F, Phase::F};

/// Pair index and sign for an ordered phase pair: phi_ab = sign * field[index].
struct PairRef {
  int index;
  double sign;
};
PairRef pair_ref(Phase a, Phase b);

struct XlsState {
  std::vector<double> phi[kNumPairs];  // nodal, kPairA/kPairB order

  explicit XlsState(int node_count = 0) {
    for (auto& f : phi) f.assign(node_count, 0.0);
  }
  int node_count() const { return static_cast<int>(phi[0].size()); }

  /// phi_ab at a node, with the antisymmetric sign applied.
  double value(Phase a, Phase b, int node) const {
    const PairRef r = pair_ref(a, b);
    return r.sign * phi[r.index][node];
  }
};

/// Exact unit-step with H(0) = 1.
inline double hard_heaviside(double s) { return s >= 0.0 ? 1.0 : 0.0; }

/// Quintic C^1 regularized Heaviside: 0 below -1, 1 above 1, odd-symmetric
/// polynomial blend in between.
double approx_heaviside(double s);

/// Hard indicator triple (chi_V, chi_I, chi_F) from the three pair values at
/// one point.
std::array<double, 3> hard_characteristic_point(double p_vi, double p_vf, double p_if);

/// Nodal hard indicators for all three phases.
std::array<std::vector<double>, 3> characteristic(const XlsState& state);

/// Smoothed, normalized fraction triple at one point.
std::array<double, 3> smoothed_characteristic_point(double p_vi, double p_vf, double p_if,
                                                    double w_m, double eps_chi);

/// Per-element smoothed fractions; rows sum to 1.
struct PhaseFractions {
  std::vector<double> chi[3];

  int elem_count() const { return static_cast<int>(chi[0].size()); }
};

/// Evaluates the smoothed characteristics at element centroids (mean of the
/// four corner values per pair field).
PhaseFractions smoothed_characteristic(const StructuredMesh& mesh, const XlsState& state,
                                       double w_m, double eps_chi);

/// Pairwise-consistency projection at one point: psi_a multiplies (phi_ba+1)/2
/// over b != a; the new pair value is psi difference. Returns (p_vi, p_vf, p_if).
std::array<double, 3> project_point(double p_vi, double p_vf, double p_if);

/// Applies the projection at every node.
void project_constraint(XlsState& state);

/// Componentwise clamp of all pair fields to [-1, 1].
void clamp_state(XlsState& state);

struct LevelSetStep {
  double alpha[kNumPairs] = {0.0, 0.0, 0.0};  // step scales per pair
  double tau[kNumPairs] = {0.0, 0.0, 0.0};    // smoothing length-scale per pair
};

/// Regularized descent step: per pair, solve (Id + tau * screened operator)
/// phi_new = phi - alpha * drive with natural boundary conditions, then clamp
/// and project. The drive is a per-element field, averaged to nodes first.
/// Returns the max nodal |phi_new - phi_old| over all pairs.
double update_levelsets(XlsState& state, const StructuredMesh& mesh, HelmholtzSmoother& smoother,
                        const std::array<std::vector<double>, kNumPairs>& drive,
                        const LevelSetStep& step);

}  // namespace fiberopt
