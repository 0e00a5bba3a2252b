#pragma once

// The outer optimization loop: Ersatz-blended compliance analysis, PID-driven
// weight multiplier, sensitivity sweep, orientation and level-set updates,
// windowed convergence detection, and the per-step history.

#include <functional>
#include <string>
#include <vector>

#include "fiberopt/config.hpp"
#include "fiberopt/orientation.hpp"
#include "fiberopt/topoderiv.hpp"
#include "fiberopt/xls.hpp"

namespace fiberopt {

struct PidGains {
  double k_p = 0.0;
  double k_d = 0.0;
  double k_ip = 0.0;
  double k_id = 0.0;
};

struct MultiplierState {
  double lambda = 0.0;
  double Lambda = 0.0;  // clamped integral accumulator
  double g_prev = 0.0;
};

/// One PID step: gdot = g - g_prev, Lambda' = max(Lambda + k_ip g + k_id gdot,
/// 0), lambda' = max(k_p g, 0) + k_d gdot + Lambda'.
MultiplierState update_multiplier(const MultiplierState& m, double g, const PidGains& gains);

/// The constrained objective driving both the sensitivities and the
/// convergence test.
inline double lagrangian(double J, double g, double lambda) { return J + lambda * g; }

struct HistoryRecord {
  int step = 0;
  double J_C = 0.0;
  double g_W = 0.0;
  double lambda = 0.0;
  double Lambda = 0.0;
  double max_dphi = 0.0;
  double wall_ms = 0.0;
};
using OptHistory = std::vector<HistoryRecord>;

enum class RunStatus { Converged, MaxIterations };

/// True iff the trailing window satisfies all three conditions: relative
/// Lagrangian variation below rel_tol, every |g_W| within feas_rel * w_max,
/// and every level-set step below field_tol.
bool check_convergence(const OptHistory& history, const ConvergenceSettings& conv, double w_max);

struct Design {
  XlsState phi;
  OrientationState aux;
};

/// Presets: A all-zero level sets and orientation; B full fiber along x;
/// C void lower half, fiber upper half; D full fiber oriented radially about
/// the domain center; E fiber/isotropic checkerboard.
Design initial_design(char preset, const StructuredMesh& mesh, int n_sym = 1);

/// Everything a snapshot writer needs about one accepted iterate.
struct IterateView {
  int step;
  const StructuredMesh& mesh;
  const Design& design;
  const PhaseFractions& fractions;
  const ElementOrientation& orientation;
  const SolveState& fem;
};
using SnapshotFn = std::function<void(const IterateView&)>;

struct RunResult {
  Design design;
  OptHistory history;
  RunStatus status = RunStatus::MaxIterations;
  double final_compliance = 0.0;
  double final_g = 0.0;
  PhaseFractions final_fractions;
  ElementOrientation final_orientation;
  SolveState final_fem;
};

/// Runs the loop from the config's initial-design preset. The snapshot
/// callback fires every snapshot_every steps and once on the final design.
RunResult run(const OptConfig& cfg, const SnapshotFn& snapshot = nullptr);

/// Same, from an explicitly provided initial design (used for file-based
/// starts and tests).
RunResult run(const OptConfig& cfg, Design start, const SnapshotFn& snapshot = nullptr);

/// Weight of the smoothed material distribution minus the bound.
double weight_violation(const StructuredMesh& mesh, const PhaseFractions& fr,
                        const MaterialParams& mat, double w_max);

}  // namespace fiberopt
