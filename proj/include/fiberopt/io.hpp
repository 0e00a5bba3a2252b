#pragma once

// Artifact writers: legacy-ASCII VTK snapshots of the design state, the
// per-step history CSV, and a plain-text design field format for file-based
// initial designs. All numeric output uses %.17g so identical states produce
// identical bytes.

#include <string>

#include "fiberopt/optimizer.hpp"

namespace fiberopt {

/// Unstructured-quad VTK snapshot. Cell data: chi_V, chi_I, chi_F, theta,
/// indeterminate, u_mag; point data: phi_VI, phi_VF, phi_IF, xi, eta.
void write_vtk_snapshot(const std::string& path, const IterateView& view);

/// Header: step,J_C,g_W,lambda,Lambda,max_dphi,wall_ms.
void write_history_csv(const std::string& path, const OptHistory& history);

/// Plain-text design fields: magic line, node count, then per node the three
/// pair values and the auxiliary orientation pair.
void save_design(const std::string& path, const Design& design);
Design load_design(const std::string& path, const StructuredMesh& mesh);

/// Creates the directory (and parents) if needed; IoError on failure.
void ensure_directory(const std::string& path);

}  // namespace fiberopt
