#pragma once

// Plane-stress FEM on the structured quad mesh (2x2 Gauss, bilinear shape
// functions, sparse direct factorization) and the screened-Poisson smoother
// used to regularize nodal update fields.
//
// Element stiffness batches and strain recovery exist in OpenMP and serial
// reference variants; both write to preallocated slots, so their outputs are
// bitwise identical regardless of thread count.

#include <Eigen/Sparse>
#include <array>
#include <map>
#include <memory>
#include <vector>

#include "fiberopt/mesh.hpp"
#include "fiberopt/tensor2d.hpp"

namespace fiberopt {

struct SolveState {
  std::vector<double> u;        // 2 dofs per node
  std::vector<Strain2> strain;  // element centroid strains
  double compliance = 0.0;      // external work f . u
  double u_K_u = 0.0;           // strain energy times 2, for self-adjointness checks
};

using ElemMatrix = std::array<double, 64>;  // row-major 8x8

/// Per-element stiffness batch: Ke = sum_gp w |J| B^T C B. OpenMP variant.
void element_stiffness_batch(const StructuredMesh& mesh, const std::vector<Tensor4>& C,
                             std::vector<ElemMatrix>& out);
/// Serial reference implementation with identical output.
void element_stiffness_batch_serial(const StructuredMesh& mesh, const std::vector<Tensor4>& C,
                                    std::vector<ElemMatrix>& out);

/// Element centroid strains from the displacement vector. OpenMP variant.
void strain_batch(const StructuredMesh& mesh, const std::vector<double>& u,
                  std::vector<Strain2>& out);
void strain_batch_serial(const StructuredMesh& mesh, const std::vector<double>& u,
                         std::vector<Strain2>& out);

class ElasticitySolver {
 public:
  ElasticitySolver(const StructuredMesh& mesh, const BoundaryConditions& bc);

  /// Assembles K from the per-element stiffness field, applies the Dirichlet
  /// data, factorizes, and solves. Throws std::invalid_argument when the mesh
  /// has no constrained dof or the field size mismatches; SolverFailure when
  /// the factorization reports a problem; InvalidMaterial when an element
  /// tensor is not positive definite.
  SolveState solve(const std::vector<Tensor4>& C, bool parallel = true);

  const StructuredMesh& mesh() const { return mesh_; }
  const BoundaryConditions& bc() const { return bc_; }

 private:
  StructuredMesh mesh_;
  BoundaryConditions bc_;
  std::vector<int> free_index_;  // dof -> reduced index or -1
  int n_free_ = 0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool pattern_analyzed_ = false;
  std::vector<ElemMatrix> ke_;  // reused batch buffer
};

/// One-shot convenience wrapper.
SolveState assemble_and_solve(const StructuredMesh& mesh, const std::vector<Tensor4>& C,
                              const BoundaryConditions& bc);

/// External work f . u for a state solved under the same conditions.
double compliance(const SolveState& state, const BoundaryConditions& bc);

/// Solves (M + tau L) w = M f with natural boundary conditions (consistent
/// mass M, Laplacian L). Preserves the M-weighted mean of f exactly; tau = 0
/// returns f unchanged. Factorizations are cached per tau.
class HelmholtzSmoother {
 public:
  explicit HelmholtzSmoother(const StructuredMesh& mesh);

  std::vector<double> solve(const std::vector<double>& f, double tau);

 private:
  StructuredMesh mesh_;
  Eigen::SparseMatrix<double> mass_;
  Eigen::SparseMatrix<double> laplace_;
  std::map<double, std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>> cache_;
};

}  // namespace fiberopt
