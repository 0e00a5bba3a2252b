#include "fiberopt/fem2d.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fiberopt/errors.hpp"

namespace fiberopt {

namespace {

// Shape-function derivative tables for the congruent rectangle: B matrices at
// the four 2x2 Gauss points and at the centroid, plus the Jacobian weight.
struct QuadBasis {
  double B[4][3][8];
  double B0[3][8];
  double detJ;
};

QuadBasis make_basis(const StructuredMesh& mesh) {
  static const double xi_n[4] = {-1.0, 1.0, 1.0, -1.0};
  static const double eta_n[4] = {-1.0, -1.0, 1.0, 1.0};
  const double g = 1.0 / std::sqrt(3.0);
  const double gp[4][2] = {{-g, -g}, {g, -g}, {g, g}, {-g, g}};

  QuadBasis basis;
  basis.detJ = 0.25 * mesh.dx() * mesh.dy();
  auto fill = [&](double xi, double eta, double B[3][8]) {
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 8; ++c) B[a][c] = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double dNdxi = 0.25 * xi_n[i] * (1.0 + eta * eta_n[i]);
      const double dNdeta = 0.25 * eta_n[i] * (1.0 + xi * xi_n[i]);
      const double dNdx = dNdxi * 2.0 / mesh.dx();
      const double dNdy = dNdeta * 2.0 / mesh.dy();
      B[0][2 * i + 0] = dNdx;
      B[1][2 * i + 1] = dNdy;
      B[2][2 * i + 0] = dNdy;
      B[2][2 * i + 1] = dNdx;
    }
  };
  for (int q = 0; q < 4; ++q) fill(gp[q][0], gp[q][1], basis.B[q]);
  fill(0.0, 0.0, basis.B0);
  return basis;
}

inline void element_ke(const QuadBasis& basis, const Tensor4& C, ElemMatrix& ke) {
  const Eigen::Matrix3d Cv = C.voigt();
  ke.fill(0.0);
  for (int q = 0; q < 4; ++q) {
    const auto& B = basis.B[q];
    double CB[3][8];
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 8; ++c)
        CB[a][c] = Cv(a, 0) * B[0][c] + Cv(a, 1) * B[1][c] + Cv(a, 2) * B[2][c];
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c)
        ke[8 * r + c] += basis.detJ * (B[0][r] * CB[0][c] + B[1][r] * CB[1][c] + B[2][r] * CB[2][c]);
  }
}

inline void element_strain(const QuadBasis& basis, const StructuredMesh& mesh,
                           const std::vector<double>& u, int e, Strain2& out) {
  const auto nd = mesh.elem_nodes(e);
  double ue[8];
  for (int i = 0; i < 4; ++i) {
    ue[2 * i + 0] = u[2 * nd[i] + 0];
    ue[2 * i + 1] = u[2 * nd[i] + 1];
  }
  double eps[3] = {0.0, 0.0, 0.0};
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 8; ++c) eps[a] += basis.B0[a][c] * ue[c];
  out.xx = eps[0];
  out.yy = eps[1];
  out.xy = 0.5 * eps[2];
}

bool positive_definite_voigt(const Tensor4& C) {
  // Sylvester minors of the symmetrized Mandel matrix.
  const Eigen::Matrix3d M0 = C.mandel();
  const Eigen::Matrix3d S = 0.5 * (M0 + M0.transpose());
  if (!(S(0, 0) > 0.0)) return false;
  if (!(S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0) > 0.0)) return false;
  return S.determinant() > 0.0;
}

}  // namespace

void element_stiffness_batch(const StructuredMesh& mesh, const std::vector<Tensor4>& C,
                             std::vector<ElemMatrix>& out) {
  const QuadBasis basis = make_basis(mesh);
  out.resize(mesh.elem_count());
  const int n = mesh.elem_count();
#pragma omp parallel for schedule(static)
  for (int e = 0; e < n; ++e) element_ke(basis, C[e], out[e]);
}

void element_stiffness_batch_serial(const StructuredMesh& mesh, const std::vector<Tensor4>& C,
                                    std::vector<ElemMatrix>& out) {
  const QuadBasis basis = make_basis(mesh);
  out.resize(mesh.elem_count());
  for (int e = 0; e < mesh.elem_count(); ++e) element_ke(basis, C[e], out[e]);
}

void strain_batch(const StructuredMesh& mesh, const std::vector<double>& u,
                  std::vector<Strain2>& out) {
  const QuadBasis basis = make_basis(mesh);
  out.resize(mesh.elem_count());
  const int n = mesh.elem_count();
#pragma omp parallel for schedule(static)
  for (int e = 0; e < n; ++e) element_strain(basis, mesh, u, e, out[e]);
}

void strain_batch_serial(const StructuredMesh& mesh, const std::vector<double>& u,
                         std::vector<Strain2>& out) {
  const QuadBasis basis = make_basis(mesh);
  out.resize(mesh.elem_count());
  for (int e = 0; e < mesh.elem_count(); ++e) element_strain(basis, mesh, u, e, out[e]);
}

ElasticitySolver::ElasticitySolver(const StructuredMesh& mesh, const BoundaryConditions& bc)
    : mesh_(mesh), bc_(bc) {
  if (!bc_.any_fixed())
    throw std::invalid_argument("elasticity solve requires at least one constrained dof");
  const int ndof = 2 * mesh_.node_count();
  if (static_cast<int>(bc_.fixed.size()) != ndof)
    throw std::invalid_argument("boundary condition arrays sized for a different mesh");
  free_index_.assign(ndof, -1);
  for (int d = 0; d < ndof; ++d)
    if (!bc_.fixed[d]) free_index_[d] = n_free_++;
}

SolveState ElasticitySolver::solve(const std::vector<Tensor4>& C, bool parallel) {
  if (static_cast<int>(C.size()) != mesh_.elem_count())
    throw std::invalid_argument("stiffness field size does not match element count");
  for (int e = 0; e < mesh_.elem_count(); ++e) {
    if (!positive_definite_voigt(C[e]))
      throw InvalidMaterial("element " + std::to_string(e) + " stiffness not positive definite");
  }

  if (parallel)
    element_stiffness_batch(mesh_, C, ke_);
  else
    element_stiffness_batch_serial(mesh_, C, ke_);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(mesh_.elem_count()) * 64);
  Eigen::VectorXd rhs(n_free_);
  for (int d = 0; d < 2 * mesh_.node_count(); ++d)
    if (free_index_[d] >= 0) rhs(free_index_[d]) = bc_.load[d];

  for (int e = 0; e < mesh_.elem_count(); ++e) {
    const auto nd = mesh_.elem_nodes(e);
    int gdof[8];
    for (int i = 0; i < 4; ++i) {
      gdof[2 * i + 0] = 2 * nd[i] + 0;
      gdof[2 * i + 1] = 2 * nd[i] + 1;
    }
    const ElemMatrix& ke = ke_[e];
    for (int r = 0; r < 8; ++r) {
      const int gr = free_index_[gdof[r]];
      if (gr < 0) continue;
      for (int c = 0; c < 8; ++c) {
        const int gc = gdof[c];
        if (free_index_[gc] >= 0) {
          triplets.emplace_back(gr, free_index_[gc], ke[8 * r + c]);
        } else if (bc_.fixed_value[gc] != 0.0) {
          rhs(gr) -= ke[8 * r + c] * bc_.fixed_value[gc];
        }
      }
    }
  }

  Eigen::SparseMatrix<double> K(n_free_, n_free_);
  K.setFromTriplets(triplets.begin(), triplets.end());
  if (!pattern_analyzed_) {
    ldlt_.analyzePattern(K);
    pattern_analyzed_ = true;
  }
  ldlt_.factorize(K);
  if (ldlt_.info() != Eigen::Success) throw SolverFailure("stiffness factorization failed");
  Eigen::VectorXd x = ldlt_.solve(rhs);
  if (ldlt_.info() != Eigen::Success) throw SolverFailure("stiffness back-substitution failed");

  SolveState state;
  state.u.assign(2 * mesh_.node_count(), 0.0);
  for (int d = 0; d < 2 * mesh_.node_count(); ++d)
    state.u[d] = free_index_[d] >= 0 ? x(free_index_[d]) : bc_.fixed_value[d];

  if (parallel)
    strain_batch(mesh_, state.u, state.strain);
  else
    strain_batch_serial(mesh_, state.u, state.strain);

  state.compliance = compliance(state, bc_);
  double uku = 0.0;
  for (int e = 0; e < mesh_.elem_count(); ++e) {
    const auto nd = mesh_.elem_nodes(e);
    double ue[8];
    for (int i = 0; i < 4; ++i) {
      ue[2 * i + 0] = state.u[2 * nd[i] + 0];
      ue[2 * i + 1] = state.u[2 * nd[i] + 1];
    }
    const ElemMatrix& ke = ke_[e];
    for (int r = 0; r < 8; ++r) {
      double acc = 0.0;
      for (int c = 0; c < 8; ++c) acc += ke[8 * r + c] * ue[c];
      uku += ue[r] * acc;
    }
  }
  state.u_K_u = uku;
  return state;
}

SolveState assemble_and_solve(const StructuredMesh& mesh, const std::vector<Tensor4>& C,
                              const BoundaryConditions& bc) {
  ElasticitySolver solver(mesh, bc);
  return solver.solve(C);
}

double compliance(const SolveState& state, const BoundaryConditions& bc) {
  double j = 0.0;
  for (size_t d = 0; d < state.u.size(); ++d) j += bc.load[d] * state.u[d];
  return j;
}

HelmholtzSmoother::HelmholtzSmoother(const StructuredMesh& mesh) : mesh_(mesh) {
  // Tensor-product bilinear mass and Laplacian on the congruent rectangle.
  const double a = mesh.dx(), b = mesh.dy();
  const double Mx[2][2] = {{a / 3.0, a / 6.0}, {a / 6.0, a / 3.0}};
  const double My[2][2] = {{b / 3.0, b / 6.0}, {b / 6.0, b / 3.0}};
  const double Sx[2][2] = {{1.0 / a, -1.0 / a}, {-1.0 / a, 1.0 / a}};
  const double Sy[2][2] = {{1.0 / b, -1.0 / b}, {-1.0 / b, 1.0 / b}};
  static const int xi[4] = {0, 1, 1, 0};
  static const int yi[4] = {0, 0, 1, 1};

  std::vector<Eigen::Triplet<double>> tm, tl;
  tm.reserve(static_cast<size_t>(mesh.elem_count()) * 16);
  tl.reserve(static_cast<size_t>(mesh.elem_count()) * 16);
  for (int e = 0; e < mesh.elem_count(); ++e) {
    const auto nd = mesh.elem_nodes(e);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const double mij = Mx[xi[i]][xi[j]] * My[yi[i]][yi[j]];
        const double lij = Sx[xi[i]][xi[j]] * My[yi[i]][yi[j]] + Mx[xi[i]][xi[j]] * Sy[yi[i]][yi[j]];
        tm.emplace_back(nd[i], nd[j], mij);
        tl.emplace_back(nd[i], nd[j], lij);
      }
    }
  }
  mass_.resize(mesh.node_count(), mesh.node_count());
  laplace_.resize(mesh.node_count(), mesh.node_count());
  mass_.setFromTriplets(tm.begin(), tm.end());
  laplace_.setFromTriplets(tl.begin(), tl.end());
}

std::vector<double> HelmholtzSmoother::solve(const std::vector<double>& f, double tau) {
  if (static_cast<int>(f.size()) != mesh_.node_count())
    throw std::invalid_argument("smoother input size does not match node count");
  if (tau < 0.0) throw std::invalid_argument("smoother length-scale parameter must be >= 0");
  if (tau == 0.0) return f;

  auto it = cache_.find(tau);
  if (it == cache_.end()) {
    Eigen::SparseMatrix<double> A = mass_ + tau * laplace_;
    auto ldlt = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    ldlt->compute(A);
    if (ldlt->info() != Eigen::Success) throw SolverFailure("smoother factorization failed");
    it = cache_.emplace(tau, std::move(ldlt)).first;
  }
  Eigen::Map<const Eigen::VectorXd> fv(f.data(), f.size());
  Eigen::VectorXd rhs = mass_ * fv;
  Eigen::VectorXd w = it->second->solve(rhs);
  if (it->second->info() != Eigen::Success) throw SolverFailure("smoother solve failed");
  return std::vector<double>(w.data(), w.data() + w.size());
}

}  // namespace fiberopt
