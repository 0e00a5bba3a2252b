#pragma once

// Plane fourth-order stiffness tensors with both minor symmetries, stored on the
// symmetric-pair basis {xx, yy, xy}, plus the material catalog used throughout.
//
// Storage convention: m[p][q] = T_{p1 p2 q1 q2} holds raw tensor components (no
// engineering factors). The Mandel map (weights 1, 1, sqrt(2) on the xy slot)
// turns double contractions, inverses and eigenvalues into plain 3x3 matrix
// algebra; the raw matrix itself is what a B^T C B stiffness integrand consumes
// when the strain vector carries the engineering shear gamma = 2 e_xy.

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "fiberopt/errors.hpp"

namespace fiberopt {

/// Symmetric plane strain/stress state; xy is the tensor component (not gamma).
struct Strain2 {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;
};

inline constexpr int kPairX[3] = {0, 1, 0};  // first index of pair p
inline constexpr int kPairY[3] = {0, 1, 1};  // second index of pair p
inline constexpr int kPairIndex[2][2] = {{0, 2}, {2, 1}};

struct Tensor4 {
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

  double& operator()(int p, int q) { return m[p][q]; }
  double operator()(int p, int q) const { return m[p][q]; }

  /// Full 4-index accessor through the pair map.
  double at(int i, int j, int k, int l) const { return m[kPairIndex[i][j]][kPairIndex[k][l]]; }

  Tensor4 operator+(const Tensor4& o) const {
    Tensor4 r;
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) r.m[p][q] = m[p][q] + o.m[p][q];
    return r;
  }
  Tensor4 operator-(const Tensor4& o) const {
    Tensor4 r;
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) r.m[p][q] = m[p][q] - o.m[p][q];
    return r;
  }
  Tensor4 operator*(double s) const {
    Tensor4 r;
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) r.m[p][q] = m[p][q] * s;
    return r;
  }

  /// Mandel representation: hat(T) = W T W with W = diag(1, 1, sqrt2).
  Eigen::Matrix3d mandel() const;
  static Tensor4 from_mandel(const Eigen::Matrix3d& M);

  /// Engineering-Voigt stiffness matrix (sigma = Cv * [exx, eyy, gamma]); equals m.
  Eigen::Matrix3d voigt() const;

  double max_abs() const;
  bool is_zero(double tol = 0.0) const { return max_abs() <= tol; }
};

/// T : E (double contraction on the right), returns a symmetric 2x2 state.
Strain2 apply_tensor4(const Tensor4& T, const Strain2& E);

/// E : T : E quadratic form with correct shear multiplicities.
double quad_form(const Tensor4& T, const Strain2& E);

/// Active rotation by theta: C'_ijkl = R_ip R_jq R_km R_ln C_pqmn with
/// R = [[c, -s], [s, c]], so a material stiff along x becomes stiff along
/// the direction at angle theta.
Tensor4 rotate_tensor(const Tensor4& C, double theta);

/// Inverse on the space of symmetric second-order tensors (Mandel inverse).
/// Throws SingularTensor when the condition number exceeds cond_limit.
Tensor4 invert_tensor4(const Tensor4& T, double cond_limit = 1e12);

/// Acoustic tensor K_ik = C_ijkl n_j n_l for a unit direction n.
Eigen::Matrix2d acoustic_tensor(const Tensor4& C, double nx, double ny);

/// Inverse of the acoustic tensor; throws SingularTensor if det ~ 0.
Eigen::Matrix2d acoustic_inverse(const Tensor4& C, double nx, double ny);

/// T1 : T2 composition (contraction over the middle pair), done in Mandel space.
Tensor4 compose(const Tensor4& T1, const Tensor4& T2);

/// Identity on symmetric tensors: I_ijkl = (d_ik d_jl + d_il d_jk)/2.
Tensor4 identity_tensor4();

/// Smallest eigenvalue of the symmetrized Mandel matrix.
double min_symmetric_eigenvalue(const Tensor4& T);

bool is_positive_definite(const Tensor4& T);

// ---------------------------------------------------------------- materials

enum class Phase : int { V = 0, I = 1, F = 2 };
inline constexpr int kNumPhases = 3;

inline int phase_index(Phase a) { return static_cast<int>(a); }

/// Raw scalar material data: isotropic moduli for the void and isotropic
/// phases, the fiber phase's axial/transverse moduli, Poisson ratios, and
/// the three phase densities.
struct MaterialParams {
  double E_I = 80.0;
  double E_V = 0.01;
  double E_fib = 100.0;
  double E_back = 20.0;
  double nu_I = 0.3;
  double nu_V = 0.3;
  double nu_F = 0.3;
  double rho_V = 0.0;
  double rho_I = 1.0;
  double rho_F = 0.5;
};

/// Plane-stress isotropic stiffness.
Tensor4 isotropic_plane_stress(double E, double nu);

/// Orthotropic plane-stress stiffness of the fiber material with the fiber
/// along +x: axial modulus on xxxx, background modulus on yyyy, cross and
/// shear entries from the background modulus and nu.
Tensor4 fiber_plane_stress(double E_fib, double E_back, double nu);

struct MaterialCatalog {
  MaterialParams params;
  Tensor4 C_V;
  Tensor4 C_I;
  Tensor4 C_Fx;  // fiber material at theta = 0

  const Tensor4& isotropic(Phase a) const;
  Tensor4 fiber_at(double theta) const { return rotate_tensor(C_Fx, theta); }

  /// Stiffness of phase a at orientation theta (theta ignored for V, I).
  Tensor4 stiffness(Phase a, double theta) const;

  double density(Phase a) const;
};

/// Validates parameter ranges (throws InvalidMaterial) and builds the catalog.
MaterialCatalog build_catalog(const MaterialParams& p);

}  // namespace fiberopt
