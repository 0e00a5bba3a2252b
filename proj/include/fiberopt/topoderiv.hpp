#pragma once

// Topological derivatives of compliance and weight for circular trial
// inclusions: interior Eshelby tensor by adaptive angular quadrature, the
// elastic moment (polarization) tensor, the precomputed background/insertion
// angle table with periodic quadratic interpolation, optimal insertion angles,
// and the per-element sensitivity sweep feeding the level-set update.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fiberopt/mesh.hpp"
#include "fiberopt/tensor2d.hpp"
#include "fiberopt/xls.hpp"

namespace fiberopt {

struct QuadratureSettings {
  int base_points = 64;
  double tol = 1e-10;
  int max_doublings = 6;
};

/// Interior Eshelby tensor of a circular inclusion in the (possibly
/// anisotropic) background C_bg: angular average of the acoustic-inverse
/// integrand contracted with C_bg, minor symmetries enforced by
/// symmetrization. Gauss-Legendre point count doubles until the result is
/// stable to settings.tol; QuadratureFailure if the budget is exhausted.
Tensor4 eshelby_interior(const Tensor4& C_bg, const QuadratureSettings& settings = {});

/// Elastic moment tensor for inserting C_ins into background C_bg, reusing a
/// precomputed S_bg = eshelby_interior(C_bg):
///   A = C_bg : [C_bg + (C_ins - C_bg) : S_bg]^{-1} : (C_ins - C_bg).
/// Identical arguments give the exact zero tensor.
Tensor4 elastic_moment_with(const Tensor4& S_bg, const Tensor4& C_bg, const Tensor4& C_ins);

/// Convenience variant computing S_bg internally.
Tensor4 elastic_moment(const Tensor4& C_bg, const Tensor4& C_ins);

/// Compliance topological derivative density at a point with strain E when
/// swapping to a phase with moment tensor A: -E : A : E.
double td_compliance(const Strain2& E, const Tensor4& A);

/// Weight topological derivative: density difference rho_b - rho_a.
double td_weight(Phase a, Phase b, const MaterialCatalog& cat);

// ---------------------------------------------------------------- table

/// Moment tensors over the discrete angle grid theta_k = k pi / n: first index
/// letter is the background phase, second the inserted phase. Fiber angles are
/// grid-sampled for both roles; the FF block is n x n (row = background angle,
/// column = insertion angle) with an exactly zero diagonal.
struct DerivativeTable {
  int n = 0;
  MaterialParams params;
  Tensor4 A_IV, A_VI;
  std::vector<Tensor4> A_IF, A_VF;  // [j] insertion angle
  std::vector<Tensor4> A_FI, A_FV;  // [i] background angle
  std::vector<Tensor4> A_FF;        // [i * n + j]

  double angle(int k) const;
  const Tensor4& ff(int i, int j) const { return A_FF[static_cast<size_t>(i) * n + j]; }
};

/// Builds the table (throws std::invalid_argument unless n >= 8 and even;
/// propagates SingularTensor with the offending entry named). OpenMP variant.
DerivativeTable build_table(const MaterialCatalog& cat, int n);
DerivativeTable build_table_serial(const MaterialCatalog& cat, int n);

/// Content hash for cache validation (material scalars + n).
std::uint64_t table_key(const MaterialParams& params, int n);

/// Versioned binary cache. load returns nullopt on any mismatch (magic,
/// version, key) or truncation; the caller rebuilds.
void save_table(const std::string& path, const DerivativeTable& table);
std::optional<DerivativeTable> load_table(const std::string& path, std::uint64_t expected_key);

// ------------------------------------------------------- interpolation

/// Three-point stencil for quadratic interpolation of a pi-periodic grid
/// function sampled at theta_k = k pi / n.
struct InterpStencil {
  int idx[3];
  double w[3];
};
InterpStencil interp_stencil(int n, double theta);

/// Quadratic periodic interpolation of sampled values.
double interp_periodic(const std::vector<double>& values, double theta);

/// Grid argmin (smallest angle on exact ties) refined by a periodic
/// three-point quadratic vertex; degenerate when the grid variation is below
/// degeneracy_tol, in which case fallback_theta is returned unchanged.
struct RefinedMin {
  double theta = 0.0;
  double value = 0.0;
  bool degenerate = false;
};
RefinedMin refine_minimum(const std::vector<double>& values, double fallback_theta,
                          double degeneracy_tol = 1e-12);

// ---------------------------------------------- derivative evaluation

/// Optimally oriented derivative D*_{a->b}L for an isotropic target b; for a
/// fiber background the table is interpolated at theta_a.
double td_pair_iso_target(const DerivativeTable& table, Phase a, Phase b, double theta_a,
                          const Strain2& E, double lambda);

/// Per-angle curve D_{a->F, theta_j}L over the insertion-angle grid.
std::vector<double> td_curve_to_fiber(const DerivativeTable& table, Phase a, double theta_a,
                                      const Strain2& E, double lambda);

/// Optimal insertion angle for phase a at strain E (per-phase curve).
RefinedMin estimate_theta_star(const DerivativeTable& table, const Strain2& E, double theta_a,
                               Phase a, double lambda);

/// Directed pair order used by the sensitivity field.
enum DirectedPair : int { kVI = 0, kVF = 1, kIV = 2, kIF = 3, kFV = 4, kFI = 5 };
inline constexpr int kNumDirected = 6;

/// Antisymmetric pair combination of the six masked optimally oriented
/// derivatives: D_ab = D*_ab - D*_ba + D*_cb - D*_ca with c the third phase.
std::array<double, kNumPairs> extended_td(const std::array<double, kNumDirected>& dstar);

struct SensitivityField {
  std::array<std::vector<double>, kNumDirected> dstar;  // masked, per element
  std::vector<double> theta_star;                       // optimal angle per element
  std::vector<std::uint8_t> degenerate;                 // flat-scan flag
  std::array<std::vector<double>, kNumPairs> dl;        // extended derivatives
};

/// Full per-element sensitivity sweep: per-pair optimally oriented Lagrangian
/// derivatives masked by the smoothed source-phase fraction, the chi-weighted
/// optimal orientation target, and the extended pair derivatives. OpenMP
/// variant plus serial reference with bitwise-identical output.
SensitivityField compute_sensitivities(const DerivativeTable& table,
                                       const std::vector<Strain2>& strain,
                                       const PhaseFractions& fractions,
                                       const std::vector<double>& theta, double lambda);
SensitivityField compute_sensitivities_serial(const DerivativeTable& table,
                                              const std::vector<Strain2>& strain,
                                              const PhaseFractions& fractions,
                                              const std::vector<double>& theta, double lambda);

}  // namespace fiberopt
