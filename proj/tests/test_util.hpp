#pragma once

// Shared helpers for the unit and acceptance suites.

#include <cmath>
#include <random>

#include "fiberopt/tensor2d.hpp"

namespace testutil {

inline fiberopt::MaterialCatalog default_catalog() {
  return fiberopt::build_catalog(fiberopt::MaterialParams{});
}

inline fiberopt::Strain2 random_strain(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

/// Distance between two fiber angles under pi-periodicity.
inline double angle_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), M_PI);
  return std::min(d, M_PI - d);
}

/// Componentwise max difference of two tensors.
inline double tensor_diff(const fiberopt::Tensor4& a, const fiberopt::Tensor4& b) {
  return (a - b).max_abs();
}

/// Full raw-index double contraction (T : E)_ij without the pair shortcuts,
/// used to validate the bookkeeping in the compact representation.
inline double raw_apply(const fiberopt::Tensor4& T, const fiberopt::Strain2& E, int i, int j) {
  const double ten[2][2] = {{E.xx, E.xy}, {E.xy, E.yy}};
  double acc = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) acc += T.at(i, j, k, l) * ten[k][l];
  return acc;
}

inline double raw_quad_form(const fiberopt::Tensor4& T, const fiberopt::Strain2& E) {
  const double ten[2][2] = {{E.xx, E.xy}, {E.xy, E.yy}};
  double acc = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) acc += ten[i][j] * raw_apply(T, E, i, j);
  return acc;
}

}  // namespace testutil
