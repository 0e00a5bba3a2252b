#include "fiberopt/tensor2d.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace fiberopt {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

Eigen::Matrix3d Tensor4::mandel() const {
  Eigen::Matrix3d M;
  for (int p = 0; p < 3; ++p) {
    for (int q = 0; q < 3; ++q) {
      double w = (p == 2 ? kSqrt2 : 1.0) * (q == 2 ? kSqrt2 : 1.0);
      M(p, q) = w * m[p][q];
    }
  }
  return M;
}

Tensor4 Tensor4::from_mandel(const Eigen::Matrix3d& M) {
  Tensor4 T;
  for (int p = 0; p < 3; ++p) {
    for (int q = 0; q < 3; ++q) {
      double w = (p == 2 ? kSqrt2 : 1.0) * (q == 2 ? kSqrt2 : 1.0);
      T.m[p][q] = M(p, q) / w;
    }
  }
  return T;
}

Eigen::Matrix3d Tensor4::voigt() const {
  Eigen::Matrix3d M;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) M(p, q) = m[p][q];
  return M;
}

double Tensor4::max_abs() const {
  double v = 0.0;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) v = std::max(v, std::abs(m[p][q]));
  return v;
}

Strain2 apply_tensor4(const Tensor4& T, const Strain2& E) {
  // Contraction over (k, l): the xy pair appears twice.
  Strain2 S;
  S.xx = T.m[0][0] * E.xx + T.m[0][1] * E.yy + 2.0 * T.m[0][2] * E.xy;
  S.yy = T.m[1][0] * E.xx + T.m[1][1] * E.yy + 2.0 * T.m[1][2] * E.xy;
  S.xy = T.m[2][0] * E.xx + T.m[2][1] * E.yy + 2.0 * T.m[2][2] * E.xy;
  return S;
}

double quad_form(const Tensor4& T, const Strain2& E) {
  Strain2 S = apply_tensor4(T, E);
  return E.xx * S.xx + E.yy * S.yy + 2.0 * E.xy * S.xy;
}

Tensor4 rotate_tensor(const Tensor4& C, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double R[2][2] = {{c, -s}, {s, c}};
  Tensor4 out;
  for (int pr = 0; pr < 3; ++pr) {
    const int i = kPairX[pr], j = kPairY[pr];
    for (int qr = 0; qr < 3; ++qr) {
      const int k = kPairX[qr], l = kPairY[qr];
      double acc = 0.0;
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
          for (int mm = 0; mm < 2; ++mm)
            for (int n = 0; n < 2; ++n)
              acc += C.at(p, q, mm, n) * R[i][p] * R[j][q] * R[k][mm] * R[l][n];
      out.m[pr][qr] = acc;
    }
  }
  return out;
}

Tensor4 invert_tensor4(const Tensor4& T, double cond_limit) {
  Eigen::Matrix3d M = T.mandel();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(2);
  if (!(smin > 0.0) || smax / smin > cond_limit) {
    throw SingularTensor("tensor inverse: condition number " +
                         std::to_string(smin > 0.0 ? smax / smin : 0.0) +
                         " exceeds limit (or exactly singular)");
  }
  Eigen::Matrix3d Minv = svd.solve(Eigen::Matrix3d::Identity());
  return Tensor4::from_mandel(Minv);
}

Eigen::Matrix2d acoustic_tensor(const Tensor4& C, double nx, double ny) {
  const double n[2] = {nx, ny};
  Eigen::Matrix2d K;
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      double acc = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) acc += C.at(i, j, k, l) * n[j] * n[l];
      K(i, k) = acc;
    }
  }
  return K;
}

Eigen::Matrix2d acoustic_inverse(const Tensor4& C, double nx, double ny) {
  Eigen::Matrix2d K = acoustic_tensor(C, nx, ny);
  const double det = K(0, 0) * K(1, 1) - K(0, 1) * K(1, 0);
  const double scale = K.cwiseAbs().maxCoeff();
  if (std::abs(det) <= 1e-300 || std::abs(det) < 1e-14 * scale * scale) {
    throw SingularTensor("acoustic tensor singular for direction (" + std::to_string(nx) + ", " +
                         std::to_string(ny) + ")");
  }
  Eigen::Matrix2d N;
  N(0, 0) = K(1, 1) / det;
  N(1, 1) = K(0, 0) / det;
  N(0, 1) = -K(0, 1) / det;
  N(1, 0) = -K(1, 0) / det;
  return N;
}

Tensor4 compose(const Tensor4& T1, const Tensor4& T2) {
  return Tensor4::from_mandel(T1.mandel() * T2.mandel());
}

Tensor4 identity_tensor4() {
  Tensor4 I;
  I.m[0][0] = 1.0;
  I.m[1][1] = 1.0;
  I.m[2][2] = 0.5;  // raw component of the symmetric identity on the xy pair
  return I;
}

double min_symmetric_eigenvalue(const Tensor4& T) {
  Eigen::Matrix3d M = T.mandel();
  Eigen::Matrix3d S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(S);
  return es.eigenvalues()(0);
}

bool is_positive_definite(const Tensor4& T) { return min_symmetric_eigenvalue(T) > 0.0; }

// ---------------------------------------------------------------- materials

Tensor4 isotropic_plane_stress(double E, double nu) {
  Tensor4 C;
  const double f = E / (1.0 - nu * nu);
  C.m[0][0] = f;
  C.m[1][1] = f;
  C.m[0][1] = C.m[1][0] = nu * f;
  C.m[2][2] = E / (2.0 * (1.0 + nu));  // = f (1 - nu) / 2
  return C;
}

Tensor4 fiber_plane_stress(double E_fib, double E_back, double nu) {
  Tensor4 C = isotropic_plane_stress(E_back, nu);
  C.m[0][0] = E_fib / (1.0 - nu * nu);
  return C;
}

const Tensor4& MaterialCatalog::isotropic(Phase a) const {
  switch (a) {
    case Phase::V: return C_V;
    case Phase::I: return C_I;
    default: throw InvalidMaterial("fiber phase has no single isotropic tensor");
  }
}

Tensor4 MaterialCatalog::stiffness(Phase a, double theta) const {
  if (a == Phase::F) return fiber_at(theta);
  return isotropic(a);
}

double MaterialCatalog::density(Phase a) const {
  switch (a) {
    case Phase::V: return params.rho_V;
    case Phase::I: return params.rho_I;
    default: return params.rho_F;
  }
}

MaterialCatalog build_catalog(const MaterialParams& p) {
  auto check_modulus = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidMaterial(std::string(name) + " must be positive and finite");
  };
  check_modulus(p.E_I, "E_I");
  check_modulus(p.E_V, "E_V");
  check_modulus(p.E_fib, "E_fib");
  check_modulus(p.E_back, "E_back");
  auto check_nu = [](double v, const char* name) {
    if (!(v > -1.0 && v < 0.5))
      throw InvalidMaterial(std::string(name) + " must lie in (-1, 0.5)");
  };
  check_nu(p.nu_I, "nu_I");
  check_nu(p.nu_V, "nu_V");
  check_nu(p.nu_F, "nu_F");
  if (!(p.E_back / p.E_fib > 0.0 && p.E_back / p.E_fib <= 1.0))
    throw InvalidMaterial("E_back/E_fib must lie in (0, 1]");
  if (p.rho_V < 0.0 || p.rho_I < 0.0 || p.rho_F < 0.0)
    throw InvalidMaterial("densities must be nonnegative");
  if (p.rho_V > p.rho_I || p.rho_V > p.rho_F)
    throw InvalidMaterial("void density must not exceed material densities");

  MaterialCatalog cat;
  cat.params = p;
  cat.C_V = isotropic_plane_stress(p.E_V, p.nu_V);
  cat.C_I = isotropic_plane_stress(p.E_I, p.nu_I);
  cat.C_Fx = fiber_plane_stress(p.E_fib, p.E_back, p.nu_F);
  for (const Tensor4* C : {&cat.C_V, &cat.C_I, &cat.C_Fx}) {
    if (!is_positive_definite(*C)) throw InvalidMaterial("catalog tensor not positive definite");
  }
  return cat;
}

}  // namespace fiberopt
