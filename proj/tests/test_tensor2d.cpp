#include <doctest.h>

#include <cmath>
#include <random>

#include "fiberopt/tensor2d.hpp"
#include "test_util.hpp"

using namespace fiberopt;
using testutil::default_catalog;
using testutil::tensor_diff;

TEST_SUITE("tensor2d") {

TEST_CASE("rotation leaves isotropic tensors unchanged") {
  const MaterialCatalog cat = default_catalog();
  CHECK(tensor_diff(rotate_tensor(cat.C_I, 0.7), cat.C_I) <= 1e-12);
}

TEST_CASE("orthotropic tensor has period pi") {
  const MaterialCatalog cat = default_catalog();
  CHECK(tensor_diff(rotate_tensor(cat.C_Fx, M_PI), cat.C_Fx) <= 1e-12);
  CHECK(tensor_diff(rotate_tensor(cat.C_Fx, 1.1 + M_PI), rotate_tensor(cat.C_Fx, 1.1)) <= 1e-11);
}

TEST_CASE("quarter rotation swaps the axial components") {
  const MaterialCatalog cat = default_catalog();
  const Tensor4 R = rotate_tensor(cat.C_Fx, M_PI / 2.0);
  CHECK(R.at(0, 0, 0, 0) == doctest::Approx(cat.C_Fx.at(1, 1, 1, 1)).epsilon(1e-12));
  CHECK(R.at(1, 1, 1, 1) == doctest::Approx(cat.C_Fx.at(0, 0, 0, 0)).epsilon(1e-12));
  CHECK(R.at(0, 0, 1, 1) == doctest::Approx(cat.C_Fx.at(0, 0, 1, 1)).epsilon(1e-12));
  CHECK(R.at(0, 1, 0, 1) == doctest::Approx(cat.C_Fx.at(0, 1, 0, 1)).epsilon(1e-12));
}

TEST_CASE("rotation composes additively") {
  const MaterialCatalog cat = default_catalog();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    const double a = u(rng), b = u(rng);
    const double scale = cat.C_Fx.max_abs();
    CHECK(tensor_diff(rotate_tensor(rotate_tensor(cat.C_Fx, a), b), rotate_tensor(cat.C_Fx, a + b))
          <= 1e-12 * scale);
  }
}

TEST_CASE("rotation agrees with a raw four-index loop") {
  const MaterialCatalog cat = default_catalog();
  const double theta = 0.37;
  const double c = std::cos(theta), s = std::sin(theta);
  const double R[2][2] = {{c, -s}, {s, c}};
  const Tensor4 out = rotate_tensor(cat.C_Fx, theta);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          double acc = 0.0;
          for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q)
              for (int m = 0; m < 2; ++m)
                for (int n = 0; n < 2; ++n)
                  acc += cat.C_Fx.at(p, q, m, n) * R[i][p] * R[j][q] * R[k][m] * R[l][n];
          CHECK(out.at(i, j, k, l) == doctest::Approx(acc).epsilon(1e-13));
        }
}

TEST_CASE("rotation carries the stiff axis to the positive angle") {
  const MaterialCatalog cat = default_catalog();
  auto tension = [](double a) {
    const double c = std::cos(a), s = std::sin(a);
    return Strain2{c * c, s * s, c * s};
  };
  const double axial = quad_form(cat.C_Fx, tension(0.0));
  for (double th : {0.3, 1.1, 2.0}) {
    const Tensor4 Cf = cat.fiber_at(th);
    // probing along +theta recovers the full axial stiffness; the mirror does not
    CHECK(quad_form(Cf, tension(th)) == doctest::Approx(axial).epsilon(1e-12));
    CHECK(quad_form(Cf, tension(-th)) < axial - 1.0);
  }
}

TEST_CASE("inversion: identity, round trip, singular") {
  const MaterialCatalog cat = default_catalog();
  const Tensor4 id = identity_tensor4();
  CHECK(tensor_diff(invert_tensor4(id), id) <= 1e-12);

  const Tensor4 inv = invert_tensor4(cat.C_I);
  CHECK(tensor_diff(compose(inv, cat.C_I), id) <= 1e-10);
  CHECK(tensor_diff(compose(cat.C_I, inv), id) <= 1e-10);
  CHECK(tensor_diff(invert_tensor4(inv), cat.C_I) <= 1e-10 * cat.C_I.max_abs());

  CHECK_THROWS_AS(invert_tensor4(Tensor4{}), SingularTensor);
}

TEST_CASE("acoustic tensor of the isotropic material along x") {
  const MaterialCatalog cat = default_catalog();
  const Eigen::Matrix2d N = acoustic_inverse(cat.C_I, 1.0, 0.0);
  CHECK(N(0, 0) == doctest::Approx(1.0 / cat.C_I.at(0, 0, 0, 0)).epsilon(1e-13));
  CHECK(N(1, 1) == doctest::Approx(1.0 / cat.C_I.at(0, 1, 0, 1)).epsilon(1e-13));
  CHECK(std::abs(N(0, 1)) <= 1e-15);
}

TEST_CASE("acoustic inverse is SPD and rotates covariantly for isotropic C") {
  const MaterialCatalog cat = default_catalog();
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  const Eigen::Matrix2d N0 = acoustic_inverse(cat.C_I, 1.0, 0.0);
  for (int t = 0; t < 25; ++t) {
    const double phi = u(rng);
    const Eigen::Matrix2d N = acoustic_inverse(cat.C_I, std::cos(phi), std::sin(phi));
    CHECK(N.isApprox(N.transpose(), 1e-12));
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(N);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    Eigen::Matrix2d R;
    R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    CHECK((N - R * N0 * R.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    const Eigen::Matrix2d Nf = acoustic_inverse(cat.C_Fx, std::cos(phi), std::sin(phi));
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> esf(Nf);
    CHECK(esf.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("catalog matches the plane-stress formulas") {
  const MaterialCatalog cat = default_catalog();
  CHECK(cat.C_I.at(0, 0, 0, 0) == doctest::Approx(80.0 / 0.91).epsilon(1e-14));
  CHECK(cat.C_I.at(0, 0, 1, 1) == doctest::Approx(0.3 * 80.0 / 0.91).epsilon(1e-14));
  CHECK(cat.C_I.at(0, 1, 0, 1) == doctest::Approx(80.0 / 2.6).epsilon(1e-14));
  CHECK(cat.C_Fx.at(0, 0, 0, 0) == doctest::Approx(100.0 / 0.91).epsilon(1e-14));
  CHECK(cat.C_Fx.at(1, 1, 1, 1) == doctest::Approx(20.0 / 0.91).epsilon(1e-14));
  CHECK(cat.density(Phase::V) == 0.0);
  CHECK(cat.density(Phase::I) == 1.0);
  CHECK(cat.density(Phase::F) == 0.5);
}

TEST_CASE("catalog rejects bad moduli") {
  MaterialParams p;
  p.E_I = -5.0;
  CHECK_THROWS_AS(build_catalog(p), InvalidMaterial);
  p = MaterialParams{};
  p.E_V = 0.0;
  CHECK_THROWS_AS(build_catalog(p), InvalidMaterial);
  p = MaterialParams{};
  p.nu_F = 0.5;
  CHECK_THROWS_AS(build_catalog(p), InvalidMaterial);
}

TEST_CASE("equal fiber and background moduli give an isotropic fiber tensor") {
  MaterialParams p;
  p.E_back = p.E_fib;
  const MaterialCatalog cat = build_catalog(p);
  CHECK(tensor_diff(rotate_tensor(cat.C_Fx, 0.9), cat.C_Fx) <= 1e-12 * cat.C_Fx.max_abs());
}

TEST_CASE("all catalog tensors are positive definite") {
  const MaterialCatalog cat = default_catalog();
  CHECK(is_positive_definite(cat.C_V));
  CHECK(is_positive_definite(cat.C_I));
  CHECK(is_positive_definite(cat.C_Fx));
  CHECK(min_symmetric_eigenvalue(cat.C_I) > 0.0);
}

TEST_CASE("compact contraction matches raw index loops") {
  const MaterialCatalog cat = default_catalog();
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    const Strain2 E = testutil::random_strain(rng);
    const Tensor4 C = rotate_tensor(cat.C_Fx, 0.1 * t);
    const Strain2 S = apply_tensor4(C, E);
    CHECK(S.xx == doctest::Approx(testutil::raw_apply(C, E, 0, 0)).epsilon(1e-13));
    CHECK(S.yy == doctest::Approx(testutil::raw_apply(C, E, 1, 1)).epsilon(1e-13));
    CHECK(S.xy == doctest::Approx(testutil::raw_apply(C, E, 0, 1)).epsilon(1e-13));
    CHECK(quad_form(C, E) == doctest::Approx(testutil::raw_quad_form(C, E)).epsilon(1e-13));
  }
}

TEST_CASE("composition agrees with the raw middle-pair contraction") {
  const MaterialCatalog cat = default_catalog();
  const Tensor4 A = rotate_tensor(cat.C_Fx, 0.4);
  const Tensor4 B = rotate_tensor(cat.C_Fx, 1.3);
  const Tensor4 AB = compose(A, B);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          double acc = 0.0;
          for (int m = 0; m < 2; ++m)
            for (int n = 0; n < 2; ++n) acc += A.at(i, j, m, n) * B.at(m, n, k, l);
          CHECK(AB.at(i, j, k, l) == doctest::Approx(acc).epsilon(1e-12));
        }
}

TEST_CASE("mandel map round-trips") {
  const MaterialCatalog cat = default_catalog();
  const Tensor4 C = rotate_tensor(cat.C_Fx, 0.8);
  CHECK(tensor_diff(Tensor4::from_mandel(C.mandel()), C) <= 1e-14 * C.max_abs());
}

}  // TEST_SUITE
