#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fiberopt/errors.hpp"
#include "fiberopt/fem2d.hpp"
#include "fiberopt/mesh.hpp"
#include "fiberopt/tensor2d.hpp"
#include "test_util.hpp"

using namespace fiberopt;

namespace {

std::vector<Tensor4> uniform_field(const StructuredMesh& mesh, const Tensor4& C) {
  return std::vector<Tensor4>(static_cast<size_t>(mesh.elem_count()), C);
}

// row sum of the consistent mass matrix at a node equals its tributary area,
// so this is the discrete integral of a nodal field
double mass_weighted_sum(const StructuredMesh& mesh, const std::vector<double>& f) {
  double acc = 0.0;
  for (int iy = 0; iy <= mesh.ny; ++iy) {
    for (int ix = 0; ix <= mesh.nx; ++ix) {
      const int adj = ((ix > 0 && ix < mesh.nx) ? 2 : 1) * ((iy > 0 && iy < mesh.ny) ? 2 : 1);
      acc += f[mesh.node_id(ix, iy)] * adj * 0.25 * mesh.elem_area();
    }
  }
  return acc;
}

}  // namespace

TEST_SUITE("fem2d") {
  TEST_CASE("uniaxial plate reproduces the exact uniform stress state") {
    const StructuredMesh mesh{2.0, 1.0, 16, 8};
    const auto cat = testutil::default_catalog();
    const double t = 1.0;
    const SolveState st = assemble_and_solve(mesh, uniform_field(mesh, cat.C_I), uniaxial_bc(mesh, t));

    const double E = 80.0, nu = 0.3;
    for (int e = 0; e < mesh.elem_count(); ++e) {
      const Strain2 sig = apply_tensor4(cat.C_I, st.strain[e]);
      CHECK(sig.xx == doctest::Approx(t).epsilon(1e-8));
      CHECK(std::abs(sig.yy) < 1e-8);
      CHECK(std::abs(sig.xy) < 1e-8);
      CHECK(st.strain[e].xx == doctest::Approx(t / E).epsilon(1e-8));
      CHECK(st.strain[e].yy == doctest::Approx(-nu * t / E).epsilon(1e-8));
    }

    // closed form external work for the uniform state
    CHECK(st.compliance ==
          doctest::Approx(t * t * mesh.width * mesh.height / E).epsilon(1e-10));
    CHECK(st.u_K_u == doctest::Approx(st.compliance).epsilon(1e-10));
    CHECK(compliance(st, uniaxial_bc(mesh, t)) == doctest::Approx(st.compliance).epsilon(1e-13));

    // centroid strain recovery agrees with the solver's own batch
    std::vector<Strain2> again;
    strain_batch(mesh, st.u, again);
    for (int e = 0; e < mesh.elem_count(); ++e) {
      CHECK(again[e].xx == st.strain[e].xx);
      CHECK(again[e].yy == st.strain[e].yy);
      CHECK(again[e].xy == st.strain[e].xy);
    }
  }

  TEST_CASE("compliance scales quadratically with load and inversely with stiffness") {
    const StructuredMesh mesh{2.0, 1.0, 12, 6};
    const auto cat = testutil::default_catalog();
    const auto C1 = uniform_field(mesh, cat.C_I);

    const double J1 = assemble_and_solve(mesh, C1, uniaxial_bc(mesh, 1.0)).compliance;
    const double J2 = assemble_and_solve(mesh, C1, uniaxial_bc(mesh, 2.0)).compliance;
    CHECK(J2 == doctest::Approx(4.0 * J1).epsilon(1e-12));

    Tensor4 Cs = cat.C_I;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) Cs.m[i][j] *= 2.0;
    const double Jh = assemble_and_solve(mesh, uniform_field(mesh, Cs), uniaxial_bc(mesh, 1.0)).compliance;
    CHECK(Jh == doctest::Approx(0.5 * J1).epsilon(1e-12));
  }

  TEST_CASE("zero traction gives the identically zero solution") {
    const StructuredMesh mesh{2.0, 1.0, 8, 4};
    const auto cat = testutil::default_catalog();
    BoundaryConditions bc(mesh.node_count());
    for (int iy = 0; iy <= mesh.ny; ++iy) {
      bc.fix_dof(mesh.node_id(0, iy), 0);
      bc.fix_dof(mesh.node_id(0, iy), 1);
    }
    const SolveState st = assemble_and_solve(mesh, uniform_field(mesh, cat.C_I), bc);
    for (double v : st.u) CHECK(v == 0.0);
    CHECK(st.compliance == 0.0);
  }

  TEST_CASE("solver rejects unconstrained problems and non positive definite elements") {
    const StructuredMesh mesh{1.0, 1.0, 4, 4};
    const auto cat = testutil::default_catalog();

    BoundaryConditions loose(mesh.node_count());
    loose.load[3] = 1.0;
    CHECK_THROWS_AS(assemble_and_solve(mesh, uniform_field(mesh, cat.C_I), loose),
                    std::invalid_argument);

    auto C = uniform_field(mesh, cat.C_I);
    C[5] = Tensor4{};  // zero tensor is not positive definite
    CHECK_THROWS_AS(assemble_and_solve(mesh, C, uniaxial_bc(mesh)), InvalidMaterial);

    std::vector<Tensor4> short_field(mesh.elem_count() - 1, cat.C_I);
    CHECK_THROWS_AS(assemble_and_solve(mesh, short_field, uniaxial_bc(mesh)),
                    std::invalid_argument);
  }

  TEST_CASE("affine Dirichlet patch test is reproduced exactly") {
    const StructuredMesh mesh{1.5, 1.0, 7, 5};
    const auto cat = testutil::default_catalog();
    const double a = 0.003, b = 0.002, c = 0.001;
    const double d = -0.002, e = -0.001, f = 0.004;
    auto ux = [&](double x, double y) { return a + b * x + c * y; };
    auto uy = [&](double x, double y) { return d + e * x + f * y; };

    BoundaryConditions bc(mesh.node_count());
    for (int iy = 0; iy <= mesh.ny; ++iy) {
      for (int ix = 0; ix <= mesh.nx; ++ix) {
        if (ix == 0 || ix == mesh.nx || iy == 0 || iy == mesh.ny) {
          const int k = mesh.node_id(ix, iy);
          bc.fix_dof(k, 0, ux(mesh.node_x(k), mesh.node_y(k)));
          bc.fix_dof(k, 1, uy(mesh.node_x(k), mesh.node_y(k)));
        }
      }
    }
    const SolveState st = assemble_and_solve(mesh, uniform_field(mesh, cat.C_I), bc);
    for (int k = 0; k < mesh.node_count(); ++k) {
      CHECK(st.u[2 * k] == doctest::Approx(ux(mesh.node_x(k), mesh.node_y(k))).epsilon(1e-10));
      CHECK(st.u[2 * k + 1] == doctest::Approx(uy(mesh.node_x(k), mesh.node_y(k))).epsilon(1e-10));
    }
    for (int el = 0; el < mesh.elem_count(); ++el) {
      CHECK(st.strain[el].xx == doctest::Approx(b).epsilon(1e-10));
      CHECK(st.strain[el].yy == doctest::Approx(f).epsilon(1e-10));
      CHECK(st.strain[el].xy == doctest::Approx(0.5 * (c + e)).epsilon(1e-10));
    }
  }

  TEST_CASE("consistent traction bands integrate to the applied resultant") {
    const StructuredMesh mesh{2.0, 1.0, 16, 8};
    SUBCASE("centered band that splits edge segments") {
      // band [0.45, 0.55] does not align with the 0.125 segment grid
      const BoundaryConditions bc = cantilever_bc(mesh, 0.1, 1.0);
      double fx = 0.0, fy = 0.0;
      for (int k = 0; k < mesh.node_count(); ++k) {
        fx += bc.load[2 * k];
        fy += bc.load[2 * k + 1];
      }
      CHECK(fx == 0.0);  // the band carries a purely vertical traction
      CHECK(fy == doctest::Approx(-0.1).epsilon(1e-12));
      // all load sits on the right edge
      for (int iy = 0; iy <= mesh.ny; ++iy)
        for (int ix = 0; ix < mesh.nx; ++ix) {
          CHECK(bc.load[2 * mesh.node_id(ix, iy)] == 0.0);
          CHECK(bc.load[2 * mesh.node_id(ix, iy) + 1] == 0.0);
        }
    }
    SUBCASE("full edge strip equals the uniaxial load vector") {
      BoundaryConditions bc(mesh.node_count());
      add_right_edge_traction(bc, mesh, 0.0, mesh.height, 3.0, 0.0);
      double fx = 0.0;
      for (int k = 0; k < mesh.node_count(); ++k) fx += bc.load[2 * k];
      CHECK(fx == doctest::Approx(3.0 * mesh.height).epsilon(1e-12));

      const BoundaryConditions ub = uniaxial_bc(mesh, 3.0);
      for (int k = 0; k < mesh.node_count(); ++k) {
        CHECK(bc.load[2 * k] == doctest::Approx(ub.load[2 * k]).epsilon(1e-14));
        CHECK(bc.load[2 * k + 1] == 0.0);
      }
    }
  }

  TEST_CASE("stiffening one element never increases compliance") {
    const StructuredMesh mesh{2.0, 1.0, 16, 8};
    const auto cat = testutil::default_catalog();
    const BoundaryConditions bc = cantilever_bc(mesh, 0.1, 1.0);
    auto C = uniform_field(mesh, cat.C_I);
    const double J0 = assemble_and_solve(mesh, C, bc).compliance;
    Tensor4 stiff = cat.C_I;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) stiff.m[i][j] *= 2.0;
    for (int e : {3, 40, 77, 100}) {
      auto C2 = C;
      C2[e] = stiff;
      CHECK(assemble_and_solve(mesh, C2, bc).compliance < J0);
    }
  }

  TEST_CASE("smoother with tau zero is the identity") {
    const StructuredMesh mesh{2.0, 1.0, 10, 5};
    HelmholtzSmoother sm(mesh);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> f(mesh.node_count());
    for (double& v : f) v = u(rng);
    const auto w = sm.solve(f, 0.0);
    for (int k = 0; k < mesh.node_count(); ++k) CHECK(w[k] == f[k]);
  }

  TEST_CASE("smoother preserves constants and the weighted mean") {
    const StructuredMesh mesh{2.0, 1.0, 20, 10};
    HelmholtzSmoother sm(mesh);

    std::vector<double> ones(mesh.node_count(), 0.75);
    for (double tau : {1e-4, 1e-2, 1.0}) {
      const auto w = sm.solve(ones, tau);
      for (double v : w) CHECK(v == doctest::Approx(0.75).epsilon(1e-10));
    }

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> f(mesh.node_count());
    for (double& v : f) v = u(rng);
    const auto w = sm.solve(f, 1e-3);
    CHECK(mass_weighted_sum(mesh, w) ==
          doctest::Approx(mass_weighted_sum(mesh, f)).epsilon(1e-8));
  }

  TEST_CASE("smoother damps a compatible cosine mode by 1/(1+tau k^2)") {
    const StructuredMesh mesh{2.0, 1.0, 128, 12};
    HelmholtzSmoother sm(mesh);
    const double k = 3.0 * M_PI / mesh.width;  // zero slope at both vertical edges
    std::vector<double> f(mesh.node_count());
    for (int n = 0; n < mesh.node_count(); ++n) f[n] = std::cos(k * mesh.node_x(n));

    const double tau = 0.05;
    const double ratio = 1.0 / (1.0 + tau * k * k);
    const auto w = sm.solve(f, tau);
    double max_err = 0.0;
    for (int n = 0; n < mesh.node_count(); ++n)
      max_err = std::max(max_err, std::abs(w[n] - ratio * f[n]));
    CHECK(max_err < 0.02 * ratio);

    // stronger screening damps more
    const auto w2 = sm.solve(f, 0.5);
    CHECK(std::abs(w2[mesh.node_id(0, 0)]) < std::abs(w[mesh.node_id(0, 0)]));
  }

  TEST_CASE("smoother rejects mismatched field sizes") {
    const StructuredMesh mesh{1.0, 1.0, 4, 4};
    HelmholtzSmoother sm(mesh);
    std::vector<double> bad(7, 0.0);
    CHECK_THROWS_AS(sm.solve(bad, 0.1), std::invalid_argument);
  }
}
