#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "fiberopt/fem2d.hpp"
#include "fiberopt/mesh.hpp"
#include "fiberopt/topoderiv.hpp"
#include "fiberopt/xls.hpp"
#include "test_util.hpp"

using namespace fiberopt;

namespace {

bool same_tensor(const Tensor4& a, const Tensor4& b) {
  return std::memcmp(a.m, b.m, sizeof(a.m)) == 0;
}

/// A mixed three-phase iterate on a cantilever so every code branch is live.
struct Iterate {
  StructuredMesh mesh{2.0, 1.0, 24, 12};
  PhaseFractions fractions;
  std::vector<double> theta;
  std::vector<Tensor4> C;
  SolveState fem;

  explicit Iterate(const MaterialCatalog& cat) {
    XlsState state(mesh.node_count());
    for (int k = 0; k < mesh.node_count(); ++k) {
      state.phi[0][k] = std::sin(0.7 * mesh.node_x(k) + 0.3);
      state.phi[1][k] = std::cos(1.3 * mesh.node_y(k));
      state.phi[2][k] = std::sin(2.1 * mesh.node_x(k) * mesh.node_y(k) - 0.5);
    }
    fractions = smoothed_characteristic(mesh, state, 0.5, 1e-3);
    theta.resize(mesh.elem_count());
    C.resize(mesh.elem_count());
    for (int e = 0; e < mesh.elem_count(); ++e) {
      theta[e] = 0.4 * std::sin(0.9 * e) + 0.8;
      C[e] = cat.C_V * fractions.chi[0][e] + cat.C_I * fractions.chi[1][e] +
             cat.fiber_at(theta[e]) * fractions.chi[2][e];
    }
    fem = assemble_and_solve(mesh, C, cantilever_bc(mesh, 0.1, 1.0));
  }
};

}  // namespace

TEST_SUITE("parallel") {
  TEST_CASE("openmp is wired in") {
    CHECK(omp_get_max_threads() >= 1);
  }

  TEST_CASE("element stiffness batch matches the serial reference bitwise") {
    omp_set_num_threads(4);
    const Iterate it(testutil::default_catalog());
    std::vector<ElemMatrix> par, ser;
    element_stiffness_batch(it.mesh, it.C, par);
    element_stiffness_batch_serial(it.mesh, it.C, ser);
    REQUIRE(par.size() == ser.size());
    for (size_t e = 0; e < par.size(); ++e)
      CHECK(std::memcmp(par[e].data(), ser[e].data(), sizeof(ElemMatrix)) == 0);
  }

  TEST_CASE("strain batch matches the serial reference bitwise") {
    omp_set_num_threads(4);
    const Iterate it(testutil::default_catalog());
    std::vector<Strain2> par, ser;
    strain_batch(it.mesh, it.fem.u, par);
    strain_batch_serial(it.mesh, it.fem.u, ser);
    REQUIRE(par.size() == ser.size());
    for (size_t e = 0; e < par.size(); ++e) {
      CHECK(par[e].xx == ser[e].xx);
      CHECK(par[e].yy == ser[e].yy);
      CHECK(par[e].xy == ser[e].xy);
    }
  }

  TEST_CASE("the solver gives bitwise equal answers on both paths") {
    omp_set_num_threads(4);
    const Iterate it(testutil::default_catalog());
    ElasticitySolver solver(it.mesh, cantilever_bc(it.mesh, 0.1, 1.0));
    const SolveState a = solver.solve(it.C, true);
    const SolveState b = solver.solve(it.C, false);
    REQUIRE(a.u.size() == b.u.size());
    for (size_t i = 0; i < a.u.size(); ++i) CHECK(a.u[i] == b.u[i]);
    CHECK(a.compliance == b.compliance);
    CHECK(a.u_K_u == b.u_K_u);
    REQUIRE(a.strain.size() == b.strain.size());
    for (size_t e = 0; e < a.strain.size(); ++e) {
      CHECK(a.strain[e].xx == b.strain[e].xx);
      CHECK(a.strain[e].yy == b.strain[e].yy);
      CHECK(a.strain[e].xy == b.strain[e].xy);
    }
  }

  TEST_CASE("derivative tables match the serial builder bitwise") {
    omp_set_num_threads(4);
    const MaterialCatalog cat = testutil::default_catalog();
    const DerivativeTable par = build_table(cat, 12);
    const DerivativeTable ser = build_table_serial(cat, 12);
    REQUIRE(par.n == ser.n);
    CHECK(same_tensor(par.A_IV, ser.A_IV));
    CHECK(same_tensor(par.A_VI, ser.A_VI));
    for (int j = 0; j < par.n; ++j) {
      CHECK(same_tensor(par.A_IF[j], ser.A_IF[j]));
      CHECK(same_tensor(par.A_VF[j], ser.A_VF[j]));
      CHECK(same_tensor(par.A_FI[j], ser.A_FI[j]));
      CHECK(same_tensor(par.A_FV[j], ser.A_FV[j]));
    }
    for (int i = 0; i < par.n; ++i)
      for (int j = 0; j < par.n; ++j) CHECK(same_tensor(par.ff(i, j), ser.ff(i, j)));
  }

  TEST_CASE("sensitivity sweeps match the serial reference bitwise") {
    omp_set_num_threads(4);
    const MaterialCatalog cat = testutil::default_catalog();
    const DerivativeTable table = build_table(cat, 12);
    const Iterate it(cat);
    const SensitivityField par =
        compute_sensitivities(table, it.fem.strain, it.fractions, it.theta, 0.7);
    const SensitivityField ser =
        compute_sensitivities_serial(table, it.fem.strain, it.fractions, it.theta, 0.7);
    for (int d = 0; d < kNumDirected; ++d) {
      REQUIRE(par.dstar[d].size() == ser.dstar[d].size());
      for (size_t e = 0; e < par.dstar[d].size(); ++e) CHECK(par.dstar[d][e] == ser.dstar[d][e]);
    }
    for (size_t e = 0; e < par.theta_star.size(); ++e) {
      CHECK(par.theta_star[e] == ser.theta_star[e]);
      CHECK(par.degenerate[e] == ser.degenerate[e]);
    }
    for (int q = 0; q < kNumPairs; ++q)
      for (size_t e = 0; e < par.dl[q].size(); ++e) CHECK(par.dl[q][e] == ser.dl[q][e]);
  }
}
