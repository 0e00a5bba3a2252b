// Benchmark comparing the parallel kernels against their serial reference
// implementations.  Besides timing, every pair is checked for bitwise
// identical output, which is the property the test suite relies on.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#include "fiberopt/fem2d.hpp"
#include "fiberopt/mesh.hpp"
#include "fiberopt/optimizer.hpp"
#include "fiberopt/parallel.hpp"
#include "fiberopt/topoderiv.hpp"

namespace {

using namespace fiberopt;
using clock_type = std::chrono::steady_clock;

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock_type::now();
    f();
    const auto t1 = clock_type::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

bool bitwise_equal(const double* a, const double* b, size_t n) {
  return std::memcmp(a, b, n * sizeof(double)) == 0;
}

bool tensors_equal(const std::vector<Tensor4>& a, const std::vector<Tensor4>& b) {
  if (a.size() != b.size()) return false;
  return a.empty() || bitwise_equal(&a.front().m[0][0], &b.front().m[0][0], a.size() * 9);
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-22s %10.3f ms %10.3f ms  x%-5.2f  %s\n", name, serial * 1e3, parallel * 1e3,
              serial / parallel, identical ? "bitwise identical" : "MISMATCH");
}

}  // namespace

int main() {
  const StructuredMesh mesh{2.0, 1.0, 160, 80};
  const MaterialCatalog cat = build_catalog(MaterialParams{});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  std::printf("threads available: %d\n\n", max_threads());
  std::printf("%-22s %13s %13s %7s\n", "kernel", "serial", "parallel", "speedup");

  // Element stiffness over a random orientation field.
  std::vector<Tensor4> C(mesh.elem_count());
  for (auto& t : C) t = cat.fiber_at(u(rng) * M_PI);
  std::vector<ElemMatrix> ke_s, ke_p;
  const double t_ke_s = time_best_of(3, [&] { element_stiffness_batch_serial(mesh, C, ke_s); });
  const double t_ke_p = time_best_of(3, [&] { element_stiffness_batch(mesh, C, ke_p); });
  row("element stiffness", t_ke_s, t_ke_p,
      bitwise_equal(ke_s.front().data(), ke_p.front().data(), ke_s.size() * 64));

  // Centroid strains from a random displacement field.
  std::vector<double> disp(2 * mesh.node_count());
  for (auto& v : disp) v = u(rng);
  std::vector<Strain2> st_s, st_p;
  const double t_st_s = time_best_of(3, [&] { strain_batch_serial(mesh, disp, st_s); });
  const double t_st_p = time_best_of(3, [&] { strain_batch(mesh, disp, st_p); });
  row("centroid strain", t_st_s, t_st_p,
      bitwise_equal(&st_s.front().xx, &st_p.front().xx, st_s.size() * 3));

  // Derivative table construction.
  DerivativeTable tab_s, tab_p;
  const double t_tab_s = time_best_of(1, [&] { tab_s = build_table_serial(cat, 36); });
  const double t_tab_p = time_best_of(1, [&] { tab_p = build_table(cat, 36); });
  const bool tab_same = tensors_equal(tab_s.A_FF, tab_p.A_FF) &&
                        tensors_equal(tab_s.A_IF, tab_p.A_IF) &&
                        tensors_equal(tab_s.A_FI, tab_p.A_FI) &&
                        tensors_equal(tab_s.A_VF, tab_p.A_VF) &&
                        tensors_equal(tab_s.A_FV, tab_p.A_FV);
  row("derivative table", t_tab_s, t_tab_p, tab_same);

  // Full per-element sensitivity sweep on a representative mixed iterate.
  Design design = initial_design('C', mesh);
  const PhaseFractions frac = smoothed_characteristic(mesh, design.phi, 0.5, 1e-3);
  const ElementOrientation orient = element_orientation(mesh, design.aux);
  std::vector<Strain2> strain(mesh.elem_count());
  for (auto& s : strain) s = Strain2{u(rng), u(rng), u(rng)};
  SensitivityField sens_s, sens_p;
  const double t_se_s = time_best_of(1, [&] {
    sens_s = compute_sensitivities_serial(tab_s, strain, frac, orient.theta, 0.5);
  });
  const double t_se_p =
      time_best_of(1, [&] { sens_p = compute_sensitivities(tab_p, strain, frac, orient.theta, 0.5); });
  bool se_same = bitwise_equal(sens_s.theta_star.data(), sens_p.theta_star.data(),
                               sens_s.theta_star.size());
  for (int p = 0; p < kNumPairs; ++p)
    se_same = se_same && bitwise_equal(sens_s.dl[p].data(), sens_p.dl[p].data(), sens_s.dl[p].size());
  row("sensitivity sweep", t_se_s, t_se_p, se_same);

  return 0;
}
