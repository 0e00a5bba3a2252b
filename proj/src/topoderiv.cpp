#include "fiberopt/topoderiv.hpp"

#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <stdexcept>

#include "fiberopt/errors.hpp"

namespace fiberopt {

namespace {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

struct Raw4 {
  double v[2][2][2][2] = {};
};

// (1/pi) * integral over [-pi/2, pi/2] of N_ik(alpha) alpha_j alpha_l dt.
Raw4 angular_average(const Tensor4& C, int npts) {
  std::vector<double> x, w;
  gauss_legendre(npts, x, w);
  Raw4 T;
  for (int q = 0; q < npts; ++q) {
    const double t = 0.5 * M_PI * x[q];
    const double alpha[2] = {std::cos(t), std::sin(t)};
    const Eigen::Matrix2d N = acoustic_inverse(C, alpha[0], alpha[1]);
    const double wq = 0.5 * w[q];  // (1/pi) * (pi/2) Gauss scale
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) T.v[i][j][k][l] += wq * N(i, k) * alpha[j] * alpha[l];
  }
  return T;
}

Tensor4 contract_and_symmetrize(const Raw4& T, const Tensor4& C) {
  double S[2][2][2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int mm = 0; mm < 2; ++mm)
        for (int nn = 0; nn < 2; ++nn) {
          double acc = 0.0;
          for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) acc += T.v[i][j][k][l] * C.at(k, l, mm, nn);
          S[i][j][mm][nn] = acc;
        }
  Tensor4 out;
  for (int p = 0; p < 3; ++p) {
    const int i = kPairX[p], j = kPairY[p];
    for (int q = 0; q < 3; ++q) {
      const int mm = kPairX[q], nn = kPairY[q];
      out.m[p][q] = 0.25 * (S[i][j][mm][nn] + S[j][i][mm][nn] + S[i][j][nn][mm] + S[j][i][nn][mm]);
    }
  }
  return out;
}

template <class F>
void run_indexed(int count, bool parallel, F&& f) {
  if (parallel) {
    std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) {
      try {
        f(i);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  } else {
    for (int i = 0; i < count; ++i) f(i);
  }
}

constexpr char kTableMagic[4] = {'F', 'O', 'T', 'B'};
constexpr std::uint32_t kTableVersion = 1;

}  // namespace

Tensor4 eshelby_interior(const Tensor4& C_bg, const QuadratureSettings& settings) {
  if (!is_positive_definite(C_bg))
    throw std::invalid_argument("Eshelby integrand requires a positive definite background");
  Tensor4 prev = contract_and_symmetrize(angular_average(C_bg, settings.base_points), C_bg);
  int npts = settings.base_points;
  for (int d = 0; d < settings.max_doublings; ++d) {
    npts *= 2;
    const Tensor4 next = contract_and_symmetrize(angular_average(C_bg, npts), C_bg);
    const double diff = (next - prev).max_abs();
    if (diff < settings.tol) return next;
    prev = next;
  }
  throw QuadratureFailure("Eshelby angular quadrature did not stabilize within " +
                          std::to_string(settings.max_doublings) + " doublings");
}

Tensor4 elastic_moment_with(const Tensor4& S_bg, const Tensor4& C_bg, const Tensor4& C_ins) {
  const Tensor4 dC = C_ins - C_bg;
  if (dC.max_abs() == 0.0) return Tensor4{};
  const Tensor4 Ct = C_bg + compose(dC, S_bg);
  const Tensor4 Cti = invert_tensor4(Ct);
  const Tensor4 A = compose(compose(C_bg, Cti), dC);
  const Eigen::Matrix3d M = A.mandel();
  return Tensor4::from_mandel(0.5 * (M + M.transpose()));
}

Tensor4 elastic_moment(const Tensor4& C_bg, const Tensor4& C_ins) {
  return elastic_moment_with(eshelby_interior(C_bg), C_bg, C_ins);
}

double td_compliance(const Strain2& E, const Tensor4& A) { return -quad_form(A, E); }

double td_weight(Phase a, Phase b, const MaterialCatalog& cat) {
  return cat.density(b) - cat.density(a);
}

// ---------------------------------------------------------------- table

double DerivativeTable::angle(int k) const { return M_PI * k / n; }

namespace {

DerivativeTable build_table_impl(const MaterialCatalog& cat, int n, bool parallel) {
  if (n < 8 || n % 2 != 0)
    throw std::invalid_argument("angle grid size must be even and at least 8");
  DerivativeTable t;
  t.n = n;
  t.params = cat.params;
  t.A_IF.resize(n);
  t.A_VF.resize(n);
  t.A_FI.resize(n);
  t.A_FV.resize(n);
  t.A_FF.resize(static_cast<size_t>(n) * n);

  const Tensor4 S_I = eshelby_interior(cat.C_I);
  const Tensor4 S_V = eshelby_interior(cat.C_V);
  t.A_IV = elastic_moment_with(S_I, cat.C_I, cat.C_V);
  t.A_VI = elastic_moment_with(S_V, cat.C_V, cat.C_I);

  std::vector<Tensor4> Cf(n), Sf(n);
  run_indexed(n, parallel, [&](int i) {
    Cf[i] = cat.fiber_at(t.angle(i));
    try {
      Sf[i] = eshelby_interior(Cf[i]);
    } catch (const SingularTensor& e) {
      throw SingularTensor("table fiber background " + std::to_string(i) + ": " + e.what());
    }
  });

  run_indexed(n, parallel, [&](int j) {
    try {
      t.A_IF[j] = elastic_moment_with(S_I, cat.C_I, Cf[j]);
      t.A_VF[j] = elastic_moment_with(S_V, cat.C_V, Cf[j]);
      t.A_FI[j] = elastic_moment_with(Sf[j], Cf[j], cat.C_I);
      t.A_FV[j] = elastic_moment_with(Sf[j], Cf[j], cat.C_V);
    } catch (const SingularTensor& e) {
      throw SingularTensor("table entry at angle index " + std::to_string(j) + ": " + e.what());
    }
  });

  run_indexed(n, parallel, [&](int i) {
    for (int j = 0; j < n; ++j) {
      try {
        t.A_FF[static_cast<size_t>(i) * n + j] = elastic_moment_with(Sf[i], Cf[i], Cf[j]);
      } catch (const SingularTensor& e) {
        throw SingularTensor("table entry (F, F) at (" + std::to_string(i) + ", " +
                             std::to_string(j) + "): " + e.what());
      }
    }
  });
  return t;
}

}  // namespace

DerivativeTable build_table(const MaterialCatalog& cat, int n) {
  return build_table_impl(cat, n, true);
}

DerivativeTable build_table_serial(const MaterialCatalog& cat, int n) {
  return build_table_impl(cat, n, false);
}

std::uint64_t table_key(const MaterialParams& p, int n) {
  const double vals[10] = {p.E_I, p.E_V, p.E_fib, p.E_back, p.nu_I,
                           p.nu_V, p.nu_F, p.rho_V, p.rho_I, p.rho_F};
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(vals, sizeof(vals));
  const std::int64_t n64 = n;
  mix(&n64, sizeof(n64));
  return h;
}

void save_table(const std::string& path, const DerivativeTable& table) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open table cache for writing: " + path);
  f.write(kTableMagic, 4);
  const std::uint32_t version = kTableVersion;
  f.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint64_t key = table_key(table.params, table.n);
  f.write(reinterpret_cast<const char*>(&key), sizeof(key));
  const std::int32_t n = table.n;
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  f.write(reinterpret_cast<const char*>(&table.params), sizeof(MaterialParams));
  auto put = [&f](const Tensor4& T) { f.write(reinterpret_cast<const char*>(T.m), sizeof(T.m)); };
  put(table.A_IV);
  put(table.A_VI);
  for (const auto& T : table.A_IF) put(T);
  for (const auto& T : table.A_VF) put(T);
  for (const auto& T : table.A_FI) put(T);
  for (const auto& T : table.A_FV) put(T);
  for (const auto& T : table.A_FF) put(T);
  if (!f) throw IoError("failed writing table cache: " + path);
}

std::optional<DerivativeTable> load_table(const std::string& path, std::uint64_t expected_key) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t key = 0;
  std::int32_t n = 0;
  if (!f.read(magic, 4) || std::memcmp(magic, kTableMagic, 4) != 0) return std::nullopt;
  if (!f.read(reinterpret_cast<char*>(&version), sizeof(version)) || version != kTableVersion)
    return std::nullopt;
  if (!f.read(reinterpret_cast<char*>(&key), sizeof(key)) || key != expected_key)
    return std::nullopt;
  if (!f.read(reinterpret_cast<char*>(&n), sizeof(n)) || n < 8 || n % 2 != 0) return std::nullopt;

  DerivativeTable t;
  t.n = n;
  if (!f.read(reinterpret_cast<char*>(&t.params), sizeof(MaterialParams))) return std::nullopt;
  if (table_key(t.params, n) != expected_key) return std::nullopt;
  t.A_IF.resize(n);
  t.A_VF.resize(n);
  t.A_FI.resize(n);
  t.A_FV.resize(n);
  t.A_FF.resize(static_cast<size_t>(n) * n);
  auto get = [&f](Tensor4& T) { return bool(f.read(reinterpret_cast<char*>(T.m), sizeof(T.m))); };
  if (!get(t.A_IV) || !get(t.A_VI)) return std::nullopt;
  for (auto& T : t.A_IF)
    if (!get(T)) return std::nullopt;
  for (auto& T : t.A_VF)
    if (!get(T)) return std::nullopt;
  for (auto& T : t.A_FI)
    if (!get(T)) return std::nullopt;
  for (auto& T : t.A_FV)
    if (!get(T)) return std::nullopt;
  for (auto& T : t.A_FF)
    if (!get(T)) return std::nullopt;
  return t;
}

// ------------------------------------------------------- interpolation

InterpStencil interp_stencil(int n, double theta) {
  const double h = M_PI / n;
  const double u = theta / h;
  const long long j0 = std::llround(u);
  const double tloc = u - static_cast<double>(j0);
  const int jc = static_cast<int>(((j0 % n) + n) % n);
  InterpStencil st;
  st.idx[0] = (jc + n - 1) % n;
  st.idx[1] = jc;
  st.idx[2] = (jc + 1) % n;
  st.w[0] = 0.5 * tloc * (tloc - 1.0);
  st.w[1] = 1.0 - tloc * tloc;
  st.w[2] = 0.5 * tloc * (tloc + 1.0);
  return st;
}

double interp_periodic(const std::vector<double>& values, double theta) {
  const InterpStencil st = interp_stencil(static_cast<int>(values.size()), theta);
  return st.w[0] * values[st.idx[0]] + st.w[1] * values[st.idx[1]] + st.w[2] * values[st.idx[2]];
}

namespace {

RefinedMin refine_min_impl(const double* v, int n, double fallback_theta, double degeneracy_tol) {
  int jmin = 0;
  double vmin = v[0], vmax = v[0];
  for (int j = 1; j < n; ++j) {
    if (v[j] < vmin) {
      vmin = v[j];
      jmin = j;
    }
    if (v[j] > vmax) vmax = v[j];
  }
  if (vmax - vmin < degeneracy_tol) return {fallback_theta, vmin, true};

  const double h = M_PI / n;
  const double f0 = v[jmin];
  const double fm = v[(jmin + n - 1) % n];
  const double fp = v[(jmin + 1) % n];
  const double denom = fm - 2.0 * f0 + fp;
  double theta = h * jmin;
  double value = f0;
  if (denom > 0.0) {
    double delta = 0.5 * h * (fm - fp) / denom;
    delta = std::clamp(delta, -0.5 * h, 0.5 * h);
    theta += delta;
    value = f0 - (fm - fp) * (fm - fp) / (8.0 * denom);
  }
  theta -= M_PI * std::floor(theta / M_PI);
  return {theta, value, false};
}

}  // namespace

RefinedMin refine_minimum(const std::vector<double>& values, double fallback_theta,
                          double degeneracy_tol) {
  if (values.size() < 3) throw std::invalid_argument("minimum refinement needs at least 3 samples");
  return refine_min_impl(values.data(), static_cast<int>(values.size()), fallback_theta,
                         degeneracy_tol);
}

// ---------------------------------------------- derivative evaluation

namespace {

inline double rho(const MaterialParams& p, Phase a) {
  switch (a) {
    case Phase::V: return p.rho_V;
    case Phase::I: return p.rho_I;
    default: return p.rho_F;
  }
}

inline double stencil_td(const InterpStencil& st, const std::vector<Tensor4>& A,
                         const Strain2& E) {
  return st.w[0] * td_compliance(E, A[st.idx[0]]) + st.w[1] * td_compliance(E, A[st.idx[1]]) +
         st.w[2] * td_compliance(E, A[st.idx[2]]);
}

void curve_to_fiber_impl(const DerivativeTable& t, Phase a, double theta_a, const Strain2& E,
                         double lambda, double* out) {
  const int n = t.n;
  if (a == Phase::I) {
    const double shift = lambda * (t.params.rho_F - t.params.rho_I);
    for (int j = 0; j < n; ++j) out[j] = td_compliance(E, t.A_IF[j]) + shift;
  } else if (a == Phase::V) {
    const double shift = lambda * (t.params.rho_F - t.params.rho_V);
    for (int j = 0; j < n; ++j) out[j] = td_compliance(E, t.A_VF[j]) + shift;
  } else {
    const InterpStencil st = interp_stencil(n, theta_a);
    for (int j = 0; j < n; ++j) {
      out[j] = st.w[0] * td_compliance(E, t.ff(st.idx[0], j)) +
               st.w[1] * td_compliance(E, t.ff(st.idx[1], j)) +
               st.w[2] * td_compliance(E, t.ff(st.idx[2], j));
    }
  }
}

}  // namespace

double td_pair_iso_target(const DerivativeTable& t, Phase a, Phase b, double theta_a,
                          const Strain2& E, double lambda) {
  if (b == Phase::F) throw std::invalid_argument("target phase must be isotropic here");
  if (a == b) throw std::invalid_argument("source and target phases must differ");
  const double shift = lambda * (rho(t.params, b) - rho(t.params, a));
  if (a == Phase::I) return td_compliance(E, t.A_IV) + shift;
  if (a == Phase::V) return td_compliance(E, t.A_VI) + shift;
  const InterpStencil st = interp_stencil(t.n, theta_a);
  return stencil_td(st, b == Phase::I ? t.A_FI : t.A_FV, E) + shift;
}

std::vector<double> td_curve_to_fiber(const DerivativeTable& t, Phase a, double theta_a,
                                      const Strain2& E, double lambda) {
  std::vector<double> out(t.n);
  curve_to_fiber_impl(t, a, theta_a, E, lambda, out.data());
  return out;
}

RefinedMin estimate_theta_star(const DerivativeTable& t, const Strain2& E, double theta_a,
                               Phase a, double lambda) {
  std::vector<double> curve(t.n);
  curve_to_fiber_impl(t, a, theta_a, E, lambda, curve.data());
  return refine_min_impl(curve.data(), t.n, theta_a, 1e-12);
}

std::array<double, kNumPairs> extended_td(const std::array<double, kNumDirected>& d) {
  return {
      d[kVI] - d[kIV] + d[kFI] - d[kFV],  // pair (V, I), third phase F
      d[kVF] - d[kFV] + d[kIF] - d[kIV],  // pair (V, F), third phase I
      d[kIF] - d[kFI] + d[kVF] - d[kVI],  // pair (I, F), third phase V
  };
}

namespace {

struct SensScratch {
  std::vector<double> c_if, c_vf, c_ff, weighted;
  explicit SensScratch(int n) : c_if(n), c_vf(n), c_ff(n), weighted(n) {}
};

void element_sensitivity(const DerivativeTable& t, const Strain2& E, double chi_v, double chi_i,
                         double chi_f, double theta, double lambda, SensScratch& s,
                         SensitivityField& out, int e) {
  const MaterialParams& p = t.params;
  const int n = t.n;

  const double d_iv = td_compliance(E, t.A_IV) + lambda * (p.rho_V - p.rho_I);
  const double d_vi = td_compliance(E, t.A_VI) + lambda * (p.rho_I - p.rho_V);
  const InterpStencil st = interp_stencil(n, theta);
  const double d_fi = stencil_td(st, t.A_FI, E) + lambda * (p.rho_I - p.rho_F);
  const double d_fv = stencil_td(st, t.A_FV, E) + lambda * (p.rho_V - p.rho_F);

  curve_to_fiber_impl(t, Phase::I, theta, E, lambda, s.c_if.data());
  curve_to_fiber_impl(t, Phase::V, theta, E, lambda, s.c_vf.data());
  curve_to_fiber_impl(t, Phase::F, theta, E, lambda, s.c_ff.data());

  const RefinedMin m_if = refine_min_impl(s.c_if.data(), n, theta, 1e-12);
  const RefinedMin m_vf = refine_min_impl(s.c_vf.data(), n, theta, 1e-12);

  for (int j = 0; j < n; ++j)
    s.weighted[j] = chi_i * s.c_if[j] + chi_v * s.c_vf[j] + chi_f * s.c_ff[j];
  const RefinedMin m_w = refine_min_impl(s.weighted.data(), n, theta, 1e-12);

  std::array<double, kNumDirected> ds;
  ds[kVI] = chi_v * d_vi;
  ds[kVF] = chi_v * m_vf.value;
  ds[kIV] = chi_i * d_iv;
  ds[kIF] = chi_i * m_if.value;
  ds[kFV] = chi_f * d_fv;
  ds[kFI] = chi_f * d_fi;

  for (int k = 0; k < kNumDirected; ++k) out.dstar[k][e] = ds[k];
  out.theta_star[e] = m_w.degenerate ? theta : m_w.theta;
  out.degenerate[e] = m_w.degenerate ? 1 : 0;
  const auto dl = extended_td(ds);
  for (int q = 0; q < kNumPairs; ++q) out.dl[q][e] = dl[q];
}

SensitivityField compute_sensitivities_impl(const DerivativeTable& t,
                                            const std::vector<Strain2>& strain,
                                            const PhaseFractions& fr,
                                            const std::vector<double>& theta, double lambda,
                                            bool parallel) {
  const int ne = static_cast<int>(strain.size());
  if (fr.elem_count() != ne || static_cast<int>(theta.size()) != ne)
    throw std::invalid_argument("sensitivity input fields disagree on element count");
  SensitivityField out;
  for (auto& v : out.dstar) v.resize(ne);
  out.theta_star.resize(ne);
  out.degenerate.resize(ne);
  for (auto& v : out.dl) v.resize(ne);

  if (parallel) {
#pragma omp parallel
    {
      SensScratch s(t.n);
#pragma omp for schedule(static)
      for (int e = 0; e < ne; ++e)
        element_sensitivity(t, strain[e], fr.chi[0][e], fr.chi[1][e], fr.chi[2][e], theta[e],
                            lambda, s, out, e);
    }
  } else {
    SensScratch s(t.n);
    for (int e = 0; e < ne; ++e)
      element_sensitivity(t, strain[e], fr.chi[0][e], fr.chi[1][e], fr.chi[2][e], theta[e], lambda,
                          s, out, e);
  }
  return out;
}

}  // namespace

SensitivityField compute_sensitivities(const DerivativeTable& t, const std::vector<Strain2>& strain,
                                       const PhaseFractions& fr, const std::vector<double>& theta,
                                       double lambda) {
  return compute_sensitivities_impl(t, strain, fr, theta, lambda, true);
}

SensitivityField compute_sensitivities_serial(const DerivativeTable& t,
                                              const std::vector<Strain2>& strain,
                                              const PhaseFractions& fr,
                                              const std::vector<double>& theta, double lambda) {
  return compute_sensitivities_impl(t, strain, fr, theta, lambda, false);
}

}  // namespace fiberopt
