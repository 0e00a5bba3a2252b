// Command-line front end: production runs, the standalone derivative-table
// builder, and a quick self-verification mode that cross-checks the
// sensitivity machinery against its independent oracles.
//
// Exit codes: 0 success, 2 config validation/parse error, 3 solver or
// runtime failure, 4 non-convergence.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "fiberopt/errors.hpp"
#include "fiberopt/io.hpp"
#include "fiberopt/optimizer.hpp"
#include "fiberopt/oracle.hpp"
#include "fiberopt/topoderiv.hpp"

namespace {

using namespace fiberopt;

int cmd_run(const std::string& config_path, const std::string& out_override, int max_iters_override) {
  OptConfig cfg = load_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (max_iters_override >= 0) cfg.max_iters = max_iters_override;
  validate_config(cfg);
  ensure_directory(cfg.out_dir);

  {
    std::ofstream echo(cfg.out_dir + "/config_effective.cfg");
    if (!echo) throw IoError("cannot write effective config");
    echo_config(cfg, echo);
  }

  const SnapshotFn snap = [&cfg](const IterateView& view) {
    char name[64];
    std::snprintf(name, sizeof(name), "/step_%d.vtk", view.step);
    write_vtk_snapshot(cfg.out_dir + name, view);
  };

  RunResult result;
  if (cfg.initial_design.rfind("file:", 0) == 0) {
    const StructuredMesh mesh{cfg.width, cfg.height, cfg.nx, cfg.ny};
    Design start = load_design(cfg.initial_design.substr(5), mesh);
    result = run(cfg, std::move(start), snap);
  } else {
    result = run(cfg, snap);
  }

  write_history_csv(cfg.out_dir + "/history.csv", result.history);
  save_design(cfg.out_dir + "/design_final.txt", result.design);

  const bool converged = result.status == RunStatus::Converged;
  std::printf("steps:       %zu\n", result.history.size());
  std::printf("compliance:  %.10g\n", result.final_compliance);
  std::printf("weight gap:  %.10g\n", result.final_g);
  std::printf("status:      %s\n", converged ? "converged" : "iteration limit reached");
  return converged ? 0 : 4;
}

int cmd_table(const std::string& config_path) {
  OptConfig cfg = load_config(config_path);
  std::string path = cfg.table_cache;
  if (path.empty()) {
    ensure_directory(cfg.out_dir);
    path = cfg.out_dir + "/table.bin";
  }
  const MaterialCatalog cat = build_catalog(cfg.mat);
  const DerivativeTable table = build_table(cat, cfg.n_angles);
  save_table(path, table);
  std::printf("angle grid:  %d\n", table.n);
  std::printf("written to:  %s\n", path.c_str());
  return 0;
}

int cmd_verify(const std::string& config_path) {
  OptConfig cfg = load_config(config_path);
  const MaterialCatalog cat = build_catalog(cfg.mat);
  int failures = 0;
  auto report = [&failures](const char* name, bool ok, double measure) {
    std::printf("[%s] %-34s %.3g\n", ok ? "pass" : "FAIL", name, measure);
    if (!ok) ++failures;
  };

  // Quadrature vs closed form on the isotropic matrix.
  const double err_iso =
      (eshelby_interior(cat.C_I) - eshelby_closed_form(cfg.mat.nu_I)).max_abs();
  report("eshelby vs closed form", err_iso < 1e-8, err_iso);

  // Moment-tensor sign: removing material must raise compliance.
  Strain2 E{1.0, -cfg.mat.nu_I, 0.0};
  const double d_iv = td_compliance(E, elastic_moment(cat.C_I, cat.C_V));
  report("void insertion raises compliance", d_iv > 0.0, d_iv);

  // Finite-radius insertion probe on a coarse uniaxial plate.
  StructuredMesh mesh{cfg.width, cfg.height, 64, 32};
  ElasticitySolver solver(mesh, uniaxial_bc(mesh, 1.0));
  std::vector<Tensor4> C(mesh.elem_count(), cat.C_I);
  const SolveState base = solver.solve(C);
  const int probe = mesh.elem_id(mesh.nx / 2, mesh.ny / 2);
  const double pred = td_compliance(base.strain[probe], elastic_moment(cat.C_I, cat.C_V));
  const DiscInsertion ins{mesh.elem_cx(probe), mesh.elem_cy(probe), 4.0 * mesh.dx(), cat.C_V};
  const double fd = fd_topological_derivative(solver, C, base.compliance, ins);
  const double rel = std::abs(fd - pred) / std::abs(pred);
  report("finite-radius probe agreement", rel < 0.25, rel);

  // Table + refinement vs brute-force angles on random strains.
  const DerivativeTable table = build_table(cat, cfg.n_angles);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int ok = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const Strain2 Er{u(rng), u(rng), u(rng)};
    const RefinedMin m = estimate_theta_star(table, Er, 0.0, Phase::I, 0.0);
    const double dense = dense_theta_argmin(Er, Phase::I, 720, cat);
    double d = std::abs(m.theta - dense);
    d = std::min(d, M_PI - d);
    if (d <= M_PI / cfg.n_angles) ++ok;
  }
  report("optimal angle vs brute force", ok >= trials - 1, static_cast<double>(ok));

  std::printf("%s\n", failures == 0 ? "all checks passed" : "verification FAILED");
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-material topology and fiber-orientation optimizer"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int max_iters = -1;

  CLI::App* runc = app.add_subcommand("run", "run an optimization");
  runc->add_option("--config", config_path, "config file")->required();
  runc->add_option("--out", out_dir, "output directory override");
  runc->add_option("--max-iters", max_iters, "iteration limit override");

  CLI::App* tablec = app.add_subcommand("table", "precompute the derivative table cache");
  tablec->add_option("--config", config_path, "config file")->required();

  CLI::App* verifyc = app.add_subcommand("verify", "run the oracle cross-checks");
  verifyc->add_option("--config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (runc->parsed()) return cmd_run(config_path, out_dir, max_iters);
    if (tablec->parsed()) return cmd_table(config_path);
    return cmd_verify(config_path);
  } catch (const fiberopt::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const fiberopt::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const fiberopt::InvalidMaterial& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
