#include "fiberopt/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fiberopt/errors.hpp"

namespace fiberopt {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_cell_scalars(std::ostream& os, const std::string& name,
                        const std::vector<double>& values) {
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : values) os << fmt(v) << "\n";
}

}  // namespace

void write_vtk_snapshot(const std::string& path, const IterateView& view) {
  const StructuredMesh& mesh = view.mesh;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open snapshot for writing: " + path);

  f << "# vtk DataFile Version 3.0\n";
  f << "design state, step " << view.step << "\n";
  f << "ASCII\nDATASET UNSTRUCTURED_GRID\n";

  f << "POINTS " << mesh.node_count() << " double\n";
  for (int k = 0; k < mesh.node_count(); ++k)
    f << fmt(mesh.node_x(k)) << " " << fmt(mesh.node_y(k)) << " 0\n";

  f << "CELLS " << mesh.elem_count() << " " << mesh.elem_count() * 5 << "\n";
  for (int e = 0; e < mesh.elem_count(); ++e) {
    const auto nd = mesh.elem_nodes(e);
    f << "4 " << nd[0] << " " << nd[1] << " " << nd[2] << " " << nd[3] << "\n";
  }
  f << "CELL_TYPES " << mesh.elem_count() << "\n";
  for (int e = 0; e < mesh.elem_count(); ++e) f << "9\n";

  f << "CELL_DATA " << mesh.elem_count() << "\n";
  write_cell_scalars(f, "chi_V", view.fractions.chi[0]);
  write_cell_scalars(f, "chi_I", view.fractions.chi[1]);
  write_cell_scalars(f, "chi_F", view.fractions.chi[2]);
  write_cell_scalars(f, "theta", view.orientation.theta);
  std::vector<double> flags(view.orientation.indeterminate.begin(),
                            view.orientation.indeterminate.end());
  write_cell_scalars(f, "indeterminate", flags);
  std::vector<double> umag(mesh.elem_count());
  for (int e = 0; e < mesh.elem_count(); ++e) {
    double acc = 0.0;
    for (int n : mesh.elem_nodes(e))
      acc += std::hypot(view.fem.u[2 * n], view.fem.u[2 * n + 1]);
    umag[e] = 0.25 * acc;
  }
  write_cell_scalars(f, "u_mag", umag);

  f << "POINT_DATA " << mesh.node_count() << "\n";
  static const char* kPairNames[kNumPairs] = {"phi_VI", "phi_VF", "phi_IF"};
  for (int q = 0; q < kNumPairs; ++q) {
    f << "SCALARS " << kPairNames[q] << " double 1\nLOOKUP_TABLE default\n";
    for (int k = 0; k < mesh.node_count(); ++k) f << fmt(view.design.phi.phi[q][k]) << "\n";
  }
  f << "SCALARS xi double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < mesh.node_count(); ++k) f << fmt(view.design.aux.xi[k]) << "\n";
  f << "SCALARS eta double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < mesh.node_count(); ++k) f << fmt(view.design.aux.eta[k]) << "\n";
  if (!f) throw IoError("failed writing snapshot: " + path);
}

void write_history_csv(const std::string& path, const OptHistory& history) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open history for writing: " + path);
  f << "step,J_C,g_W,lambda,Lambda,max_dphi,wall_ms\n";
  for (const HistoryRecord& r : history) {
    f << r.step << "," << fmt(r.J_C) << "," << fmt(r.g_W) << "," << fmt(r.lambda) << ","
      << fmt(r.Lambda) << "," << fmt(r.max_dphi) << "," << fmt(r.wall_ms) << "\n";
  }
  if (!f) throw IoError("failed writing history: " + path);
}

void save_design(const std::string& path, const Design& design) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open design file for writing: " + path);
  const int nn = design.phi.node_count();
  f << "fiberopt-design 1\n" << nn << "\n";
  for (int k = 0; k < nn; ++k) {
    f << fmt(design.phi.phi[0][k]) << " " << fmt(design.phi.phi[1][k]) << " "
      << fmt(design.phi.phi[2][k]) << " " << fmt(design.aux.xi[k]) << " "
      << fmt(design.aux.eta[k]) << "\n";
  }
  if (!f) throw IoError("failed writing design file: " + path);
}

Design load_design(const std::string& path, const StructuredMesh& mesh) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open design file: " + path);
  std::string magic;
  int version = 0, nn = 0;
  f >> magic >> version >> nn;
  if (!f || magic != "fiberopt-design" || version != 1)
    throw IoError("not a design file: " + path);
  if (nn != mesh.node_count())
    throw IoError("design file node count " + std::to_string(nn) + " does not match mesh (" +
                  std::to_string(mesh.node_count()) + ")");
  Design d{XlsState(nn), OrientationState(nn)};
  for (int k = 0; k < nn; ++k) {
    f >> d.phi.phi[0][k] >> d.phi.phi[1][k] >> d.phi.phi[2][k] >> d.aux.xi[k] >> d.aux.eta[k];
  }
  if (!f) throw IoError("truncated design file: " + path);
  return d;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory " + path + ": " + ec.message());
}

}  // namespace fiberopt
