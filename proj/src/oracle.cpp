#include "fiberopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fiberopt/topoderiv.hpp"

namespace fiberopt {

Tensor4 eshelby_closed_form(double nu) {
  const double c1 = (3.0 * nu - 1.0) / 8.0;
  const double c2 = (3.0 - nu) / 8.0;
  Tensor4 S;
  for (int p = 0; p < 3; ++p) {
    const int i = kPairX[p], j = kPairY[p];
    for (int q = 0; q < 3; ++q) {
      const int k = kPairX[q], l = kPairY[q];
      const double d = [](int a, int b) { return a == b ? 1.0 : 0.0; }(i, j);
      const double dkl = k == l ? 1.0 : 0.0;
      const double dik = i == k ? 1.0 : 0.0, djl = j == l ? 1.0 : 0.0;
      const double dil = i == l ? 1.0 : 0.0, djk = j == k ? 1.0 : 0.0;
      S.m[p][q] = c1 * d * dkl + c2 * (dik * djl + dil * djk);
    }
  }
  return S;
}

namespace {

// Area of {u <= x} within a circle of radius r centered at the origin.
double half_area(double x, double r) {
  x = std::clamp(x, -r, r);
  return x * std::sqrt(r * r - x * x) + r * r * std::asin(x / r) + 0.5 * M_PI * r * r;
}

// Area of {u <= x, v <= y} within the same circle.
double corner_area(double x, double y, double r) {
  if (x <= -r || y <= -r) return 0.0;
  if (x >= r && y >= r) return M_PI * r * r;
  if (y < 0.0) return half_area(x, r) - corner_area(x, -y, r);
  if (x < 0.0) return half_area(y, r) - corner_area(-x, y, r);
  x = std::min(x, r);
  y = std::min(y, r);
  if (x * x + y * y >= r * r) return half_area(x, r) + half_area(y, r) - M_PI * r * r;
  const double uc = std::sqrt(r * r - y * y);
  const double hx = 0.5 * (x * std::sqrt(r * r - x * x) + r * r * std::asin(x / r));
  return hx - 0.5 * r * r * std::asin(uc / r) + 0.5 * y * uc + 0.5 * M_PI * r * r + x * y;
}

}  // namespace

double circle_rect_overlap(double cx, double cy, double r, double x0, double y0, double x1,
                           double y1) {
  if (!(r > 0.0) || x1 <= x0 || y1 <= y0) return 0.0;
  return corner_area(x1 - cx, y1 - cy, r) - corner_area(x0 - cx, y1 - cy, r) -
         corner_area(x1 - cx, y0 - cy, r) + corner_area(x0 - cx, y0 - cy, r);
}

double fd_topological_derivative(ElasticitySolver& solver, const std::vector<Tensor4>& base_C,
                                 double base_J, const DiscInsertion& ins) {
  const StructuredMesh& mesh = solver.mesh();
  if (static_cast<int>(base_C.size()) != mesh.elem_count())
    throw std::invalid_argument("baseline stiffness field sized for a different mesh");
  if (!(ins.radius > 0.0)) throw std::invalid_argument("insertion radius must be positive");

  std::vector<Tensor4> C = base_C;
  const double area = mesh.elem_area();
  const int ex0 = std::max(0, static_cast<int>((ins.cx - ins.radius) / mesh.dx()) - 1);
  const int ex1 = std::min(mesh.nx - 1, static_cast<int>((ins.cx + ins.radius) / mesh.dx()) + 1);
  const int ey0 = std::max(0, static_cast<int>((ins.cy - ins.radius) / mesh.dy()) - 1);
  const int ey1 = std::min(mesh.ny - 1, static_cast<int>((ins.cy + ins.radius) / mesh.dy()) + 1);

  bool modified = false;
  for (int ey = ey0; ey <= ey1; ++ey) {
    for (int ex = ex0; ex <= ex1; ++ex) {
      const int e = mesh.elem_id(ex, ey);
      const double x0 = ex * mesh.dx(), y0 = ey * mesh.dy();
      const double w =
          circle_rect_overlap(ins.cx, ins.cy, ins.radius, x0, y0, x0 + mesh.dx(), y0 + mesh.dy()) /
          area;
      if (w <= 0.0) continue;
      if ((ins.target - base_C[e]).max_abs() == 0.0) continue;
      C[e] = base_C[e] * (1.0 - w) + ins.target * w;
      modified = true;
    }
  }
  if (!modified) return 0.0;

  const SolveState state = solver.solve(C);
  return (state.compliance - base_J) / (M_PI * ins.radius * ins.radius);
}

double dense_theta_argmin(const Strain2& E, Phase a, int resolution, const MaterialCatalog& cat,
                          double theta_bg) {
  if (resolution < 2) throw std::invalid_argument("angle resolution must be at least 2");
  const Tensor4 C_bg = cat.stiffness(a, theta_bg);
  const Tensor4 S_bg = eshelby_interior(C_bg);
  double best = 0.0;
  double best_val = 0.0;
  for (int j = 0; j < resolution; ++j) {
    const double theta = M_PI * j / resolution;
    const Tensor4 A = elastic_moment_with(S_bg, C_bg, cat.fiber_at(theta));
    const double v = td_compliance(E, A);
    if (j == 0 || v < best_val) {
      best_val = v;
      best = theta;
    }
  }
  return best;
}

}  // namespace fiberopt
