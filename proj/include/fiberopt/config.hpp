#pragma once

// Flat key = value run configuration: parsing with line/column diagnostics,
// range validation, defaults, and a full-precision echo that round-trips.

#include <iosfwd>
#include <string>

#include "fiberopt/tensor2d.hpp"

namespace fiberopt {

struct ConvergenceSettings {
  int window = 10;
  double rel_tol = 1e-4;    // relative Lagrangian variation over the window
  double field_tol = 1e-3;  // max nodal level-set change
  double feas_rel = 0.01;   // |g_W| bound relative to W_max
};

struct OptConfig {
  // geometry and mesh
  double width = 2.0;
  double height = 1.0;
  int nx = 160;
  int ny = 80;
  double load_height = 0.1;
  double traction = 1.0;

  MaterialParams mat;

  // weight constraint: absolute bound wins when nonnegative, otherwise the
  // fraction of the all-isotropic weight applies
  double w_max = -1.0;
  double w_max_fraction = 0.4;

  // multiplier gains: negative means "scale from the initial compliance",
  // (4, 2, 0.4, 0.2) x J0 / W_max, so lambda moves on the shadow-price scale
  double k_p = -1.0;
  double k_d = -1.0;
  double k_ip = -1.0;
  double k_id = -1.0;

  // characteristic smoothing and updates
  double w_m = 0.5;
  double eps_chi = 1e-3;
  double tau_ls = -1.0;     // negative -> 1e-4 * width^2
  double tau_theta = -1.0;  // negative -> 1e-4 * width^2
  double alpha_theta = 0.2;
  double step_target = 0.3;  // max |alpha * drive| per level-set step
  double indeterminate_threshold = 0.05;

  // derivative table
  int n_angles = 36;
  std::string table_cache;  // binary cache path; empty disables caching

  // optimization loop
  int max_iters = 400;
  int snapshot_every = 10;
  std::string initial_design = "A";  // A|B|C|D|E or file:<path>
  ConvergenceSettings conv;
  std::string out_dir = "out";
  unsigned long seed = 0;
  int n_sym = 1;

  double domain_area() const { return width * height; }
  double resolved_w_max() const {
    return w_max >= 0.0 ? w_max : w_max_fraction * mat.rho_I * domain_area();
  }
  double resolved_tau_ls() const { return tau_ls >= 0.0 ? tau_ls : 1e-4 * width * width; }
  double resolved_tau_theta() const { return tau_theta >= 0.0 ? tau_theta : 1e-4 * width * width; }
  double resolved_gain(double value, double scale) const {
    return value >= 0.0 ? value : scale / resolved_w_max();
  }
};

/// Parses a config file. Unknown keys raise ValidationError; malformed lines
/// and unparseable values raise ParseError with 1-based line/column; range
/// violations raise ValidationError naming the key.
OptConfig load_config(const std::string& path);

/// Same, from an already-read buffer (used by tests).
OptConfig parse_config(const std::string& text);

/// Re-validates an in-memory config (used after CLI overrides).
void validate_config(const OptConfig& cfg);

/// Writes every key at full precision; parsing the output reproduces the
/// config exactly.
void echo_config(const OptConfig& cfg, std::ostream& os);
std::string config_to_string(const OptConfig& cfg);

}  // namespace fiberopt
