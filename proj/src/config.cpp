#include "fiberopt/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "fiberopt/errors.hpp"

namespace fiberopt {

namespace {

struct KeyBinding {
  std::function<void(OptConfig&, const std::string&, int, int)> set;
  std::function<std::string(const OptConfig&)> get;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, int line, int col) {
  const char* b = s.data();
  const char* e = b + s.size();
  double v = 0.0;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw ParseError("expected a number, got '" + s + "'", line, col);
  return v;
}

long long parse_int(const std::string& s, int line, int col) {
  const char* b = s.data();
  const char* e = b + s.size();
  long long v = 0;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw ParseError("expected an integer, got '" + s + "'", line, col);
  return v;
}

#define DOUBLE_KEY(field)                                                          \
  KeyBinding {                                                                     \
    [](OptConfig& c, const std::string& v, int ln, int col) {                      \
      c.field = parse_double(v, ln, col);                                          \
    },                                                                             \
        [](const OptConfig& c) { return format_double(c.field); }                  \
  }
#define INT_KEY(field)                                                             \
  KeyBinding {                                                                     \
    [](OptConfig& c, const std::string& v, int ln, int col) {                      \
      c.field = static_cast<int>(parse_int(v, ln, col));                           \
    },                                                                             \
        [](const OptConfig& c) { return std::to_string(c.field); }                 \
  }
#define STRING_KEY(field)                                                          \
  KeyBinding {                                                                     \
    [](OptConfig& c, const std::string& v, int, int) { c.field = v; },             \
        [](const OptConfig& c) { return c.field; }                                 \
  }

const std::map<std::string, KeyBinding>& bindings() {
  static const std::map<std::string, KeyBinding> map = {
      {"width", DOUBLE_KEY(width)},
      {"height", DOUBLE_KEY(height)},
      {"nx", INT_KEY(nx)},
      {"ny", INT_KEY(ny)},
      {"load_height", DOUBLE_KEY(load_height)},
      {"traction", DOUBLE_KEY(traction)},
      {"E_I", DOUBLE_KEY(mat.E_I)},
      {"E_V", DOUBLE_KEY(mat.E_V)},
      {"E_fib", DOUBLE_KEY(mat.E_fib)},
      {"E_back", DOUBLE_KEY(mat.E_back)},
      {"nu_I", DOUBLE_KEY(mat.nu_I)},
      {"nu_V", DOUBLE_KEY(mat.nu_V)},
      {"nu_F", DOUBLE_KEY(mat.nu_F)},
      {"rho_V", DOUBLE_KEY(mat.rho_V)},
      {"rho_I", DOUBLE_KEY(mat.rho_I)},
      {"rho_F", DOUBLE_KEY(mat.rho_F)},
      {"w_max", DOUBLE_KEY(w_max)},
      {"w_max_fraction", DOUBLE_KEY(w_max_fraction)},
      {"k_p", DOUBLE_KEY(k_p)},
      {"k_d", DOUBLE_KEY(k_d)},
      {"k_ip", DOUBLE_KEY(k_ip)},
      {"k_id", DOUBLE_KEY(k_id)},
      {"w_m", DOUBLE_KEY(w_m)},
      {"eps_chi", DOUBLE_KEY(eps_chi)},
      {"tau_ls", DOUBLE_KEY(tau_ls)},
      {"tau_theta", DOUBLE_KEY(tau_theta)},
      {"alpha_theta", DOUBLE_KEY(alpha_theta)},
      {"step_target", DOUBLE_KEY(step_target)},
      {"indeterminate_threshold", DOUBLE_KEY(indeterminate_threshold)},
      {"n_angles", INT_KEY(n_angles)},
      {"table_cache", STRING_KEY(table_cache)},
      {"max_iters", INT_KEY(max_iters)},
      {"snapshot_every", INT_KEY(snapshot_every)},
      {"initial_design", STRING_KEY(initial_design)},
      {"conv_window", INT_KEY(conv.window)},
      {"conv_rel_tol", DOUBLE_KEY(conv.rel_tol)},
      {"conv_field_tol", DOUBLE_KEY(conv.field_tol)},
      {"conv_feas_tol", DOUBLE_KEY(conv.feas_rel)},
      {"out_dir", STRING_KEY(out_dir)},
      {"seed",
       KeyBinding{[](OptConfig& c, const std::string& v, int ln, int col) {
                    c.seed = static_cast<unsigned long>(parse_int(v, ln, col));
                  },
                  [](const OptConfig& c) { return std::to_string(c.seed); }}},
      {"n_sym", INT_KEY(n_sym)},
  };
  return map;
}

#undef DOUBLE_KEY
#undef INT_KEY
#undef STRING_KEY

std::string trim(const std::string& s, int* start_col = nullptr) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  if (start_col) *start_col = static_cast<int>(b);
  return s.substr(b, e - b);
}

}  // namespace

OptConfig parse_config(const std::string& text) {
  OptConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const size_t hash = raw.find('#');
    std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    int indent = 0;
    line = trim(line, &indent);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", line_no, indent + 1);
    int kcol = 0;
    const std::string key = trim(line.substr(0, eq), &kcol);
    if (key.empty()) throw ParseError("missing key before '='", line_no, indent + 1);
    int vcol = 0;
    const std::string value = trim(line.substr(eq + 1), &vcol);
    const int value_col = indent + static_cast<int>(eq) + 2 + vcol;
    if (value.empty()) throw ParseError("missing value for '" + key + "'", line_no, value_col);

    const auto& b = bindings();
    const auto it = b.find(key);
    if (it == b.end()) throw ValidationError(key, "unknown key");
    it->second.set(cfg, value, line_no, value_col);
  }
  validate_config(cfg);
  return cfg;
}

OptConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const OptConfig& cfg) {
  auto require = [](bool ok, const char* key, const std::string& msg) {
    if (!ok) throw ValidationError(key, msg);
  };
  require(cfg.width > 0.0, "width", "must be positive");
  require(cfg.height > 0.0, "height", "must be positive");
  require(cfg.nx >= 2, "nx", "must be at least 2");
  require(cfg.ny >= 2, "ny", "must be at least 2");
  require(cfg.load_height > 0.0 && cfg.load_height <= cfg.height, "load_height",
          "must lie in (0, height]");
  require(std::isfinite(cfg.traction), "traction", "must be finite");

  require(cfg.mat.E_I > 0.0, "E_I", "must be positive");
  require(cfg.mat.E_V > 0.0, "E_V", "must be positive");
  require(cfg.mat.E_fib > 0.0, "E_fib", "must be positive");
  require(cfg.mat.E_back > 0.0, "E_back", "must be positive");
  require(cfg.mat.E_back <= cfg.mat.E_fib, "E_back", "must not exceed E_fib");
  require(cfg.mat.nu_I > -1.0 && cfg.mat.nu_I < 0.5, "nu_I", "must lie in (-1, 0.5)");
  require(cfg.mat.nu_V > -1.0 && cfg.mat.nu_V < 0.5, "nu_V", "must lie in (-1, 0.5)");
  require(cfg.mat.nu_F > -1.0 && cfg.mat.nu_F < 0.5, "nu_F", "must lie in (-1, 0.5)");
  require(cfg.mat.rho_V >= 0.0, "rho_V", "must be nonnegative");
  require(cfg.mat.rho_I >= 0.0, "rho_I", "must be nonnegative");
  require(cfg.mat.rho_F >= 0.0, "rho_F", "must be nonnegative");
  require(cfg.mat.rho_V <= cfg.mat.rho_I && cfg.mat.rho_V <= cfg.mat.rho_F, "rho_V",
          "must not exceed the material densities");

  require(cfg.resolved_w_max() > 0.0, "w_max", "resolved weight bound must be positive");
  require(cfg.w_max_fraction > 0.0 && cfg.w_max_fraction <= 1.0, "w_max_fraction",
          "must lie in (0, 1]");

  require(cfg.w_m > 0.0 && cfg.w_m <= 1.0, "w_m", "must lie in (0, 1]");
  require(cfg.eps_chi > 0.0 && cfg.eps_chi < 0.5, "eps_chi", "must lie in (0, 0.5)");
  require(cfg.resolved_tau_ls() >= 0.0, "tau_ls", "must be nonnegative");
  require(cfg.resolved_tau_theta() >= 0.0, "tau_theta", "must be nonnegative");
  require(cfg.alpha_theta > 0.0 && cfg.alpha_theta <= 1.0, "alpha_theta", "must lie in (0, 1]");
  require(cfg.step_target > 0.0, "step_target", "must be positive");
  require(cfg.indeterminate_threshold >= 0.0 && cfg.indeterminate_threshold < 1.0,
          "indeterminate_threshold", "must lie in [0, 1)");

  require(cfg.n_angles >= 8 && cfg.n_angles % 2 == 0, "n_angles", "must be even and at least 8");
  require(cfg.max_iters >= 0, "max_iters", "must be nonnegative");
  require(cfg.snapshot_every >= 1, "snapshot_every", "must be at least 1");

  const std::string& d = cfg.initial_design;
  const bool preset = d.size() == 1 && d[0] >= 'A' && d[0] <= 'E';
  const bool file = d.rfind("file:", 0) == 0 && d.size() > 5;
  require(preset || file, "initial_design", "must be A..E or file:<path>");

  require(cfg.conv.window >= 2, "conv_window", "must be at least 2");
  require(cfg.conv.rel_tol > 0.0, "conv_rel_tol", "must be positive");
  require(cfg.conv.field_tol > 0.0, "conv_field_tol", "must be positive");
  require(cfg.conv.feas_rel > 0.0, "conv_feas_tol", "must be positive");
  require(cfg.n_sym == 1, "n_sym", "only the head-tail symmetric case is supported");

  for (double gain : {cfg.k_p, cfg.k_d, cfg.k_ip, cfg.k_id}) {
    require(std::isfinite(gain), "k_p",
            "gains must be finite (negative selects the automatic scaling)");
  }
}

void echo_config(const OptConfig& cfg, std::ostream& os) {
  // Empty string values are representable only by omission.
  for (const auto& [key, binding] : bindings()) {
    const std::string v = binding.get(cfg);
    if (!v.empty()) os << key << " = " << v << "\n";
  }
}

std::string config_to_string(const OptConfig& cfg) {
  std::ostringstream ss;
  echo_config(cfg, ss);
  return ss.str();
}

}  // namespace fiberopt
