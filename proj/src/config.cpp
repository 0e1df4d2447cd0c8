#include "secflow/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace secflow {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& origin, int line, const std::string& what) {
  fail(Err::BadConfig, origin + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, const std::string& origin, int line) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(x)) throw std::invalid_argument("not finite");
    return x;
  } catch (const std::exception&) {
    bad(origin, line, "expected a number, got '" + v + "'");
  }
}

long parse_long(const std::string& v, const std::string& origin, int line) {
  try {
    size_t used = 0;
    long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    bad(origin, line, "expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& origin, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(origin, line, "expected true/false, got '" + v + "'");
}

std::vector<double> parse_doubles(const std::string& v, const std::string& origin, int line) {
  std::vector<double> out;
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, origin, line));
  return out;
}

/// Either a whitespace list of values or an inclusive range "start:stop:step".
std::vector<double> parse_grid(const std::string& v, const std::string& origin, int line) {
  if (v.find(':') != std::string::npos) {
    std::string t = v;
    for (char& c : t)
      if (c == ':') c = ' ';
    std::vector<double> parts = parse_doubles(t, origin, line);
    if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0])
      bad(origin, line, "range must be start:stop:step with step > 0");
    std::vector<double> out;
    for (double x = parts[0]; x <= parts[1] + 1e-9 * parts[2]; x += parts[2])
      out.push_back(x);
    return out;
  }
  return parse_doubles(v, origin, line);
}

Vec3 parse_vec3(const std::string& v, const std::string& origin, int line) {
  std::vector<double> d = parse_doubles(v, origin, line);
  if (d.size() != 3) bad(origin, line, "expected 3 numbers");
  return Vec3(d[0], d[1], d[2]);
}

Mat3 parse_mat3(const std::string& v, const std::string& origin, int line) {
  std::vector<std::string> rows;
  std::string cur;
  std::istringstream in(v);
  std::string piece;
  while (std::getline(in, piece, ';')) rows.push_back(piece);
  if (rows.size() != 3) bad(origin, line, "matrix needs 3 rows separated by ';'");
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    Vec3 row = parse_vec3(trim(rows[i]), origin, line);
    m.row(i) = row.transpose();
  }
  return m;
}

std::vector<Monomial> parse_monomials(const std::string& v, const std::string& origin,
                                      int line) {
  std::vector<Monomial> out;
  std::istringstream in(v);
  std::string piece;
  while (std::getline(in, piece, ';')) {
    std::string t = trim(piece);
    if (t.empty()) continue;
    std::vector<double> d = parse_doubles(t, origin, line);
    if (d.size() != 4) bad(origin, line, "each monomial is 'c i j k'");
    for (int k = 1; k < 4; ++k)
      if (d[k] != std::floor(d[k]) || d[k] < 0)
        bad(origin, line, "monomial exponents must be nonnegative integers");
    out.push_back({d[0], static_cast<int>(d[1]), static_cast<int>(d[2]),
                   static_cast<int>(d[3])});
  }
  return out;
}

Box3 parse_box(const std::string& v, const std::string& origin, int line) {
  std::vector<double> d = parse_doubles(v, origin, line);
  if (d.size() != 6) bad(origin, line, "box is 'x0 x1 y0 y1 z0 z1'");
  Box3 b{Vec3(d[0], d[2], d[4]), Vec3(d[1], d[3], d[5])};
  for (int i = 0; i < 3; ++i)
    if (!(b.lo[i] < b.hi[i])) bad(origin, line, "box must have lo < hi on every axis");
  return b;
}

void require(bool ok, const std::string& origin, const std::string& what) {
  if (!ok) fail(Err::BadConfig, origin + ": " + what);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig c;
  bool grid_given = false;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') bad(origin, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "field" && section != "integrator" && section != "analysis" &&
          section != "output")
        bad(origin, line, "unknown section [" + section + "]");
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) bad(origin, line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty() || val.empty()) bad(origin, line, "empty key or value");
    if (section.empty()) bad(origin, line, "key '" + key + "' outside any section");

    if (section == "field") {
      if (key == "kind") c.field_kind = val;
      else if (key == "sigma") c.sigma = parse_double(val, origin, line);
      else if (key == "rho") c.rho = parse_double(val, origin, line);
      else if (key == "beta") c.beta = parse_double(val, origin, line);
      else if (key == "A") c.A = parse_mat3(val, origin, line);
      else if (key == "poly_x") c.poly[0] = parse_monomials(val, origin, line);
      else if (key == "poly_y") c.poly[1] = parse_monomials(val, origin, line);
      else if (key == "poly_z") c.poly[2] = parse_monomials(val, origin, line);
      else if (key == "box") c.box = parse_box(val, origin, line);
      else bad(origin, line, "unknown key '" + key + "' in [field]");
    } else if (section == "integrator") {
      if (key == "rel_tol") c.integ.rel_tol = parse_double(val, origin, line);
      else if (key == "abs_tol") c.integ.abs_tol = parse_double(val, origin, line);
      else if (key == "max_step") c.integ.max_step = parse_double(val, origin, line);
      else if (key == "max_steps") c.integ.max_steps = parse_long(val, origin, line);
      else if (key == "escape_radius") c.integ.escape_radius = parse_double(val, origin, line);
      else bad(origin, line, "unknown key '" + key + "' in [integrator]");
    } else if (section == "analysis") {
      if (key == "seed_point") c.seed_point = parse_vec3(val, origin, line);
      else if (key == "transient") c.transient = parse_double(val, origin, line);
      else if (key == "n") c.n = static_cast<int>(parse_long(val, origin, line));
      else if (key == "spacing") c.spacing = parse_double(val, origin, line);
      else if (key == "frame_eps") c.frame_eps = parse_double(val, origin, line);
      else if (key == "T_grid") { c.T_grid = parse_grid(val, origin, line); grid_given = true; }
      else if (key == "split_T") c.split_T = parse_double(val, origin, line);
      else if (key == "k_pow") c.power.k_pow = static_cast<int>(parse_long(val, origin, line));
      else if (key == "dir_tol") c.power.dir_tol = parse_double(val, origin, line);
      else if (key == "angle_floor") c.power.angle_floor = parse_double(val, origin, line);
      else if (key == "threshold") c.check.threshold = parse_double(val, origin, line);
      else if (key == "pass_fraction_min")
        c.check.pass_fraction_min = parse_double(val, origin, line);
      else if (key == "min_converged") c.min_converged = parse_double(val, origin, line);
      else if (key == "sing_tol") c.sing_tol = parse_double(val, origin, line);
      else if (key == "chart_eps") c.chart_eps = parse_double(val, origin, line);
      else if (key == "wss_radius") c.wss.radius = parse_double(val, origin, line);
      else if (key == "wss_backflow") c.wss.backflow = parse_double(val, origin, line);
      else if (key == "wss_points") c.wss.n_pts = static_cast<int>(parse_long(val, origin, line));
      else if (key == "wss_threshold") c.wss.sep_threshold = parse_double(val, origin, line);
      else if (key == "contraction_mode") c.contraction_mode = val;
      else if (key == "pliss_tau0") c.pliss_tau0 = static_cast<int>(parse_long(val, origin, line));
      else if (key == "pliss_gamma") c.pliss_gamma = parse_double(val, origin, line);
      else if (key == "lyap_T") c.lyap_T = parse_double(val, origin, line);
      else if (key == "lyap_dt") c.lyap_dt = parse_double(val, origin, line);
      else if (key == "orbit_T") c.orbit_T = parse_double(val, origin, line);
      else if (key == "orbit_dt") c.orbit_dt = parse_double(val, origin, line);
      else if (key == "orbit_jacobian") c.orbit_jacobian = parse_bool(val, origin, line);
      else if (key == "poincare_t") c.poincare_t = parse_double(val, origin, line);
      else if (key == "poincare_n") c.poincare_n = static_cast<int>(parse_long(val, origin, line));
      else if (key == "blowup_t") c.blowup_t = parse_double(val, origin, line);
      else if (key == "blowup_radii") c.blowup_radii = parse_grid(val, origin, line);
      else if (key == "blowup_dir") {
        c.blowup_dir = val;
        if (val != "auto") c.blowup_dir_vec = parse_vec3(val, origin, line);
      }
      else if (key == "rng_seed")
        c.rng_seed = static_cast<unsigned long>(parse_long(val, origin, line));
      else bad(origin, line, "unknown key '" + key + "' in [analysis]");
    } else {  // output
      if (key == "out_dir") c.out_dir = val;
      else if (key == "details") c.details = parse_bool(val, origin, line);
      else if (key == "jobs") c.jobs = static_cast<int>(parse_long(val, origin, line));
      else bad(origin, line, "unknown key '" + key + "' in [output]");
    }
  }

  if (!grid_given)
    for (int k = 1; k <= 40; ++k) c.T_grid.push_back(0.25 * k);

  require(c.field_kind == "lorenz" || c.field_kind == "linear" ||
              c.field_kind == "polynomial",
          origin, "field kind must be lorenz, linear or polynomial");
  require(c.integ.rel_tol > 0 && c.integ.abs_tol > 0, origin, "tolerances must be positive");
  require(c.integ.max_step > 0 && c.integ.max_steps >= 1 && c.integ.escape_radius > 0,
          origin, "integrator limits must be positive");
  require(c.transient >= 0, origin, "transient must be nonnegative");
  require(c.n >= 1, origin, "n must be at least 1");
  require(c.spacing > 0, origin, "spacing must be positive");
  require(c.frame_eps > 0, origin, "frame_eps must be positive");
  require(!c.T_grid.empty(), origin, "T_grid must not be empty");
  for (double T : c.T_grid) require(T > 0, origin, "T_grid entries must be positive");
  require(c.split_T > 0, origin, "split_T must be positive");
  require(c.power.k_pow >= 1, origin, "k_pow must be at least 1");
  require(c.power.dir_tol > 0 && c.power.angle_floor >= 0, origin,
          "power-iteration tolerances must be positive");
  require(c.check.threshold > 0, origin, "threshold must be positive");
  require(c.check.pass_fraction_min > 0 && c.check.pass_fraction_min <= 1, origin,
          "pass_fraction_min must be in (0, 1]");
  require(c.min_converged >= 0 && c.min_converged <= 1, origin,
          "min_converged must be in [0, 1]");
  require(c.sing_tol > 0 && c.chart_eps > 0, origin,
          "sing_tol and chart_eps must be positive");
  require(c.wss.radius > 0 && c.wss.backflow >= 0 && c.wss.n_pts >= 2 &&
              c.wss.sep_threshold > 0,
          origin, "wss parameters out of range");
  require(c.contraction_mode == "psi" || c.contraction_mode == "psi_rescaled" ||
              c.contraction_mode == "tangent",
          origin, "contraction_mode must be psi, psi_rescaled or tangent");
  require(c.pliss_tau0 >= 1, origin, "pliss_tau0 must be a positive count");
  require(c.pliss_gamma > 1, origin, "pliss_gamma must exceed 1");
  require(c.lyap_T > 0 && c.lyap_dt > 0 && c.lyap_dt <= c.lyap_T, origin,
          "lyapunov times out of range");
  require(c.orbit_T > 0 && c.orbit_dt > 0 && c.orbit_dt <= c.orbit_T, origin,
          "orbit times out of range");
  require(c.poincare_t != 0 && c.poincare_n >= 1, origin, "poincare parameters out of range");
  require(c.blowup_t != 0, origin, "blowup_t must be nonzero");
  require(!c.blowup_radii.empty(), origin, "blowup_radii must not be empty");
  for (double r : c.blowup_radii)
    require(r > 0, origin, "blowup_radii entries must be positive");
  require(c.jobs >= 1, origin, "jobs must be at least 1");

  c.make_field();  // validates field parameters
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::BadConfig, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

VectorField RunConfig::make_field() const {
  if (field_kind == "lorenz") return VectorField::lorenz(sigma, rho, beta);
  if (field_kind == "linear") return VectorField::linear(A);
  return VectorField::polynomial(poly);
}

SampleConfig RunConfig::make_sample() const {
  SampleConfig sc;
  sc.seed = seed_point;
  sc.transient = transient;
  sc.n = n;
  sc.spacing = spacing;
  sc.frame_eps = frame_eps;
  sc.jobs = jobs;
  return sc;
}

VerdictConfig RunConfig::make_verdict() const {
  VerdictConfig vc;
  vc.box = box;
  vc.sample = make_sample();
  vc.power = power;
  vc.split_T = split_T;
  vc.T_grid = T_grid;
  vc.check = check;
  vc.min_converged = min_converged;
  vc.sing_tol = sing_tol;
  vc.chart_eps = chart_eps;
  vc.wss = wss;
  vc.integ = integ;
  return vc;
}

EMode RunConfig::make_emode() const {
  if (contraction_mode == "psi") return EMode::Psi;
  if (contraction_mode == "tangent") return EMode::Tangent;
  return EMode::PsiRescaled;
}

}  // namespace secflow
