// Acceptance gate: every release-blocking property in one binary, one line
// of output per check, exit code = number of failures.  Each check states
// its tolerance inline; timings are wall clock.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "secflow/blowup.hpp"
#include "secflow/config.hpp"
#include "secflow/hyperbolicity.hpp"
#include "secflow/poincare.hpp"

namespace fs = std::filesystem;
using namespace secflow;

namespace {

const IntegratorConfig kCfg;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<Vec3> attractor_points(int n, unsigned seed) {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dt(0.3, 1.7);
  std::vector<Vec3> pts;
  Vec3 p = flow(f, Vec3(1, 1, 1), 30.0, kCfg);
  for (int i = 0; i < n; ++i) {
    p = flow(f, p, dt(rng), kCfg);
    pts.push_back(p);
  }
  return pts;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// 1. Saddle closed forms: psi_{ln 2} = diag(1/8, 1/2) and the rescaled
// variant diag(1/32, 1/8) at 1e-8; first passing domination window within
// one 0.05 grid step of ln(2)/2, sectional within one step of ln 2.
Outcome saddle_closed_forms() {
  VectorField f = VectorField::linear(Vec3(-3, -1, 2).asDiagonal());
  double t = std::log(2.0);

  Mat2 psi = linear_poincare(f, Vec3(0, 0, 1), t, kCfg).mat;
  Mat2 want;
  want << 0.125, 0, 0, 0.5;
  double e_psi = (psi - want).norm();

  Mat2 star = rescaled_linear_poincare(f, Vec3(0, 0, 1), t, kCfg).mat;
  Mat2 want_star;
  want_star << 1.0 / 32, 0, 0, 0.125;
  double e_star = (star - want_star).norm();

  SampleConfig sc;
  sc.seed = Vec3(0, 0, 1e-4);
  sc.transient = 0;
  sc.n = 16;
  sc.spacing = 0.05;
  sc.lead = 16 * 10 + 20;
  IntegratorConfig integ = kCfg;
  integ.escape_radius = 1e13;
  CocycleChain chain = build_chain(f, sc, integ);
  PowerConfig pc;
  pc.k_pow = 16;
  pc.dir_tol = 1e-6;
  SplittingEstimate split = estimate_splitting(chain, 0.5, pc);
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(0.05 * k);
  CheckConfig cc;
  double T_dom = check_domination(chain, split, grid, false, cc).T_all;
  double T_sec = check_sectional_expansion(chain, split, grid, cc).T_all;

  bool ok = e_psi < 1e-8 && e_star < 1e-8 &&
            std::abs(T_dom - t / 2) <= 0.05 && std::abs(T_sec - t) <= 0.05;
  return {ok, "|psi-diag| " + num(e_psi) + ", |psi*-diag| " + num(e_star) +
                  ", T_dom " + num(T_dom) + " vs " + num(t / 2) + ", T_sec " +
                  num(T_sec) + " vs " + num(t)};
}

// 2. Variational Jacobian vs central differences on 100 random
// (point, t) pairs, t in [0.1, 1]: relative error < 1e-4 at h = 1e-3 and
// observed order >= 1.9 under h-halving.
Outcome tangent_flow_vs_fd() {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> time(0.1, 1.0);
  std::vector<Vec3> pts = attractor_points(100, 99);
  double worst_rel = 0;
  std::vector<double> orders;
  for (const Vec3& x : pts) {
    double t = time(rng);
    Mat3 exact = tangent_flow(f, x, t, kCfg).deriv;
    double e1 = (flow_jacobian_fd(f, x, t, 2e-3, kCfg) - exact).norm();
    double e2 = (flow_jacobian_fd(f, x, t, 1e-3, kCfg) - exact).norm();
    worst_rel = std::max(worst_rel, e2 / exact.norm());
    if (e2 > 1e-12 * exact.norm()) orders.push_back(std::log2(e1 / e2));
  }
  std::sort(orders.begin(), orders.end());
  double med = orders[orders.size() / 2];
  bool ok = worst_rel < 1e-4 && med >= 1.9;
  return {ok, "worst rel " + num(worst_rel) + ", median FD order " + num(med)};
}

// 3. The section holonomy differentiated at the zero vector reproduces the
// normal cocycle to relative 1e-4 on 50 samples.
Outcome section_derivative_at_zero() {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  double t = 0.6, worst = 0;
  for (const Vec3& x : attractor_points(50, 59)) {
    Mat2 psi = linear_poincare(f, x, t, kCfg).mat;
    Mat2 d;
    for (int c = 0; c < 2; ++c) {
      Vec2 e = Vec2::Zero();
      e[c] = 1e-3;
      Vec2 plus = sectional_poincare(f, x, e, t, kCfg).v;
      Vec2 minus = sectional_poincare(f, x, -e, t, kCfg).v;
      d.col(c) = (plus - minus) / 2e-3;
    }
    worst = std::max(worst, (d - psi).norm() / psi.norm());
  }
  return {worst < 1e-4, "worst rel " + num(worst) + " over 50 samples"};
}

// 4. The rescaled cocycle near the Lorenz origin approaches the fiber
// formula along the unstable direction: errors decrease monotonically over
// radii 1e-2..1e-5 and the two-point extrapolation lands within 1e-6.
Outcome extension_limit() {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  BlowupChart c = make_chart(f, Vec3::Zero(), 5.0);
  Vec3 u = c.sigma.eigenvectors[2];
  std::vector<double> radii = {1e-2, 1e-3, 1e-4, 1e-5};
  bool ok = true;
  std::string detail;
  for (double t : {0.25, 0.5}) {
    ConvergenceReport rep = verify_extension_limit(c, u, t, radii, kCfg);
    bool clean = rep.usable && rep.monotone;
    for (const std::string& s : rep.failures) clean = clean && s.empty();
    ok = ok && clean && rep.extrapolated_error < 1e-6;
    if (!detail.empty()) detail += "; ";
    detail += "t " + num(t) + ": slope " + num(rep.slope) + ", extrap err " +
              num(rep.extrapolated_error);
  }
  return {ok, detail};
}

// 5. The speed ratio at radius s converges linearly to its fiber value:
// log-log slope >= 0.9 over two decades.
Outcome speed_ratio_slope() {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  BlowupChart c = make_chart(f, Vec3::Zero(), 0.5);
  Vec3 u = c.sigma.eigenvectors[2];
  double t = 0.25;
  double fiber = speed_ratio_extension(c, u, t);
  std::vector<double> radii = {1e-2, 1e-3, 1e-4};
  std::vector<double> errs;
  for (double s : radii) {
    Vec3 xs = s * u;
    double r = f(xs).norm() / f(flow(f, xs, t, kCfg)).norm();
    errs.push_back(std::abs(r - fiber));
  }
  bool mono = errs[1] < errs[0] && errs[2] < errs[1];
  double slope = std::log(errs[0] / errs[2]) / std::log(radii[0] / radii[2]);
  return {mono && slope >= 0.9, "slope " + num(slope)};
}

// 6. Origin spectrum ((-11 - sqrt(1201))/2, -8/3, (-11 + sqrt(1201))/2) to
// 1e-9, flagged lorenz-like; the wing equilibria carry a complex pair.
Outcome lorenz_singularities() {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  SingularitySearch search =
      find_singularities(f, {Vec3(-50, -50, -50), Vec3(50, 50, 50)});
  if (search.roots.size() != 3) return {false, "found " + std::to_string(search.roots.size()) + " zeros"};

  SingularityInfo origin = classify_singularity(f, search.roots[1]);
  double rt = std::sqrt(1201.0);
  std::array<double, 3> want = {(-11 - rt) / 2, -8.0 / 3.0, (-11 + rt) / 2};
  double worst = 0;
  for (int i = 0; i < 3; ++i) {
    worst = std::max(worst, std::abs(origin.eigenvalues[i].real() - want[i]));
    worst = std::max(worst, std::abs(origin.eigenvalues[i].imag()));
  }
  SingularityInfo wing_a = classify_singularity(f, search.roots[0]);
  SingularityInfo wing_b = classify_singularity(f, search.roots[2]);
  bool ok = worst < 1e-9 && origin.lorenz_like_forward && !wing_a.simple_real &&
            !wing_b.simple_real;
  return {ok, "worst eigenvalue error " + num(worst)};
}

// 7. The linear-time Pliss scan equals the quadratic reference on 500
// random sequences, as sets, exactly.
Outcome pliss_vs_brute_force() {
  std::mt19937_64 rng(20240817);
  std::uniform_int_distribution<int> len(0, 200);
  std::uniform_real_distribution<double> val(-3.0, 1.0);
  const int tau0s[] = {1, 2, 5};
  const double gammas[] = {1.05, 1.5};
  for (int trial = 0; trial < 500; ++trial) {
    int n = len(rng);
    std::vector<double> a(n);
    for (double& x : a) x = val(rng);
    int tau0 = tau0s[trial % 3];
    double gamma = gammas[(trial / 3) % 2];
    double shift = tau0 * std::log(gamma);

    std::vector<int> slow;
    for (int i = 0; i < n; ++i) {
      bool good = true;
      double sum = 0;
      for (int m = 1; i + m <= n && good; ++m) {
        sum += a[i + m - 1];
        good = sum <= -m * shift;
      }
      if (good) slow.push_back(i);
    }
    if (pliss_strings(a, tau0, gamma) != slow)
      return {false, "mismatch at trial " + std::to_string(trial)};
  }
  return {true, "500 random sequences, exact agreement"};
}

// 8. Full Lorenz pipeline from the bundled profile: verdict pass with a
// common window T <= 5 holding on at least 99% of 1000 samples for
// domination, rescaled E-contraction and sectional expansion, and the
// tangent-side equivalence disagreeing on at most 1%.
Outcome lorenz_verdict() {
  RunConfig cfg = parse_config(std::string(SECFLOW_DATA_DIR) + "/lorenz.cfg");
  cfg.jobs = 1;
  SingularHyperbolicityReport rep =
      singular_hyperbolicity_report(cfg.make_field(), cfg.make_verdict());
  const DirectionAttempt& att = rep.used_backward ? *rep.backward : rep.forward;

  bool ok = rep.verdict == Verdict::Pass && rep.common_T <= 5.0 &&
            att.n_samples == 1000;
  double frac_min = 1.0;
  for (const GridCheckReport* r : {&att.domination, &att.e_rescaled, &att.sectional}) {
    double frac = 0;
    for (const GridCell& cell : r->grid)
      if (std::abs(cell.T - rep.common_T) < 1e-9) frac = cell.pass_fraction;
    frac_min = std::min(frac_min, frac);
  }
  ok = ok && frac_min >= 0.99;
  double disagree = att.mixed.n_checked > 0 ? 1.0 - att.mixed.agreement : 1.0;
  ok = ok && disagree <= 0.01;
  return {ok, std::string("verdict ") + verdict_name(rep.verdict) + ", common T " +
                  num(rep.common_T) + ", min fraction " + num(frac_min) +
                  ", mixed disagreement " + num(disagree)};
}

// 9. Composition laws at 1e-8: the normal cocycle and its rescaling over
// consecutive legs, the rescaled holonomy as a local flow, and the
// identification projection (identity at the base, chain composition,
// invariance under the local sectional flow).
Outcome composition_laws() {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  IntegratorConfig tight = kCfg;
  tight.rel_tol = 1e-12;
  tight.abs_tol = 1e-14;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> dt(0.2, 1.0);
  double worst_cocycle = 0;
  for (const Vec3& x : attractor_points(10, 43)) {
    double t = dt(rng), s = dt(rng);
    Vec3 mid = flow(f, x, t, tight);
    Mat2 once = linear_poincare(f, x, t + s, tight).mat;
    Mat2 legs = linear_poincare(f, mid, s, tight).mat * linear_poincare(f, x, t, tight).mat;
    worst_cocycle = std::max(worst_cocycle, (once - legs).norm() / once.norm());
    Mat2 ronce = rescaled_linear_poincare(f, x, t + s, tight).mat;
    Mat2 rlegs = rescaled_linear_poincare(f, mid, s, tight).mat *
                 rescaled_linear_poincare(f, x, t, tight).mat;
    worst_cocycle = std::max(worst_cocycle, (ronce - rlegs).norm() / ronce.norm());
  }

  std::uniform_real_distribution<double> short_dt(0.15, 0.45);
  std::normal_distribution<double> g;
  double worst_holonomy = 0;
  int usable = 0;
  for (const Vec3& x : attractor_points(25, 67)) {
    double t = short_dt(rng), s = short_dt(rng);
    Vec2 u(g(rng), g(rng));
    u *= 0.01 / u.norm();
    try {
      SectionMapResult first = rescaled_sectional_poincare(f, x, u, t, kCfg);
      if (first.v.norm() >= 0.05) continue;
      Vec3 mid = flow(f, x, t, kCfg);
      SectionMapResult second = rescaled_sectional_poincare(f, mid, first.v, s, kCfg);
      SectionMapResult once = rescaled_sectional_poincare(f, x, u, t + s, kCfg);
      worst_holonomy = std::max(worst_holonomy, (once.v - second.v).norm());
      ++usable;
    } catch (const FlowError&) {
    }
  }

  double worst_ident = 0;
  int usable_ident = 0;
  SectionConfig sec;
  sec.s_max = 0.1;
  for (const Vec3& x : attractor_points(12, 79)) {
    Vec3 y = flow(f, x, -0.04, kCfg);
    Vec2 u(0.004, -0.003);
    try {
      Vec2 base = identification_project(f, x, x, u, kCfg).v;
      worst_ident = std::max(worst_ident, (base - u).norm());
      Vec2 before = identification_project(f, x, y, u, kCfg, sec).v;
      SectionMapResult moved = rescaled_sectional_poincare(f, y, u, 0.08, kCfg);
      Vec2 after =
          identification_project(f, x, flow(f, y, 0.08, kCfg), moved.v, kCfg, sec).v;
      worst_ident = std::max(worst_ident, (before - after).norm());
      ++usable_ident;
    } catch (const FlowError&) {
    }
  }

  bool ok = worst_cocycle <= 1e-8 && usable >= 15 && worst_holonomy <= 1e-8 &&
            usable_ident >= 8 && worst_ident <= 1e-8;
  return {ok, "cocycle " + num(worst_cocycle) + ", holonomy " + num(worst_holonomy) +
                  " (" + std::to_string(usable) + " legs), identification " +
                  num(worst_ident) + " (" + std::to_string(usable_ident) + " legs)"};
}

// 10. Rerunning the full pipeline, and running it with a different worker
// count, leaves byte-identical report files.
Outcome byte_determinism() {
  fs::path base = fs::temp_directory_path() / "secflow_acceptance";
  fs::remove_all(base);
  auto run = [&](const std::string& extra, const std::string& sub) -> std::string {
    fs::path dir = base / sub;
    std::string cmd = std::string(SECFLOW_CLI_PATH) + " verdict --config " +
                      std::string(SECFLOW_DATA_DIR) + "/lorenz.cfg --out " +
                      dir.string() + extra + " >/dev/null 2>&1";
    if (std::system(cmd.c_str()) == -1) return "";
    std::ifstream in(dir / "verdict.json", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string first = run("", "a");
  std::string second = run("", "b");
  std::string serial = run(" --jobs 1", "c");
  std::string parallel = run(" --jobs 8", "d");
  bool ok = !first.empty() && first == second && !serial.empty() && serial == parallel;
  return {ok, "report " + std::to_string(first.size()) + " bytes, rerun " +
                  (first == second ? "identical" : "DIFFERS") + ", jobs 1 vs 8 " +
                  (serial == parallel ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Check> checks = {
      {"saddle closed forms", 1, saddle_closed_forms},
      {"tangent flow vs finite differences", 30, tangent_flow_vs_fd},
      {"section derivative at zero", 60, section_derivative_at_zero},
      {"fiber extension limit", 10, extension_limit},
      {"speed ratio slope", 10, speed_ratio_slope},
      {"lorenz singularities", 10, lorenz_singularities},
      {"pliss scan vs brute force", 5, pliss_vs_brute_force},
      {"lorenz singular-hyperbolicity verdict", 120, lorenz_verdict},
      {"composition laws", 60, composition_laws},
      {"byte determinism", 120, byte_determinism},
  };

  int failures = 0;
  for (size_t i = 0; i < checks.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = checks[i].fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > checks[i].budget_s) {
      out.pass = false;
      out.detail += " [over budget " + num(checks[i].budget_s) + "s]";
    }
    if (!out.pass) ++failures;
    std::printf("%s %2zu %-40s %6.2fs  %s\n", out.pass ? "PASS" : "FAIL", i + 1,
                checks[i].name, secs, out.detail.c_str());
  }
  std::printf("%d/%zu passed\n", static_cast<int>(checks.size()) - failures,
              checks.size());
  return failures;
}
