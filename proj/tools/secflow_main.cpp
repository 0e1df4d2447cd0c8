#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "secflow/blowup.hpp"
#include "secflow/chain.hpp"
#include "secflow/config.hpp"
#include "secflow/hyperbolicity.hpp"
#include "secflow/poincare.hpp"
#include "secflow/report.hpp"

namespace fs = std::filesystem;
using namespace secflow;

namespace {

struct Output {
  std::string name;     // file name under out_dir
  std::string content;  // full bytes, written in one go
};

struct CommandResult {
  int exit_code = 0;
  std::vector<Output> files;
};

std::string wrap_report(const RunConfig& cfg, const Json& report) {
  return dump_json(Json{{"config", json_of(cfg)}, {"report", report}});
}

/// Chain plus splitting sized so every reported sample has full windows for
/// the largest grid time and the whole power-iteration history.
struct ChainBundle {
  CocycleChain chain;
  SplittingEstimate split;
};

int stride_of(double T, double spacing) {
  int m = static_cast<int>(std::llround(T / spacing));
  if (m < 1 || std::abs(m * spacing - T) > 1e-9 * std::max(1.0, T))
    fail(Err::BadConfig,
         "T = " + std::to_string(T) + " is not a positive multiple of spacing");
  return m;
}

ChainBundle make_bundle(const VectorField& f, const RunConfig& cfg) {
  int max_stride = 1;
  for (double T : cfg.T_grid) max_stride = std::max(max_stride, stride_of(T, cfg.spacing));
  int split_stride = stride_of(cfg.split_T, cfg.spacing);
  SampleConfig sc = cfg.make_sample();
  sc.lead = cfg.power.k_pow * split_stride + max_stride;
  ChainBundle b{build_chain(f, sc, cfg.integ), {}};
  b.split = estimate_splitting(b.chain, cfg.split_T, cfg.power);
  return b;
}

CommandResult cmd_classify(const VectorField& f, const RunConfig& cfg) {
  SingularitySearch search = find_singularities(f, cfg.box, cfg.sing_tol);
  Json roots = Json::array();
  Json sings = Json::array();
  for (const Vec3& r : search.roots) {
    roots.push_back(Json::array({r[0], r[1], r[2]}));
    sings.push_back(json_of(classify_singularity(f, r, cfg.sing_tol, 10 * cfg.sing_tol)));
  }
  Json rep{{"roots", roots},
           {"skipped_seeds", search.skipped_seeds},
           {"singularities", sings}};
  return {0, {{"classify.json", wrap_report(cfg, rep)}}};
}

CommandResult cmd_orbit(const VectorField& f, const RunConfig& cfg) {
  int steps = static_cast<int>(std::llround(cfg.orbit_T / cfg.orbit_dt));
  steps = std::max(steps, 1);
  std::string csv = "t,x,y,z";
  if (cfg.orbit_jacobian)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        csv += ",j" + std::to_string(i) + std::to_string(j);
  csv += "\n";

  Vec3 p = cfg.seed_point;
  Mat3 J = Mat3::Identity();
  for (int k = 0; k <= steps; ++k) {
    csv += format_num(k * cfg.orbit_dt) + "," + format_num(p[0]) + "," +
           format_num(p[1]) + "," + format_num(p[2]);
    if (cfg.orbit_jacobian)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) csv += "," + format_num(J(i, j));
    csv += "\n";
    if (k == steps) break;
    if (cfg.orbit_jacobian) {
      TangentFlow tf = tangent_flow(f, p, cfg.orbit_dt, cfg.integ);
      p = tf.point;
      J = tf.deriv * J;
    } else {
      p = flow(f, p, cfg.orbit_dt, cfg.integ);
    }
  }
  return {0, {{"orbit.csv", std::move(csv)}}};
}

CommandResult cmd_poincare(const VectorField& f, const RunConfig& cfg) {
  Vec3 x = cfg.transient != 0.0 ? flow(f, cfg.seed_point, cfg.transient, cfg.integ)
                                : cfg.seed_point;
  Json rows = Json::array();
  for (int i = 0; i < cfg.poincare_n; ++i) {
    Json row{{"t", cfg.transient + i * cfg.spacing}};
    try {
      row["plain"] = json_of(linear_poincare(f, x, cfg.poincare_t, cfg.integ, cfg.frame_eps));
      row["rescaled"] =
          json_of(rescaled_linear_poincare(f, x, cfg.poincare_t, cfg.integ, cfg.frame_eps));
    } catch (const FlowError& e) {
      if (e.code() == Err::BadConfig) throw;
      row["error"] = err_name(e.code());
    }
    rows.push_back(std::move(row));
    if (i + 1 < cfg.poincare_n) x = flow(f, x, cfg.spacing, cfg.integ);
  }
  Json rep{{"t_window", cfg.poincare_t}, {"rows", rows}};
  return {0, {{"poincare.json", wrap_report(cfg, rep)}}};
}

CommandResult cmd_blowup_verify(const VectorField& f, const RunConfig& cfg) {
  SingularitySearch search = find_singularities(f, cfg.box, cfg.sing_tol);
  std::vector<SingularityInfo> infos;
  for (const Vec3& r : search.roots)
    infos.push_back(classify_singularity(f, r, cfg.sing_tol, 10 * cfg.sing_tol));

  const SingularityInfo* chosen = nullptr;
  for (const SingularityInfo& s : infos)
    if (s.lorenz_like_forward) {
      chosen = &s;
      break;
    }
  if (!chosen)
    for (const SingularityInfo& s : infos)
      if (s.hyperbolic) {
        chosen = &s;
        break;
      }
  if (!chosen) {
    Json rep{{"error", "no hyperbolic zero of the field inside the box"}};
    return {1, {{"blowup.json", wrap_report(cfg, rep)}}};
  }

  Vec3 u;
  if (cfg.blowup_dir == "auto") {
    int pick = -1;
    for (int i = 2; i >= 0; --i)
      if (chosen->eig_real[i] && chosen->eigenvalues[i].real() > 0) {
        pick = i;
        break;
      }
    if (pick < 0) {
      Json rep{{"sigma", json_of(*chosen)},
               {"error", "no real expanding eigendirection to use as blowup_dir"}};
      return {1, {{"blowup.json", wrap_report(cfg, rep)}}};
    }
    u = chosen->eigenvectors[pick];
  } else {
    u = cfg.blowup_dir_vec.normalized();
  }

  std::vector<double> radii = cfg.blowup_radii;
  std::sort(radii.begin(), radii.end(), std::greater<>());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  radii.erase(std::remove_if(radii.begin(), radii.end(),
                             [&](double r) { return r >= cfg.chart_eps; }),
              radii.end());
  if (radii.empty())
    fail(Err::BadConfig, "blowup_radii has no entries below chart_eps");

  BlowupChart chart = make_chart(f, chosen->location, cfg.chart_eps, cfg.sing_tol);
  ConvergenceReport conv =
      verify_extension_limit(chart, u, cfg.blowup_t, radii, cfg.integ, cfg.frame_eps);
  Json rep{{"sigma", json_of(*chosen)},
           {"direction", Json::array({u[0], u[1], u[2]})},
           {"t", cfg.blowup_t},
           {"convergence", json_of(conv)}};
  int code = conv.usable && conv.monotone ? 0 : 1;
  return {code, {{"blowup.json", wrap_report(cfg, rep)}}};
}

CommandResult cmd_domination(const VectorField& f, const RunConfig& cfg) {
  ChainBundle b = make_bundle(f, cfg);
  GridCheckReport plain =
      check_domination(b.chain, b.split, cfg.T_grid, false, cfg.check);
  GridCheckReport two = check_2domination(b.chain, b.split, cfg.T_grid, cfg.check);
  Json rep{{"splitting", json_of(b.split, cfg.details)},
           {"domination", json_of(plain, cfg.details)},
           {"two_domination", json_of(two, cfg.details)}};
  return {plain.passed ? 0 : 1, {{"domination.json", wrap_report(cfg, rep)}}};
}

CommandResult cmd_contraction(const VectorField& f, const RunConfig& cfg) {
  ChainBundle b = make_bundle(f, cfg);
  GridCheckReport rep =
      check_e_contraction(b.chain, b.split, cfg.T_grid, cfg.make_emode(), cfg.check);
  Json j{{"splitting", json_of(b.split, cfg.details)},
         {"e_contraction", json_of(rep, cfg.details)}};
  return {rep.passed ? 0 : 1, {{"contraction.json", wrap_report(cfg, j)}}};
}

CommandResult cmd_sectional(const VectorField& f, const RunConfig& cfg) {
  ChainBundle b = make_bundle(f, cfg);
  GridCheckReport rep = check_sectional_expansion(b.chain, b.split, cfg.T_grid, cfg.check);
  Json j{{"splitting", json_of(b.split, cfg.details)},
         {"sectional_expansion", json_of(rep, cfg.details)}};
  return {rep.passed ? 0 : 1, {{"sectional.json", wrap_report(cfg, j)}}};
}

CommandResult cmd_pliss(const VectorField& f, const RunConfig& cfg) {
  ChainBundle b = make_bundle(f, cfg);
  const int m0 = cfg.pliss_tau0;
  const double block_time = m0 * cfg.spacing;

  std::vector<double> rates;
  std::vector<int> sample_index;
  for (int r = 0; r < b.chain.report_count(); ++r) {
    if (r >= static_cast<int>(b.split.dirs.size())) break;
    const DirectionEstimate& d = b.split.dirs[r];
    int a = b.chain.report_begin() + r;
    if (!d.converged || a - m0 < 0 || !b.chain.psi_window_valid(a - m0, m0)) continue;
    Mat2 P = b.chain.psi_product(a - m0, m0);
    double det = P.determinant();
    if (!(std::abs(det) > 0) || !std::isfinite(det)) continue;
    Mat2 Pinv;
    Pinv << P(1, 1), -P(0, 1), -P(1, 0), P(0, 0);
    Pinv /= det;
    double scale = b.chain.samples[a].field.norm() /
                   b.chain.samples[a - m0].field.norm();
    rates.push_back(std::log(scale * (Pinv * d.f_dir).norm()));
    sample_index.push_back(r);
  }

  double gamma_block = std::pow(cfg.pliss_gamma, block_time);
  std::vector<int> pliss = pliss_strings(rates, 1, gamma_block);
  Json times = Json::array();
  for (int i : pliss)
    times.push_back(b.chain.samples[b.chain.report_begin() + sample_index[i]].t);

  Json rep{{"n_rates", static_cast<int>(rates.size())},
           {"block_stride", m0},
           {"block_time", block_time},
           {"gamma", cfg.pliss_gamma},
           {"gamma_block", gamma_block},
           {"pliss_indices", pliss},
           {"pliss_times", times},
           {"density", rates.empty() ? 0.0
                                     : static_cast<double>(pliss.size()) / rates.size()}};
  if (cfg.details) {
    rep["rates"] = rates;
    rep["sample_indices"] = sample_index;
  }
  return {0, {{"pliss.json", wrap_report(cfg, rep)}}};
}

CommandResult cmd_lyapunov(const VectorField& f, const RunConfig& cfg) {
  Vec3 x = cfg.transient != 0.0 ? flow(f, cfg.seed_point, cfg.transient, cfg.integ)
                                : cfg.seed_point;
  LyapunovReport rep =
      lyapunov_exponents(f, x, cfg.lyap_T, cfg.lyap_dt, cfg.integ, cfg.frame_eps);
  return {0, {{"lyapunov.json", wrap_report(cfg, json_of(rep))}}};
}

CommandResult cmd_verdict(const VectorField& f, const RunConfig& cfg) {
  SingularHyperbolicityReport rep = singular_hyperbolicity_report(f, cfg.make_verdict());
  int code = rep.verdict == Verdict::Pass ? 0 : 1;
  return {code, {{"verdict.json", wrap_report(cfg, json_of(rep, cfg.details))}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flow cocycles and hyperbolicity diagnostics for 3D vector fields"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  int jobs_override = 0;
  bool verbose = false;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"classify", "find and classify zeros of the field"},
      {"orbit", "export a trajectory as CSV"},
      {"poincare", "normal-plane cocycle matrices along an orbit"},
      {"blowup-verify", "compare the rescaled cocycle against its fiber limit"},
      {"domination", "domination and 2-domination along sampled orbits"},
      {"contraction", "E-contraction along sampled orbits"},
      {"sectional", "sectional area expansion along sampled orbits"},
      {"pliss", "Pliss indices of the backward contraction rates"},
      {"lyapunov", "tangent and normal Lyapunov exponents"},
      {"verdict", "full singular-hyperbolicity pipeline"},
  };
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--jobs", jobs_override, "worker threads for per-sample work");
    sub->add_option("--out", out_override, "output directory (overrides the config)");
    sub->add_flag("--verbose", verbose, "progress notes on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CommandResult result;
  std::string name;
  RunConfig cfg;
  try {
    cfg = parse_config(config_path);
    if (jobs_override > 0) cfg.jobs = jobs_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    VectorField f = cfg.make_field();
    name = app.get_subcommands().front()->get_name();
    if (verbose) std::cerr << name << ": config " << config_path << "\n";

    if (name == "classify") result = cmd_classify(f, cfg);
    else if (name == "orbit") result = cmd_orbit(f, cfg);
    else if (name == "poincare") result = cmd_poincare(f, cfg);
    else if (name == "blowup-verify") result = cmd_blowup_verify(f, cfg);
    else if (name == "domination") result = cmd_domination(f, cfg);
    else if (name == "contraction") result = cmd_contraction(f, cfg);
    else if (name == "sectional") result = cmd_sectional(f, cfg);
    else if (name == "pliss") result = cmd_pliss(f, cfg);
    else if (name == "lyapunov") result = cmd_lyapunov(f, cfg);
    else result = cmd_verdict(f, cfg);
  } catch (const FlowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Err::BadConfig ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  try {
    fs::create_directories(cfg.out_dir);
    for (const Output& out : result.files) {
      fs::path p = fs::path(cfg.out_dir) / out.name;
      std::ofstream file(p, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error("cannot open " + p.string());
      file << out.content;
      if (!file) throw std::runtime_error("short write to " + p.string());
      if (verbose) std::cerr << name << ": wrote " << p.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << name << ": exit " << result.exit_code << "\n";
  return result.exit_code;
}
