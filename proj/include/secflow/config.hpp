#pragma once

#include <string>
#include <vector>

#include "secflow/hyperbolicity.hpp"

namespace secflow {

/// Resolved run configuration: the sectioned key = value file with all
/// defaults applied. Every command reads from here; CLI flags override only
/// out_dir and jobs. See docs/config.md for the file grammar.
struct RunConfig {
  // [field]
  std::string field_kind = "lorenz";
  double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
  Mat3 A = Mat3::Identity();
  std::array<std::vector<Monomial>, 3> poly{};
  Box3 box{Vec3(-50, -50, -50), Vec3(50, 50, 50)};

  // [integrator]
  IntegratorConfig integ;

  // [analysis]
  Vec3 seed_point = Vec3(1, 1, 1);
  double transient = 50.0;
  int n = 1000;
  double spacing = 0.05;
  double frame_eps = 1e-8;
  std::vector<double> T_grid;  // resolved: never empty after parsing
  double split_T = 1.0;
  PowerConfig power;
  CheckConfig check;
  double min_converged = 0.9;
  double sing_tol = 1e-9;
  double chart_eps = 0.5;
  WssConfig wss;
  std::string contraction_mode = "psi_rescaled";
  int pliss_tau0 = 1;
  double pliss_gamma = 1.05;
  double lyap_T = 200.0;
  double lyap_dt = 0.5;
  double orbit_T = 10.0;
  double orbit_dt = 0.01;
  bool orbit_jacobian = false;
  double poincare_t = 1.0;
  int poincare_n = 20;
  double blowup_t = 0.25;
  std::vector<double> blowup_radii{1e-2, 1e-3, 1e-4, 1e-5};
  std::string blowup_dir = "auto";  // "auto" = unstable eigenvector, else "ux uy uz"
  Vec3 blowup_dir_vec = Vec3::UnitZ();
  unsigned long rng_seed = 12345;

  // [output]
  std::string out_dir = "out";
  bool details = false;
  int jobs = 1;

  VectorField make_field() const;
  SampleConfig make_sample() const;
  VerdictConfig make_verdict() const;
  EMode make_emode() const;
};

/// Parse and validate a config file; BadConfig on anything malformed,
/// unknown, or out of range.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

}  // namespace secflow
