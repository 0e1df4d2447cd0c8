#include "secflow/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "secflow/flow.hpp"

namespace secflow {

const char* criterion_name(Criterion c) {
  switch (c) {
    case Criterion::Domination: return "domination";
    case Criterion::TwoDomination: return "two_domination";
    case Criterion::EContraction: return "e_contraction";
    case Criterion::SectionalExpansion: return "sectional_expansion";
    case Criterion::Pliss: return "pliss";
    case Criterion::SingularHyperbolic: return "singular_hyperbolic";
  }
  return "unknown";
}

const char* emode_name(EMode m) {
  switch (m) {
    case EMode::Psi: return "psi";
    case EMode::PsiRescaled: return "psi_rescaled";
    case EMode::Tangent: return "tangent";
  }
  return "unknown";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int grid_stride(double T, double spacing) {
  int m = static_cast<int>(std::llround(T / spacing));
  if (m < 1 || std::abs(m * spacing - T) > 1e-9 * std::max(1.0, std::abs(T)))
    fail(Err::BadConfig, "window length " + std::to_string(T) +
                             " is not a positive multiple of the sample spacing");
  return m;
}

/// Shared grid driver: quantity(r, a, m) returns the checked value at
/// reported index r (chain index a) for an m-block window, or NaN to skip.
GridCheckReport run_grid(const CocycleChain& chain, const std::vector<double>& grid,
                         const CheckConfig& cfg,
                         const std::function<double(int, int, int)>& quantity) {
  GridCheckReport rep;
  rep.cfg = cfg;
  rep.n_samples = chain.report_count();
  for (double T : grid) {
    GridCell cell;
    cell.T = T;
    cell.stride = grid_stride(T, chain.spacing);
    cell.values.assign(rep.n_samples, kNaN);
    for (int r = 0; r < rep.n_samples; ++r) {
      int a = chain.report_begin() + r;
      double q = quantity(r, a, cell.stride);
      if (std::isnan(q)) continue;
      cell.values[r] = q;
      ++cell.n_checked;
      if (q <= cfg.threshold) ++cell.n_passed;
      if (cell.worst_index < 0 || q > cell.worst) {
        cell.worst = q;
        cell.worst_index = r;
      }
    }
    cell.pass_fraction =
        cell.n_checked > 0 ? static_cast<double>(cell.n_passed) / cell.n_checked : 0.0;
    rep.grid.push_back(std::move(cell));
  }
  for (const GridCell& cell : rep.grid) {
    if (cell.n_checked > 0 && cell.n_passed == cell.n_checked &&
        !(cell.T >= rep.T_all))
      rep.T_all = cell.T;
    if (cell.pass_fraction >= cfg.pass_fraction_min && !(cell.T >= rep.T_pass))
      rep.T_pass = cell.T;
  }
  rep.passed = !std::isnan(rep.T_pass);
  return rep;
}

}  // namespace

GridCheckReport check_domination(const CocycleChain& chain, const SplittingEstimate& split,
                                 const std::vector<double>& T_grid, bool rescaled,
                                 const CheckConfig& cfg) {
  GridCheckReport rep = run_grid(
      chain, T_grid, cfg, [&](int r, int a, int m) -> double {
        if (r >= static_cast<int>(split.dirs.size())) return kNaN;
        const DirectionEstimate& d = split.dirs[r];
        if (!d.converged) return kNaN;
        if (a + m > static_cast<int>(chain.blocks.size())) return kNaN;
        if (!chain.psi_window_valid(a, m)) return kNaN;
        Mat2 M = chain.psi_product(a, m);
        double ne = (M * d.e_dir).norm();
        double nf = (M * d.f_dir).norm();
        if (rescaled) {
          double c = chain.rescale(a, m);
          ne *= c;
          nf *= c;
        }
        return nf > 0 ? ne / nf : std::numeric_limits<double>::infinity();
      });
  rep.criterion = Criterion::Domination;
  rep.rescaled = rescaled;
  return rep;
}

GridCheckReport check_2domination(const CocycleChain& chain, const SplittingEstimate& split,
                                  const std::vector<double>& T_grid, const CheckConfig& cfg) {
  GridCheckReport rep = run_grid(
      chain, T_grid, cfg, [&](int r, int a, int m) -> double {
        if (r >= static_cast<int>(split.dirs.size())) return kNaN;
        const DirectionEstimate& d = split.dirs[r];
        if (!d.converged) return kNaN;
        if (a + m > static_cast<int>(chain.blocks.size())) return kNaN;
        if (!chain.psi_window_valid(a, m)) return kNaN;
        Mat2 M = chain.psi_product(a, m);
        double c = chain.rescale(a, m);
        double ne = c * (M * d.e_dir).norm();
        double nf = c * (M * d.f_dir).norm();
        double num = std::max(ne, ne * ne);
        return nf > 0 ? num / nf : std::numeric_limits<double>::infinity();
      });
  rep.criterion = Criterion::TwoDomination;
  rep.rescaled = true;
  return rep;
}

GridCheckReport check_e_contraction(const CocycleChain& chain, const SplittingEstimate& split,
                                    const std::vector<double>& t0_grid, EMode mode,
                                    const CheckConfig& cfg) {
  GridCheckReport rep = run_grid(
      chain, t0_grid, cfg, [&](int r, int a, int m) -> double {
        if (r >= static_cast<int>(split.dirs.size())) return kNaN;
        const DirectionEstimate& d = split.dirs[r];
        if (!d.converged) return kNaN;
        if (a + m > static_cast<int>(chain.blocks.size())) return kNaN;
        if (mode == EMode::Tangent) {
          const OrbitSample& s = chain.samples[a];
          if (s.near_singular) return kNaN;
          Mat3 M = chain.dphi_product(a, m);
          return (M * s.frame.embed(d.e_dir)).norm();
        }
        if (!chain.psi_window_valid(a, m)) return kNaN;
        double ne = (chain.psi_product(a, m) * d.e_dir).norm();
        if (mode == EMode::PsiRescaled) ne *= chain.rescale(a, m);
        return ne;
      });
  rep.criterion = Criterion::EContraction;
  rep.emode = mode;
  rep.rescaled = mode == EMode::PsiRescaled;
  return rep;
}

GridCheckReport check_sectional_expansion(const CocycleChain& chain,
                                          const SplittingEstimate& split,
                                          const std::vector<double>& T_grid,
                                          const CheckConfig& cfg) {
  GridCheckReport rep = run_grid(
      chain, T_grid, cfg, [&](int r, int a, int m) -> double {
        if (r >= static_cast<int>(split.dirs.size())) return kNaN;
        if (!split.dirs[r].converged) return kNaN;
        int b = a - m;
        if (b < 0 || !chain.psi_window_valid(b, m)) return kNaN;
        // Area factor of the backward window on the plane spanned by X and the
        // dominating direction.  That direction is invariant, so the backward
        // norm along it is the reciprocal of the forward stretch from the
        // pulled-back point, which stays conditioned where inverting the full
        // window product does not.
        int hist = std::min(split.k_pow, b / split.stride);
        if (hist < 1) return kNaN;
        int start = b - hist * split.stride;
        if (!chain.psi_window_valid(start, hist * split.stride)) return kNaN;
        Vec2 v1 = Vec2(1, 1).normalized(), v2 = Vec2(1, -1).normalized();
        double g1 = 0, g2 = 0;
        for (int j = 0; j < hist; ++j) {
          Mat2 W = chain.psi_product(start + j * split.stride, split.stride);
          v1 = W * v1;
          v2 = W * v2;
          double m1 = v1.norm(), m2 = v2.norm();
          if (!(m1 > 0) || !(m2 > 0) || !v1.allFinite() || !v2.allFinite()) return kNaN;
          g1 += std::log(m1);
          g2 += std::log(m2);
          v1 /= m1;
          v2 /= m2;
        }
        Vec2 fdir = g1 >= g2 ? v1 : v2;
        double stretch_log = 0;
        for (int i = b; i < a; ++i) {
          fdir = chain.blocks[i].psi * fdir;
          double nm = fdir.norm();
          if (!(nm > 0) || !fdir.allFinite())
            return std::numeric_limits<double>::infinity();
          stretch_log += std::log(nm);
          fdir /= nm;
        }
        return std::exp(std::log(chain.rescale(b, m)) - stretch_log);
      });
  rep.criterion = Criterion::SectionalExpansion;
  return rep;
}

LyapunovReport lyapunov_exponents(const VectorField& f, const Vec3& x, double T_total,
                                  double renorm_dt, const IntegratorConfig& cfg,
                                  double frame_eps) {
  if (!(T_total > 0) || !(renorm_dt > 0))
    fail(Err::BadConfig, "lyapunov: T_total and renorm_dt must be positive");
  int n = std::max(1, static_cast<int>(std::llround(T_total / renorm_dt)));

  LyapunovReport rep;
  rep.renorm_dt = renorm_dt;
  rep.n_renorm = n;
  rep.T_total = n * renorm_dt;

  Vec3 p = x;
  Mat3 Q3 = Mat3::Identity();
  Mat2 Q2 = Mat2::Identity();
  Vec3 sums3 = Vec3::Zero();
  Vec2 sums2 = Vec2::Zero();
  double div_sum = 0.0;
  int n_normal = 0;

  for (int k = 0; k < n; ++k) {
    FlowWithDivergence fd = flow_with_divergence(f, p, renorm_dt, cfg);
    div_sum += fd.div_integral;
    TangentFlow tf = tangent_flow(f, p, renorm_dt, cfg);

    Eigen::HouseholderQR<Mat3> qr3(tf.deriv * Q3);
    Mat3 R3 = qr3.matrixQR().triangularView<Eigen::Upper>();
    Q3 = qr3.householderQ();
    for (int i = 0; i < 3; ++i) sums3[i] += std::log(std::abs(R3(i, i)));

    bool have_frames = true;
    NormalFrame fa, fb;
    try {
      fa = normal_frame(f, p, frame_eps);
      fb = normal_frame(f, tf.point, frame_eps);
    } catch (const FlowError&) {
      have_frames = false;
      ++rep.n_normal_skipped;
    }
    if (have_frames) {
      Mat2 psi = cocycle_matrix(fa, fb, tf.deriv) * (fa.speed / fb.speed);
      Eigen::HouseholderQR<Mat2> qr2(psi * Q2);
      Mat2 R2 = qr2.matrixQR().triangularView<Eigen::Upper>();
      Q2 = qr2.householderQ();
      for (int i = 0; i < 2; ++i) sums2[i] += std::log(std::abs(R2(i, i)));
      ++n_normal;
    }
    p = tf.point;
  }

  for (int i = 0; i < 3; ++i) rep.tangent[i] = sums3[i] / rep.T_total;
  std::sort(rep.tangent.begin(), rep.tangent.end(), std::greater<>());
  double t_normal = n_normal * renorm_dt;
  for (int i = 0; i < 2; ++i) rep.normal[i] = t_normal > 0 ? sums2[i] / t_normal : kNaN;
  std::sort(rep.normal.begin(), rep.normal.end(), std::greater<>());
  rep.div_mean = div_sum / rep.T_total;
  rep.tangent_sum = rep.tangent[0] + rep.tangent[1] + rep.tangent[2];
  return rep;
}

std::vector<int> pliss_strings(const std::vector<double>& log_norms, int tau0, double gamma) {
  if (tau0 < 1) fail(Err::BadConfig, "pliss: tau0 must be a positive count");
  if (!(gamma > 1)) fail(Err::BadConfig, "pliss: gamma must exceed 1");
  const int n = static_cast<int>(log_norms.size());
  const double shift = tau0 * std::log(gamma);
  std::vector<double> prefix(n + 1, 0.0);
  for (int j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + log_norms[j] + shift;

  std::vector<int> out;
  double max_suffix = -std::numeric_limits<double>::infinity();
  for (int i = n - 1; i >= 0; --i) {
    max_suffix = std::max(max_suffix, prefix[i + 1]);
    if (max_suffix <= prefix[i]) out.push_back(i);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

double point_segment_distance(const Vec3& x, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double len2 = ab.squaredNorm();
  if (!(len2 > 0)) return (x - a).norm();
  double t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

}  // namespace

WssReport strong_stable_separation(const VectorField& f, const SingularityInfo& sigma,
                                   const std::vector<OrbitSample>& samples,
                                   const WssConfig& wc, const IntegratorConfig& cfg) {
  if (!sigma.lorenz_like_forward)
    fail(Err::BadConfig, "strong stable separation needs a lorenz-like zero");
  if (wc.n_pts < 2 || !(wc.radius > 0) || !(wc.backflow >= 0))
    fail(Err::BadConfig, "strong stable separation: bad polyline parameters");

  WssReport rep;
  rep.cfg = wc;
  rep.sigma = sigma.location;
  const double lam1 = sigma.eigenvalues[0].real();
  const Vec3 e_ss = sigma.eigenvectors[0];

  std::vector<Vec3> poly(wc.n_pts);
  const double shrink = std::exp(lam1 * wc.backflow);
  for (int k = 0; k < wc.n_pts; ++k) {
    double r = -wc.radius + 2.0 * wc.radius * k / (wc.n_pts - 1);
    Vec3 start = sigma.location + (r * shrink) * e_ss;
    poly[k] = wc.backflow > 0 ? flow(f, start, -wc.backflow, cfg) : start;
  }

  for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
    const Vec3& x = samples[i].x;
    if ((x - sigma.location).norm() < wc.radius) {
      ++rep.n_excluded;
      continue;
    }
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < wc.n_pts; ++k)
      d = std::min(d, point_segment_distance(x, poly[k], poly[k + 1]));
    ++rep.n_checked;
    if (!(d >= rep.min_distance)) {
      rep.min_distance = d;
      rep.argmin = i;
    }
  }
  rep.passed = rep.n_checked == 0 || rep.min_distance > wc.sep_threshold;
  return rep;
}

MixedReport mixed_domination_equivalence(const CocycleChain& chain,
                                         const SplittingEstimate& split,
                                         const std::vector<double>& T_grid,
                                         const CheckConfig& cfg) {
  MixedReport rep;
  const int n = chain.report_count();
  rep.details.resize(n);
  std::vector<int> strides;
  strides.reserve(T_grid.size());
  for (double T : T_grid) strides.push_back(grid_stride(T, chain.spacing));

  for (int r = 0; r < n; ++r) {
    MixedSample& ms = rep.details[r];
    if (r >= static_cast<int>(split.dirs.size())) continue;
    const DirectionEstimate& d = split.dirs[r];
    int a = chain.report_begin() + r;
    if (!d.converged || chain.samples[a].near_singular) continue;
    Vec3 xhat = chain.samples[a].field.normalized();

    bool any_window = false;
    for (int m : strides) {
      if (a + m > static_cast<int>(chain.blocks.size())) continue;
      any_window = true;

      Mat3 M = chain.dphi_product(a, m);
      const Vec3 sv = Eigen::JacobiSVD<Mat3>(M).singularValues();
      double s2 = sv(1), s3 = sv(2);
      double ratio = s2 > 0 ? s3 / s2 : std::numeric_limits<double>::infinity();
      double mean = std::sqrt(s2 * s3);
      double margin = mean > 0 ? (M * xhat).norm() / mean
                               : std::numeric_limits<double>::infinity();
      bool flow_ok = margin >= 1.0;
      if (flow_ok && ratio <= cfg.threshold) ms.tangent_dom = true;
      bool better = std::isnan(ms.best_sv_ratio) ||
                    (flow_ok && !(ms.best_flow_margin >= 1.0)) ||
                    (flow_ok == (ms.best_flow_margin >= 1.0) && ratio < ms.best_sv_ratio);
      if (better) {
        ms.best_sv_ratio = ratio;
        ms.best_flow_margin = margin;
      }

      if (chain.psi_window_valid(a, m)) {
        double ne = chain.rescale(a, m) * (chain.psi_product(a, m) * d.e_dir).norm();
        if (ne <= cfg.threshold) ms.psi_contract = true;
        if (std::isnan(ms.best_contraction) || ne < ms.best_contraction)
          ms.best_contraction = ne;
      }
    }
    if (!any_window) continue;
    ms.checked = true;
    ++rep.n_checked;
    if (ms.tangent_dom == ms.psi_contract)
      ++rep.n_agree;
    else
      rep.disagreements.push_back(r);
  }
  rep.agreement = rep.n_checked > 0 ? static_cast<double>(rep.n_agree) / rep.n_checked : 1.0;
  return rep;
}

namespace {

std::string format_point(const Vec3& x) {
  return "(" + std::to_string(x[0]) + ", " + std::to_string(x[1]) + ", " +
         std::to_string(x[2]) + ")";
}

DirectionAttempt attempt_direction(const VectorField& f, const VerdictConfig& cfg,
                                   bool backward) {
  DirectionAttempt att;
  att.backward = backward;

  std::vector<double> grid = cfg.T_grid;
  if (grid.empty())
    for (int k = 1; k <= 40; ++k) grid.push_back(0.25 * k);

  try {
    att.search = find_singularities(f, cfg.box, cfg.sing_tol);
    for (const Vec3& root : att.search.roots) {
      SingularityInfo info = classify_singularity(f, root, cfg.sing_tol, 10 * cfg.sing_tol);
      if (!info.hyperbolic) {
        att.singularities_hyperbolic = false;
        att.reasons.push_back("zero of the field at " + format_point(root) +
                              " is not hyperbolic");
      }
      att.singularities.push_back(info);
    }
    if (!att.singularities_hyperbolic) {
      att.verdict = Verdict::Fail;
      att.completed = true;
      return att;
    }

    int max_stride = 1;
    for (double T : grid) max_stride = std::max(max_stride, grid_stride(T, cfg.sample.spacing));
    int split_stride = grid_stride(cfg.split_T, cfg.sample.spacing);

    SampleConfig sc = cfg.sample;
    sc.lead = cfg.power.k_pow * split_stride + max_stride;
    CocycleChain chain = build_chain(f, sc, cfg.integ);
    att.n_samples = chain.report_count();
    for (int r = 0; r < att.n_samples; ++r)
      if (chain.samples[chain.report_begin() + r].near_singular) ++att.n_near_singular;

    att.splitting = estimate_splitting(chain, cfg.split_T, cfg.power);
    if (att.splitting.converged_fraction < cfg.min_converged) {
      att.verdict = Verdict::Inconclusive;
      att.reasons.push_back("splitting converged on " +
                            std::to_string(att.splitting.converged_fraction) +
                            " of the samples, below " + std::to_string(cfg.min_converged));
      att.completed = true;
      return att;
    }

    att.domination = check_domination(chain, att.splitting, grid, false, cfg.check);
    att.e_rescaled =
        check_e_contraction(chain, att.splitting, grid, EMode::PsiRescaled, cfg.check);
    att.e_tangent =
        check_e_contraction(chain, att.splitting, grid, EMode::Tangent, cfg.check);
    att.sectional = check_sectional_expansion(chain, att.splitting, grid, cfg.check);
    att.mixed = mixed_domination_equivalence(chain, att.splitting, grid, cfg.check);

    for (size_t i = 0; i < grid.size(); ++i) {
      bool all = att.domination.grid[i].pass_fraction >= cfg.check.pass_fraction_min &&
                 att.e_rescaled.grid[i].pass_fraction >= cfg.check.pass_fraction_min &&
                 att.sectional.grid[i].pass_fraction >= cfg.check.pass_fraction_min;
      if (all && !(grid[i] >= att.common_T)) att.common_T = grid[i];
    }
    if (std::isnan(att.common_T))
      att.reasons.push_back(
          "no single window length passes domination, E-contraction and sectional "
          "expansion together");

    std::vector<OrbitSample> reported(chain.samples.begin() + chain.report_begin(),
                                      chain.samples.begin() + chain.report_begin() +
                                          chain.report_count());
    for (const SingularityInfo& info : att.singularities) {
      if (!info.lorenz_like_forward) continue;
      WssReport w = strong_stable_separation(f, info, reported, cfg.wss, cfg.integ);
      if (!w.passed)
        att.reasons.push_back("samples meet the strong stable curve of the zero at " +
                              format_point(info.location));
      att.wss.push_back(std::move(w));
    }

    for (const SingularityInfo& info : att.singularities) {
      FiberCrosscheck fc;
      fc.sigma = info.location;
      for (const OrbitSample& s : reported) {
        double dist = (s.x - info.location).norm();
        if (dist >= cfg.chart_eps || dist <= 0) continue;
        ++fc.n_inside;
        if (!(dist >= fc.closest)) {
          fc.closest = dist;
          fc.direction = (s.x - info.location) / dist;
        }
      }
      if (fc.n_inside == 0) continue;
      try {
        BlowupChart chart = make_chart(f, info.location, cfg.chart_eps, cfg.sing_tol);
        std::vector<double> radii;
        for (double rr = 1e-2; rr >= 1e-4 / 2; rr /= 10)
          if (rr < cfg.chart_eps) radii.push_back(rr);
        fc.convergence = verify_extension_limit(chart, fc.direction, fc.t, radii, cfg.integ,
                                                cfg.sample.frame_eps);
      } catch (const FlowError& e) {
        fc.error = err_name(e.code());
      }
      att.fiber.push_back(std::move(fc));
    }

    bool wss_ok = true;
    for (const WssReport& w : att.wss) wss_ok = wss_ok && w.passed;
    att.verdict =
        (!std::isnan(att.common_T) && wss_ok) ? Verdict::Pass : Verdict::Fail;
    att.completed = true;
  } catch (const FlowError& e) {
    if (e.code() == Err::BadConfig) throw;
    att.verdict = Verdict::Fail;
    att.reasons.push_back(std::string("pipeline aborted: ") + e.what());
    att.completed = false;
  }
  return att;
}

}  // namespace

SingularHyperbolicityReport singular_hyperbolicity_report(const VectorField& f,
                                                          const VerdictConfig& cfg) {
  SingularHyperbolicityReport rep;
  rep.forward = attempt_direction(f, cfg, false);
  if (rep.forward.verdict == Verdict::Pass) {
    rep.verdict = Verdict::Pass;
    rep.common_T = rep.forward.common_T;
    return rep;
  }
  rep.backward = attempt_direction(f.negated(), cfg, true);
  rep.used_backward = true;
  if (rep.backward->verdict == Verdict::Pass) {
    rep.verdict = Verdict::Pass;
    rep.common_T = rep.backward->common_T;
  } else if (rep.forward.verdict == Verdict::Inconclusive ||
             rep.backward->verdict == Verdict::Inconclusive) {
    rep.verdict = Verdict::Inconclusive;
  } else {
    rep.verdict = Verdict::Fail;
  }
  return rep;
}

}  // namespace secflow
