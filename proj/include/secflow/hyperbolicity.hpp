#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "secflow/blowup.hpp"
#include "secflow/chain.hpp"
#include "secflow/vector_field.hpp"

namespace secflow {

/// Quantitative criteria along a sampled orbit. All window checks share the
/// same shape: a grid of window lengths T, and per sample a scalar quantity
/// that must stay at or below a threshold (1/2 unless configured otherwise).
/// Backward-time quantities are evaluated through inverses of forward blocks,
/// so nothing here integrates against the flow direction.

enum class Criterion {
  Domination,
  TwoDomination,
  EContraction,
  SectionalExpansion,
  Pliss,
  SingularHyperbolic,
};

const char* criterion_name(Criterion c);

/// Which cocycle carries the E-contraction test.
enum class EMode {
  Psi,          // plain linear Poincare cocycle
  PsiRescaled,  // speed-rescaled cocycle
  Tangent,      // full tangent cocycle applied to the embedded direction
};

const char* emode_name(EMode m);

struct CheckConfig {
  double threshold = 0.5;
  double pass_fraction_min = 0.99;
};

/// One grid row: statistics of the checked quantity at a fixed window length.
struct GridCell {
  double T = 0.0;
  int stride = 0;
  int n_checked = 0;  // samples with converged directions and a valid window
  int n_passed = 0;
  double pass_fraction = 0.0;
  double worst = 0.0;  // largest quantity seen, the most violating sample
  int worst_index = -1;
  std::vector<double> values;  // per reported sample; NaN where not checked
};

struct GridCheckReport {
  Criterion criterion = Criterion::Domination;
  bool rescaled = false;
  EMode emode = EMode::Psi;
  CheckConfig cfg;
  std::vector<GridCell> grid;
  int n_samples = 0;
  // Smallest grid T with pass_fraction == 1, resp. >= cfg.pass_fraction_min.
  double T_all = std::numeric_limits<double>::quiet_NaN();
  double T_pass = std::numeric_limits<double>::quiet_NaN();
  bool passed = false;
};

/// ||psi_T e|| / ||psi_T f|| <= threshold. The ratio does not change under
/// speed rescaling (the scalar cancels); the flag only tags the report.
GridCheckReport check_domination(const CocycleChain& chain, const SplittingEstimate& split,
                                 const std::vector<double>& T_grid, bool rescaled,
                                 const CheckConfig& cfg);

/// max(||psi*_T e||, ||psi*_T e||^2) <= threshold * ||psi*_T f|| on the
/// rescaled cocycle; the squared branch is what distinguishes this from plain
/// domination once ||psi*_T e|| > 1.
GridCheckReport check_2domination(const CocycleChain& chain, const SplittingEstimate& split,
                                  const std::vector<double>& T_grid, const CheckConfig& cfg);

/// ||psi^(*)_{t0} e_dir|| <= threshold, or the tangent variant with e_dir
/// embedded in the ambient space.
GridCheckReport check_e_contraction(const CocycleChain& chain, const SplittingEstimate& split,
                                    const std::vector<double>& t0_grid, EMode mode,
                                    const CheckConfig& cfg);

/// Area factor of the inverse window product on span(X, embedded f_dir):
/// ||Dphi_{-T} v1 ^ Dphi_{-T} v2|| <= threshold for an orthonormal basis of
/// the plane.
GridCheckReport check_sectional_expansion(const CocycleChain& chain,
                                          const SplittingEstimate& split,
                                          const std::vector<double>& T_grid,
                                          const CheckConfig& cfg);

struct LyapunovReport {
  std::array<double, 3> tangent{};  // sorted descending
  std::array<double, 2> normal{};   // rescaled normal cocycle, sorted descending
  double div_mean = 0.0;
  double tangent_sum = 0.0;
  double T_total = 0.0;
  double renorm_dt = 0.0;
  int n_renorm = 0;
  int n_normal_skipped = 0;  // renormalization steps without usable frames
};

/// Discrete QR method: reorthonormalize the tangent basis every renorm_dt and
/// average the log diagonal of the R factors; the 2x2 normal cocycle runs in
/// parallel on the same orbit.
LyapunovReport lyapunov_exponents(const VectorField& f, const Vec3& x, double T_total,
                                  double renorm_dt, const IntegratorConfig& cfg = {},
                                  double frame_eps = 1e-8);

/// Indices i such that every partial sum a_i + ... + a_{i+m-1} stays at or
/// below -m*tau0*log(gamma). Linear right-to-left scan over prefix sums.
std::vector<int> pliss_strings(const std::vector<double>& log_norms, int tau0, double gamma);

struct WssConfig {
  double radius = 1.0;     // segment extent, also the exclusion radius
  double backflow = 0.25;  // backward-flow time refining the linear segment
  int n_pts = 41;
  double sep_threshold = 0.05;
};

struct WssReport {
  Vec3 sigma = Vec3::Zero();
  double min_distance = std::numeric_limits<double>::quiet_NaN();
  int argmin = -1;  // index into the sample list
  int n_checked = 0;
  int n_excluded = 0;
  bool passed = false;
  WssConfig cfg;
};

/// Distance from the samples to a polyline approximation of the local strong
/// stable curve of a lorenz-like singularity. A proxy check: finite sampling
/// cannot decide the intersection property, it can only flag a violation.
WssReport strong_stable_separation(const VectorField& f, const SingularityInfo& sigma,
                                   const std::vector<OrbitSample>& samples,
                                   const WssConfig& wc, const IntegratorConfig& cfg = {});

struct MixedSample {
  bool checked = false;
  bool tangent_dom = false;  // one-two dominated tangent splitting, flow in the big factor
  bool psi_contract = false; // some grid t0 contracts e_dir under the rescaled cocycle
  double best_sv_ratio = std::numeric_limits<double>::quiet_NaN();  // min s3/s2 over the grid
  double best_flow_margin = std::numeric_limits<double>::quiet_NaN();  // |Dphi X_hat|/sqrt(s2 s3) at that T
  double best_contraction = std::numeric_limits<double>::quiet_NaN();
};

struct MixedReport {
  int n_checked = 0;
  int n_agree = 0;
  double agreement = 0.0;
  std::vector<int> disagreements;  // reported-sample indices
  std::vector<MixedSample> details;
};

/// Tests, sample by sample, whether a one-two dominated splitting of the full
/// tangent cocycle (weakest singular direction dominated, flow direction not
/// in it) occurs exactly when the rescaled normal cocycle contracts e_dir at
/// some grid time.  Membership of the flow direction in the big factor is
/// decided by growth: |Dphi X_hat| must clear the geometric mean of the two
/// smallest singular values, the scale-free midpoint of the two growth
/// classes.  An angle test against the weak singular direction would misfire
/// here, since an oblique splitting can lean that direction toward the flow.
MixedReport mixed_domination_equivalence(const CocycleChain& chain,
                                         const SplittingEstimate& split,
                                         const std::vector<double>& T_grid,
                                         const CheckConfig& cfg);

enum class Verdict { Pass, Fail, Inconclusive };

const char* verdict_name(Verdict v);

struct VerdictConfig {
  Box3 box{Vec3(-50, -50, -50), Vec3(50, 50, 50)};
  SampleConfig sample;
  PowerConfig power;
  double split_T = 1.0;
  std::vector<double> T_grid;  // empty: 0.25, 0.5, ..., 10
  CheckConfig check;
  double min_converged = 0.9;
  double sing_tol = 1e-9;
  double chart_eps = 0.5;
  WssConfig wss;
  IntegratorConfig integ;
};

struct FiberCrosscheck {
  Vec3 sigma = Vec3::Zero();
  int n_inside = 0;        // samples within chart_eps of the singularity
  double closest = std::numeric_limits<double>::quiet_NaN();
  Vec3 direction = Vec3::Zero();  // direction of the closest sample
  double t = 0.25;
  ConvergenceReport convergence;
  std::string error;  // err name when the check itself failed
};

struct DirectionAttempt {
  bool backward = false;  // field negated relative to the input
  SingularitySearch search;
  std::vector<SingularityInfo> singularities;
  bool singularities_hyperbolic = true;
  int n_samples = 0;
  int n_near_singular = 0;
  SplittingEstimate splitting;
  GridCheckReport domination;
  GridCheckReport e_rescaled;
  GridCheckReport e_tangent;
  GridCheckReport sectional;
  MixedReport mixed;
  std::vector<WssReport> wss;
  std::vector<FiberCrosscheck> fiber;
  double common_T = std::numeric_limits<double>::quiet_NaN();
  Verdict verdict = Verdict::Fail;
  std::vector<std::string> reasons;
  bool completed = false;  // pipeline ran to the end without a hard error
};

struct SingularHyperbolicityReport {
  DirectionAttempt forward;
  std::optional<DirectionAttempt> backward;  // attempted only when forward fails
  Verdict verdict = Verdict::Fail;
  bool used_backward = false;
  double common_T = std::numeric_limits<double>::quiet_NaN();
};

/// Full pipeline: classify singularities, sample, estimate the splitting, and
/// require a single grid T at which domination, rescaled E-contraction and
/// sectional expansion all hold on enough samples, together with strong
/// stable separation at every lorenz-like singularity. The reversed field is
/// tried when the original fails.
SingularHyperbolicityReport singular_hyperbolicity_report(const VectorField& f,
                                                          const VerdictConfig& cfg);

}  // namespace secflow
