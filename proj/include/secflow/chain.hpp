#pragma once

#include <string>
#include <vector>

#include "secflow/poincare.hpp"

namespace secflow {

/// One recorded orbit point.
struct OrbitSample {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 field = Vec3::Zero();
  Mat3 jac = Mat3::Zero();
  bool near_singular = false;  // ||X|| <= frame_eps; excluded from frame work
  NormalFrame frame;           // valid iff !near_singular
};

/// Cocycle data between two consecutive samples.
struct ChainBlock {
  Mat3 dphi = Mat3::Identity();  // tangent flow over the segment
  Mat2 psi = Mat2::Identity();   // normal cocycle in the endpoint frames
  bool psi_valid = true;         // false when an endpoint is near-singular
  double speed_from = 0.0, speed_to = 0.0;
};

/// A uniformly spaced orbit segment with per-segment cocycle blocks.  The
/// reported window sits `lead` samples away from both ends so that every
/// reported sample has a full backward and forward history for window-based
/// criteria; everything is produced by forward integration only.
struct CocycleChain {
  double spacing = 0.05;
  int lead = 0;
  std::vector<OrbitSample> samples;
  std::vector<ChainBlock> blocks;  // blocks[i] joins samples[i] -> samples[i+1]

  int report_begin() const { return lead; }
  int report_count() const { return static_cast<int>(samples.size()) - 2 * lead; }

  /// psi (or dphi) products over blocks [i, i+m); valid flags respected by
  /// the callers.
  Mat2 psi_product(int i, int m) const;
  Mat3 dphi_product(int i, int m) const;
  bool psi_window_valid(int i, int m) const;
  /// ||X(sample i)|| / ||X(sample i+m)||, the rescaling factor over a window.
  double rescale(int i, int m) const;
};

struct SampleConfig {
  Vec3 seed = Vec3(1, 1, 1);
  double transient = 50.0;
  int n = 1000;
  double spacing = 0.05;
  int lead = 0;
  double frame_eps = 1e-8;
  int jobs = 1;
};

/// Integrate the seed through the transient, then record n + 2 lead samples
/// spaced uniformly, with tangent blocks between consecutive samples.  The
/// base orbit is advanced sequentially; the per-segment tangent integrations
/// are independent and honor `jobs`.
CocycleChain build_chain(const VectorField& f, const SampleConfig& sc,
                         const IntegratorConfig& cfg);

/// The reported window as a plain sample list.
std::vector<OrbitSample> sample_attractor(const VectorField& f, const SampleConfig& sc,
                                          const IntegratorConfig& cfg);

/// Invariant directions of the normal cocycle at one reported sample.
struct DirectionEstimate {
  Vec2 e_dir = Vec2::UnitX();  // contracted direction, frame coordinates
  Vec2 f_dir = Vec2::UnitY();  // dominating direction
  bool converged = false;
  std::string reason;          // populated when not converged
  double angle = 0.0;          // angle between the two directions
};

struct PowerConfig {
  int k_pow = 20;
  double dir_tol = 1e-8;
  double angle_floor = 1e-3;
};

struct SplittingEstimate {
  double T = 0.0;   // time per power-iteration step
  int stride = 1;   // blocks per power-iteration step
  int k_pow = 20;
  double window = 0.0;  // total time k_pow * stride * spacing
  std::vector<DirectionEstimate> dirs;  // aligned with the reported window
  double converged_fraction = 0.0;
  double angle_min = 0.0;  // over converged samples
};

/// Power iteration along the chain: f_dir from forward products of psi
/// blocks ending at the sample, e_dir from backward products (inverse
/// blocks) starting at it.  Convergence is agreement of two independent
/// generic seeds within dir_tol; directions closer than angle_floor are
/// reported unconverged.  T must be an integer multiple of the chain spacing.
SplittingEstimate estimate_splitting(const CocycleChain& chain, double T,
                                     const PowerConfig& pc);

}  // namespace secflow
