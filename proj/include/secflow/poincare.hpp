#pragma once

#include "secflow/flow.hpp"
#include "secflow/frame.hpp"

namespace secflow {

/// Tunables for the section maps and the identification projection.
struct SectionConfig {
  double beta_sec = 0.05;    // section radius = beta_sec * ||X(x)||
  double tau_max = 0.25;     // crossing-time window around the nominal time
  double tube_factor = 8.0;  // tube radius = tube_factor * section radius
  double frame_eps = 1e-8;
  double s_max = 0.25;       // identification crossing window
  double beta0 = 0.05;       // identification radius in rescaled units
  double r0_scale = 0.1;     // identification base distance, multiples of ||X(x)||
};

/// A 2x2 cocycle matrix between the normal frames at two orbit points.
/// mat maps (n1, n2)-coordinates at `from` to (n1, n2)-coordinates at `to`;
/// composing consecutive legs is plain matrix multiplication because frames
/// are recomputed deterministically per point.
struct PoincareCocycle {
  NormalFrame from, to;
  double t = 0.0;
  Mat2 mat = Mat2::Identity();
  bool rescaled = false;
};

/// Derivative cocycle of the orthogonal projection of D phi_t onto the
/// normal planes (projection of the tangent flow along the field direction).
PoincareCocycle linear_poincare(const VectorField& f, const Vec3& x, double t,
                                const IntegratorConfig& cfg, double frame_eps = 1e-8);

/// Same cocycle scaled by ||X(x)|| / ||X(phi_t(x))||.
PoincareCocycle rescaled_linear_poincare(const VectorField& f, const Vec3& x, double t,
                                         const IntegratorConfig& cfg,
                                         double frame_eps = 1e-8);

struct SectionMapResult {
  Vec2 v = Vec2::Zero();      // in-plane image in the target frame coordinates
  double tau = 0.0;           // crossing happened at time t + tau
  double source_speed = 0.0;  // ||X(x)||
  double target_speed = 0.0;  // ||X(phi_t(x))||
};

/// Holonomy between normal sections: flow x + v until the trajectory crosses
/// the affine plane through phi_t(x) orthogonal to the field there, with
/// |tau| < tau_max.  v is given in the source frame coordinates and must
/// satisfy ||v|| <= beta_sec * ||X(x)||.
SectionMapResult sectional_poincare(const VectorField& f, const Vec3& x, const Vec2& v,
                                    double t, const IntegratorConfig& cfg,
                                    const SectionConfig& sec = {});

/// Rescaled holonomy u -> ||X(phi_t(x))||^{-1} P_t(||X(x)|| u), with
/// ||u|| <= beta_sec in rescaled units.
SectionMapResult rescaled_sectional_poincare(const VectorField& f, const Vec3& x,
                                             const Vec2& u, double t,
                                             const IntegratorConfig& cfg,
                                             const SectionConfig& sec = {});

struct IdentificationResult {
  Vec2 v = Vec2::Zero();  // image in the frame at x, rescaled units
  double s = 0.0;         // flow time used to reach the section at x
};

/// Project a rescaled normal vector u at y onto the section at x by flowing
/// the point y + ||X(y)|| u until it crosses the plane at x, |s| < s_max.
/// Two crossings inside the window raise AmbiguousCrossing, none NoCrossing.
IdentificationResult identification_project(const VectorField& f, const Vec3& x,
                                            const Vec3& y, const Vec2& u,
                                            const IntegratorConfig& cfg,
                                            const SectionConfig& sec = {});

}  // namespace secflow
