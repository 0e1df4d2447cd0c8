#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "secflow/poincare.hpp"

namespace secflow {

/// Polar-blowup chart at a hyperbolic zero sigma of the field: points near
/// sigma are written x = sigma + s u with |s| < eps and u a unit vector,
/// subject to the identification (s, u) ~ (-s, -u).  The chart owns a copy
/// of the field and the cached linearization at sigma.
struct BlowupChart {
  VectorField field = VectorField::linear(Mat3::Identity());
  SingularityInfo sigma;
  double eps = 0.1;
  Mat3 dx = Mat3::Zero();  // DX(sigma)
};

/// Build a chart; the zero must be hyperbolic (its linearization is then
/// invertible, which the fiber formulas rely on).
BlowupChart make_chart(const VectorField& f, const Vec3& sigma, double eps,
                       double class_tol = 1e-9);

struct BlowupCoords {
  double s = 0.0;
  Vec3 u = Vec3::UnitZ();
};

/// Chart coordinates of a point, |s| = ||x - sigma||, with u sign-normalized
/// so its largest-magnitude component is positive (s carries the flip).
/// OutOfChart when x = sigma or ||x - sigma|| >= eps.
BlowupCoords blowup_coords(const BlowupChart& c, const Vec3& x);
Vec3 from_blowup(const BlowupChart& c, double s, const Vec3& u);

/// The blown-up field at (s, u): the integral of DX(sigma + r s u) over
/// r in [0, 1] applied to u.  Equals X(sigma + s u) / s for s != 0 and
/// extends continuously to DX(sigma) u on the fiber s = 0.
Vec3 extended_field(const BlowupChart& c, double s, const Vec3& u);

/// Unit extension of the field direction; DegenerateExtension when the
/// blown-up field nearly vanishes.
Vec3 extended_unit_field(const BlowupChart& c, double s, const Vec3& u);

/// e^{t DX(sigma)}: eigen-decomposition when the spectrum is simple real,
/// scaling-and-squaring Pade otherwise.
Mat3 linearized_flow(const BlowupChart& c, double t);

/// Continuous extension of ||X(x)|| / ||X(phi_t(x))|| to the fiber point u:
/// ||DX u|| / ||DX e^{t DX} u||.
double speed_ratio_extension(const BlowupChart& c, const Vec3& u, double t);

/// The rescaled normal derivative cocycle continued to the fiber: the speed
/// ratio above times e^{t DX} projected between the planes orthogonal to the
/// unit extension at u and at its projectivized image.
PoincareCocycle fiber_rescaled_linear_poincare(const BlowupChart& c, const Vec3& u,
                                               double t);

struct FiberSectionResult {
  Vec2 v = Vec2::Zero();
  double tau = 0.0;
};

/// The rescaled sectional map continued to the fiber.  The crossing-time
/// correction tau solves the orthogonality condition against the unit
/// extension at the image point, by safeguarded Newton started at tau = 0
/// inside |tau| <= tau_window; y = 0 maps to 0 with tau = 0.
FiberSectionResult fiber_rescaled_sectional(const BlowupChart& c, const Vec3& u,
                                            const Vec2& y, double t,
                                            double beta_num = 0.01,
                                            double tau_window = 0.5);

/// Convergence evidence for the fiber continuation: the rescaled cocycle at
/// x = sigma + s u, expressed through the fiber frames, compared against the
/// fiber formula over a list of decreasing radii.
struct ConvergenceReport {
  std::vector<double> radii;
  std::vector<double> errors;          // Frobenius distance; NaN where failed
  std::vector<std::string> failures;   // error code per radius, "" when fine
  double slope = std::numeric_limits<double>::quiet_NaN();  // log-log LSQ slope
  double extrapolated_error = std::numeric_limits<double>::quiet_NaN();
  bool monotone = false;
  bool usable = false;                 // at least two radii succeeded
};

ConvergenceReport verify_extension_limit(const BlowupChart& c, const Vec3& u, double t,
                                         const std::vector<double>& radii,
                                         const IntegratorConfig& cfg,
                                         double frame_eps = 1e-8);

}  // namespace secflow
