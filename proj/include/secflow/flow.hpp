#pragma once

#include <algorithm>
#include <cmath>

#include "secflow/types.hpp"
#include "secflow/vector_field.hpp"

namespace secflow {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 1.0;
  long max_steps = 5000000;
  /// Trajectories whose base point leaves this radius abort with BlowUp.
  double escape_radius = 1e6;
};

namespace ode {

template <int N>
using State = Eigen::Matrix<double, N, 1>;

struct NullObserver {
  template <class S>
  void operator()(double, const S&) const {}
};

/// Dormand-Prince 5(4) with a PI step controller, integrating an autonomous
/// system over span >= 0.  The observer is called at t = 0 and after every
/// accepted step; the first three state components are treated as the base
/// point for the escape check.  Fully deterministic for fixed inputs.
template <int N, class Rhs, class Obs = NullObserver>
State<N> integrate(Rhs&& rhs, State<N> y, double span, const IntegratorConfig& cfg,
                   Obs&& obs = Obs{}) {
  static_assert(N >= 3, "state must embed a base point in R^3");
  using S = State<N>;
  if (!(span >= 0) || !std::isfinite(span))
    fail(Err::BadConfig, "integration span must be finite and nonnegative");
  if (!y.allFinite()) fail(Err::BadConfig, "integration start state is not finite");
  obs(0.0, y);
  if (span == 0.0) return y;

  // Butcher tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double d1 = 5179.0 / 57600, d3 = 7571.0 / 16695, d4 = 393.0 / 640,
                   d5 = -92097.0 / 339200, d6 = 187.0 / 2100, d7 = 1.0 / 40;
  (void)c2; (void)c3; (void)c4; (void)c5;

  S k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
  rhs(y, k1);
  if (!k1.allFinite()) fail(Err::BlowUp, "field evaluation is not finite at the start state");

  auto scaled_rms = [&](const S& e, const S& a, const S& b) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) {
      double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(a[i]), std::abs(b[i]));
      double q = e[i] / sc;
      s += q * q;
    }
    return std::sqrt(s / N);
  };

  // Initial step size, following the usual two-probe heuristic.
  double h;
  {
    double d0 = 0, d1n = 0;
    for (int i = 0; i < N; ++i) {
      double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1n += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1n = std::sqrt(d1n / N);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, span);
    ytmp = y + h0 * k1;
    rhs(ytmp, k2);
    double d2 = 0;
    for (int i = 0; i < N; ++i) {
      double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
      double q = (k2[i] - k1[i]) / sc;
      d2 += q * q;
    }
    d2 = std::sqrt(d2 / N) / h0;
    double dm = std::max(d1n, d2);
    double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, cfg.max_step, span});
  }

  double t = 0.0;
  double err_old = 1e-4;
  bool just_rejected = false;
  long steps = 0;
  while (t < span) {
    if (++steps > cfg.max_steps)
      fail(Err::StepLimitExceeded, "exceeded " + std::to_string(cfg.max_steps) + " steps");
    h = std::min(h, cfg.max_step);
    if (t + h >= span) h = span - t;

    ytmp = y + h * (a21 * k1);
    rhs(ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(ynew, k7);
    S yerr = h * ((b1 - d1) * k1 + (b3 - d3) * k3 + (b4 - d4) * k4 + (b5 - d5) * k5 +
                  (b6 - d6) * k6 - d7 * k7);

    if (!ynew.allFinite()) fail(Err::BlowUp, "state is not finite at t = " + std::to_string(t));
    double err = scaled_rms(yerr, y, ynew);

    if (err <= 1.0 || h <= 1e-14 * std::max(1.0, t)) {
      t += h;
      y = ynew;
      k1 = k7;
      if (y.template head<3>().norm() > cfg.escape_radius)
        fail(Err::BlowUp, "trajectory left the escape radius at t = " + std::to_string(t));
      obs(t, y);
      double e = std::max(err, 1e-10);
      double fac = 0.9 * std::pow(e, -0.17) * std::pow(err_old, 0.04);
      fac = std::clamp(fac, 0.2, 6.0);
      if (just_rejected) fac = std::min(fac, 1.0);
      err_old = std::max(err, 1e-4);
      h *= fac;
      just_rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      just_rejected = true;
    }
  }
  return y;
}

}  // namespace ode

/// phi_t(x).  Negative t integrates -X over |t|; t = 0 returns x exactly.
Vec3 flow(const VectorField& f, const Vec3& x, double t, const IntegratorConfig& cfg);

struct TangentFlow {
  Vec3 point = Vec3::Zero();
  Mat3 deriv = Mat3::Identity();
};

/// (phi_t(x), D phi_t(x)) from one joint 12-dimensional integration.
TangentFlow tangent_flow(const VectorField& f, const Vec3& x, double t,
                         const IntegratorConfig& cfg);

/// Central-difference Jacobian of phi_t, the oracle for tangent_flow.
Mat3 flow_jacobian_fd(const VectorField& f, const Vec3& x, double t, double h,
                      const IntegratorConfig& cfg);

struct FlowWithDivergence {
  Vec3 point = Vec3::Zero();
  double div_integral = 0.0;
};

/// phi_t(x) with int_0^t div X(phi_s(x)) ds accumulated alongside.
FlowWithDivergence flow_with_divergence(const VectorField& f, const Vec3& x, double t,
                                        const IntegratorConfig& cfg);

}  // namespace secflow
