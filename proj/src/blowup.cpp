#include "secflow/blowup.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>

namespace secflow {

namespace {

struct Quadrature {
  std::array<double, 16> node, weight;
};

// 16-node Gauss-Legendre rule on [0, 1], nodes found once by Newton on P_16.
const Quadrature& gauss16() {
  static const Quadrature q = [] {
    Quadrature out;
    const int n = 16;
    for (int i = 0; i < n / 2; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double w = 2.0 / ((1.0 - x * x) * dp * dp);
      out.node[i] = 0.5 * (1.0 - x);
      out.node[n - 1 - i] = 0.5 * (1.0 + x);
      out.weight[i] = 0.5 * w;
      out.weight[n - 1 - i] = 0.5 * w;
    }
    return out;
  }();
  return q;
}

constexpr double kDegenerate = 1e-10;

}  // namespace

BlowupChart make_chart(const VectorField& f, const Vec3& sigma, double eps,
                       double class_tol) {
  if (!(eps > 0)) fail(Err::BadConfig, "chart eps must be positive");
  BlowupChart c;
  c.field = f;
  c.sigma = classify_singularity(f, sigma, class_tol);
  c.eps = eps;
  c.dx = f.jacobian(sigma);
  if (!c.sigma.hyperbolic)
    fail(Err::DegenerateExtension, "the chart zero must be hyperbolic");
  return c;
}

BlowupCoords blowup_coords(const BlowupChart& c, const Vec3& x) {
  Vec3 d = x - c.sigma.location;
  double r = d.norm();
  if (r == 0.0) fail(Err::OutOfChart, "the chart center has no polar coordinates");
  if (r >= c.eps) fail(Err::OutOfChart, "point at distance " + std::to_string(r) +
                                            " is outside the chart radius");
  BlowupCoords out;
  out.u = d / r;
  out.s = r;
  int imax = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(out.u[i]) > std::abs(out.u[imax])) imax = i;
  if (out.u[imax] < 0) {
    out.u = -out.u;
    out.s = -out.s;
  }
  return out;
}

Vec3 from_blowup(const BlowupChart& c, double s, const Vec3& u) {
  if (std::abs(s) >= c.eps)
    fail(Err::OutOfChart, "|s| must be below the chart radius");
  return c.sigma.location + s * u;
}

Vec3 extended_field(const BlowupChart& c, double s, const Vec3& u) {
  const auto& q = gauss16();
  Mat3 avg = Mat3::Zero();
  for (int i = 0; i < 16; ++i)
    avg += q.weight[i] * c.field.jacobian(c.sigma.location + (q.node[i] * s) * u);
  return avg * u;
}

Vec3 extended_unit_field(const BlowupChart& c, double s, const Vec3& u) {
  Vec3 v = extended_field(c, s, u);
  double n = v.norm();
  if (n <= kDegenerate)
    fail(Err::DegenerateExtension, "blown-up field vanishes at the requested point");
  return v / n;
}

Mat3 linearized_flow(const BlowupChart& c, double t) {
  if (c.sigma.simple_real) {
    Mat3 V, D = Mat3::Zero();
    for (int k = 0; k < 3; ++k) {
      V.col(k) = c.sigma.eigenvectors[k];
      D(k, k) = std::exp(t * c.sigma.eigenvalues[k].real());
    }
    Eigen::FullPivLU<Mat3> lu(V);
    if (lu.isInvertible()) return V * D * lu.inverse();
  }
  return Mat3(t * c.dx).exp();
}

double speed_ratio_extension(const BlowupChart& c, const Vec3& u, double t) {
  double num = (c.dx * u).norm();
  double den = (c.dx * (linearized_flow(c, t) * u)).norm();
  if (num <= kDegenerate || den <= kDegenerate)
    fail(Err::DegenerateExtension, "linearization degenerates along the fiber direction");
  return num / den;
}

PoincareCocycle fiber_rescaled_linear_poincare(const BlowupChart& c, const Vec3& u,
                                               double t) {
  Vec3 un = u.normalized();
  Mat3 Phi = linearized_flow(c, t);
  Vec3 w0 = c.dx * un;
  Vec3 ut = (Phi * un).normalized();
  Vec3 w1 = c.dx * ut;
  if (w0.norm() <= kDegenerate || w1.norm() <= kDegenerate)
    fail(Err::DegenerateExtension, "unit extension degenerates along the fiber orbit");

  PoincareCocycle out;
  out.from = frame_from_direction(un, w0.normalized());
  out.to = frame_from_direction(ut, w1.normalized());
  out.t = t;
  out.rescaled = true;
  double ratio = w0.norm() / (c.dx * Phi * un).norm();
  out.mat = ratio * cocycle_matrix(out.from, out.to, Phi);
  return out;
}

FiberSectionResult fiber_rescaled_sectional(const BlowupChart& c, const Vec3& u,
                                            const Vec2& y, double t, double beta_num,
                                            double tau_window) {
  if (y.norm() > beta_num * (1.0 + 1e-12))
    fail(Err::OutOfDomain, "fiber displacement exceeds the section radius");
  Vec3 un = u.normalized();
  Mat3 Phi_t = linearized_flow(c, t);
  Vec3 w0 = c.dx * un;
  Vec3 wt = c.dx * (Phi_t * un);
  double nwt = wt.norm();
  if (w0.norm() <= kDegenerate || nwt <= kDegenerate)
    fail(Err::DegenerateExtension, "unit extension degenerates along the fiber orbit");
  Vec3 ut = (Phi_t * un).normalized();
  NormalFrame from = frame_from_direction(un, w0.normalized());
  NormalFrame to = frame_from_direction(ut, wt / nwt);

  const Vec3 ytil = from.embed(y);
  const double ratio = w0.norm() / nwt;
  const Vec3 phi_t_u = Phi_t * un;

  auto expr = [&](double tau) -> Vec3 {
    Mat3 Phi = linearized_flow(c, t + tau);
    return ratio * (Phi * ytil) + (Phi * un - phi_t_u) / nwt;
  };
  auto theta = [&](double tau) { return expr(tau).dot(to.u); };
  auto dtheta = [&](double tau) {
    Mat3 Phi = linearized_flow(c, t + tau);
    return (c.dx * (ratio * (Phi * ytil) + (Phi * un) / nwt)).dot(to.u);
  };

  // Newton from tau = 0; the derivative there is ||DX e^{tDX} u|| / ||.|| = 1
  // after normalization, so the start is never degenerate for small y.
  double tau = 0.0;
  bool ok = false;
  for (int it = 0; it < 60; ++it) {
    double th = theta(tau);
    double dth = dtheta(tau);
    if (std::abs(dth) < 1e-14 * (1.0 + std::abs(th))) break;
    double step = th / dth;
    double next = tau - step;
    if (!(std::abs(next) <= tau_window)) break;
    tau = next;
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(tau))) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    // Grid-and-bisect fallback over the window when Newton wanders.
    const int grid = 128;
    for (double dir : {1.0, -1.0}) {
      double a = 0.0, tha = theta(0.0);
      if (tha == 0.0) {
        tau = 0.0;
        ok = true;
        break;
      }
      for (int k = 1; k <= grid && !ok; ++k) {
        double b = dir * tau_window * k / grid, thb = theta(b);
        if (tha * thb <= 0) {
          for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (a + b), tm = theta(mid);
            if (tm == 0.0 || std::abs(b - a) < 1e-15) {
              a = b = mid;
              break;
            }
            if (tm * tha < 0) {
              b = mid;
            } else {
              a = mid;
              tha = tm;
            }
          }
          tau = 0.5 * (a + b);
          ok = true;
        } else {
          a = b;
          tha = thb;
        }
      }
      if (ok) break;
    }
  }
  if (!ok) fail(Err::TauNotFound, "no crossing-time correction inside the window");

  FiberSectionResult out;
  out.tau = tau;
  out.v = to.coords(expr(tau));
  return out;
}

ConvergenceReport verify_extension_limit(const BlowupChart& c, const Vec3& u, double t,
                                         const std::vector<double>& radii,
                                         const IntegratorConfig& cfg, double frame_eps) {
  if (radii.empty()) fail(Err::BadConfig, "verify_extension_limit: radii must be nonempty");
  for (size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0) || radii[i] >= c.eps)
      fail(Err::BadConfig, "radii must lie strictly between 0 and the chart eps");
    if (i && !(radii[i] < radii[i - 1]))
      fail(Err::BadConfig, "radii must be strictly decreasing");
  }
  Vec3 un = u.normalized();
  PoincareCocycle fiber = fiber_rescaled_linear_poincare(c, un, t);

  ConvergenceReport rep;
  rep.radii = radii;
  rep.errors.assign(radii.size(), std::numeric_limits<double>::quiet_NaN());
  rep.failures.assign(radii.size(), "");
  std::vector<Mat2> mats(radii.size());
  std::vector<bool> good(radii.size(), false);

  for (size_t i = 0; i < radii.size(); ++i) {
    double s = radii[i];
    try {
      Vec3 xs = c.sigma.location + s * un;
      // One joint pass: tangent flow plus a chart-residence check.
      auto rhs = [&](const ode::State<12>& y, ode::State<12>& dy) {
        Vec3 p = y.head<3>();
        Mat3 Y = Eigen::Map<const Mat3>(y.data() + 3);
        dy.head<3>() = c.field(p);
        Eigen::Map<Mat3>(dy.data() + 3) = c.field.jacobian(p) * Y;
      };
      auto obs = [&](double, const ode::State<12>& y) {
        if ((y.head<3>() - c.sigma.location).norm() >= c.eps)
          fail(Err::OutOfChart, "orbit left the chart during the comparison window");
      };
      ode::State<12> y0;
      y0.head<3>() = xs;
      Eigen::Map<Mat3>(y0.data() + 3) = Mat3::Identity();
      double sign = t >= 0 ? 1.0 : -1.0;
      auto rhs_signed = [&](const ode::State<12>& y, ode::State<12>& dy) {
        rhs(y, dy);
        dy *= sign;
      };
      ode::State<12> y1 = ode::integrate<12>(rhs_signed, y0, std::abs(t), cfg, obs);
      Vec3 pt = y1.head<3>();
      Mat3 D = Eigen::Map<const Mat3>(y1.data() + 3);

      NormalFrame f0 = normal_frame(c.field, xs, frame_eps);
      NormalFrame f1 = normal_frame(c.field, pt, frame_eps);
      double scalar = f0.speed / f1.speed;
      // The regular-point rescaled cocycle pushed through the fiber frames.
      auto through = [&](const Vec3& w) {
        Vec3 w0 = f0.project(w);
        Vec3 w1 = D * w0;
        return f1.project(w1);
      };
      Mat2 A;
      A << fiber.to.n1.dot(through(fiber.from.n1)), fiber.to.n1.dot(through(fiber.from.n2)),
           fiber.to.n2.dot(through(fiber.from.n1)), fiber.to.n2.dot(through(fiber.from.n2));
      A *= scalar;
      mats[i] = A;
      good[i] = true;
      rep.errors[i] = (A - fiber.mat).norm();
    } catch (const FlowError& e) {
      rep.failures[i] = err_name(e.code());
    }
  }

  rep.monotone = true;
  double prev = std::numeric_limits<double>::quiet_NaN();
  int n_good = 0;
  for (size_t i = 0; i < radii.size(); ++i) {
    if (!good[i]) continue;
    ++n_good;
    if (!std::isnan(prev) && !(rep.errors[i] < prev)) rep.monotone = false;
    prev = rep.errors[i];
  }
  rep.usable = n_good >= 2;

  // Log-log slope by least squares over the successful radii.
  if (n_good >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < radii.size(); ++i) {
      if (!good[i] || !(rep.errors[i] > 0)) continue;
      double lx = std::log(radii[i]), ly = std::log(rep.errors[i]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
    if (n >= 2) rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    int i1 = -1, i2 = -1;  // the two smallest successful radii
    for (int i = static_cast<int>(radii.size()) - 1; i >= 0; --i) {
      if (!good[i]) continue;
      if (i2 < 0)
        i2 = i;
      else if (i1 < 0) {
        i1 = i;
        break;
      }
    }
    if (i1 >= 0 && i2 >= 0) {
      double s1 = radii[i1], s2 = radii[i2];
      Mat2 extrap = mats[i2] + (mats[i2] - mats[i1]) * (s2 / (s1 - s2));
      rep.extrapolated_error = (extrap - fiber.mat).norm();
    }
  }
  return rep;
}

}  // namespace secflow
