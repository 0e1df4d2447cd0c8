#include "secflow/flow.hpp"

namespace secflow {

namespace {

// Direction-adjusted field: backward time integrates -X over |t|.
struct SignedField {
  const VectorField& f;
  double sign;
  Vec3 operator()(const Vec3& x) const { return sign * f(x); }
  Mat3 jacobian(const Vec3& x) const { return sign * f.jacobian(x); }
};

}  // namespace

Vec3 flow(const VectorField& f, const Vec3& x, double t, const IntegratorConfig& cfg) {
  if (t == 0.0) return x;
  SignedField sf{f, t > 0 ? 1.0 : -1.0};
  auto rhs = [&](const ode::State<3>& y, ode::State<3>& dy) { dy = sf(y); };
  return ode::integrate<3>(rhs, ode::State<3>(x), std::abs(t), cfg);
}

TangentFlow tangent_flow(const VectorField& f, const Vec3& x, double t,
                         const IntegratorConfig& cfg) {
  TangentFlow out;
  if (t == 0.0) {
    out.point = x;
    return out;
  }
  SignedField sf{f, t > 0 ? 1.0 : -1.0};
  auto rhs = [&](const ode::State<12>& y, ode::State<12>& dy) {
    Vec3 p = y.head<3>();
    Mat3 Y = Eigen::Map<const Mat3>(y.data() + 3);
    dy.head<3>() = sf(p);
    Eigen::Map<Mat3>(dy.data() + 3) = sf.jacobian(p) * Y;
  };
  ode::State<12> y0;
  y0.head<3>() = x;
  Eigen::Map<Mat3>(y0.data() + 3) = Mat3::Identity();
  ode::State<12> y1 = ode::integrate<12>(rhs, y0, std::abs(t), cfg);
  out.point = y1.head<3>();
  out.deriv = Eigen::Map<const Mat3>(y1.data() + 3);
  return out;
}

Mat3 flow_jacobian_fd(const VectorField& f, const Vec3& x, double t, double h,
                      const IntegratorConfig& cfg) {
  if (!(h > 0)) fail(Err::BadConfig, "flow_jacobian_fd: h must be positive");
  Mat3 J;
  for (int j = 0; j < 3; ++j) {
    Vec3 e = Vec3::Zero();
    e[j] = h;
    J.col(j) = (flow(f, x + e, t, cfg) - flow(f, x - e, t, cfg)) / (2.0 * h);
  }
  return J;
}

FlowWithDivergence flow_with_divergence(const VectorField& f, const Vec3& x, double t,
                                        const IntegratorConfig& cfg) {
  FlowWithDivergence out;
  if (t == 0.0) {
    out.point = x;
    return out;
  }
  SignedField sf{f, t > 0 ? 1.0 : -1.0};
  auto rhs = [&](const ode::State<4>& y, ode::State<4>& dy) {
    Vec3 p = y.head<3>();
    dy.head<3>() = sf(p);
    dy[3] = sf.jacobian(p).trace();
  };
  ode::State<4> y0;
  y0.head<3>() = x;
  y0[3] = 0.0;
  ode::State<4> y1 = ode::integrate<4>(rhs, y0, std::abs(t), cfg);
  out.point = y1.head<3>();
  out.div_integral = y1[3];
  return out;
}

}  // namespace secflow
