#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace secflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Axis-aligned box in R^3, used as the search/analysis domain.
struct Box3 {
  Vec3 lo = Vec3(-1, -1, -1);
  Vec3 hi = Vec3(1, 1, 1);

  double diagonal() const { return (hi - lo).norm(); }

  bool contains(const Vec3& x, double margin = 0.0) const {
    for (int i = 0; i < 3; ++i) {
      if (x[i] < lo[i] - margin || x[i] > hi[i] + margin) return false;
    }
    return true;
  }

  static Box3 cube(double r) { return Box3{Vec3(-r, -r, -r), Vec3(r, r, r)}; }
};

enum class Err {
  SingularJacobian,
  NotASingularity,
  StepLimitExceeded,
  BlowUp,
  NearSingularity,
  NoCrossing,
  AmbiguousCrossing,
  OutOfDomain,
  OutOfChart,
  DegenerateExtension,
  TauNotFound,
  NotConverged,
  BadConfig,
};

const char* err_name(Err e);

/// All numerical failure modes surface as FlowError with a stable code,
/// so callers can record them per item instead of aborting a whole run.
class FlowError : public std::runtime_error {
 public:
  FlowError(Err code, const std::string& what)
      : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) {
  throw FlowError(code, what);
}

}  // namespace secflow
