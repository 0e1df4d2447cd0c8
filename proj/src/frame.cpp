#include "secflow/frame.hpp"

#include <cmath>

namespace secflow {

NormalFrame frame_from_direction(const Vec3& base, const Vec3& unit_dir) {
  Vec3 u = unit_dir;
  double n = u.norm();
  if (!(n > 0) || !u.allFinite())
    fail(Err::DegenerateExtension, "frame direction must be a nonzero finite vector");
  u /= n;
  Vec3 r = Vec3::UnitZ();
  if (std::abs(r.dot(u)) >= 0.9) r = Vec3::UnitX();
  NormalFrame fr;
  fr.base = base;
  fr.u = u;
  fr.n1 = (r - r.dot(u) * u).normalized();
  fr.n2 = u.cross(fr.n1);
  return fr;
}

NormalFrame normal_frame(const VectorField& f, const Vec3& x, double frame_eps) {
  Vec3 v = f(x);
  double speed = v.norm();
  if (speed <= frame_eps)
    fail(Err::NearSingularity,
         "||X|| = " + std::to_string(speed) + " <= frame_eps at the requested point");
  NormalFrame fr = frame_from_direction(x, v / speed);
  fr.speed = speed;
  return fr;
}

Mat2 cocycle_matrix(const NormalFrame& from, const NormalFrame& to, const Mat3& D) {
  Mat2 m;
  for (int j = 0; j < 2; ++j) {
    Vec3 img = D * (j == 0 ? from.n1 : from.n2);
    m(0, j) = to.n1.dot(img);
    m(1, j) = to.n2.dot(img);
  }
  return m;
}

}  // namespace secflow
