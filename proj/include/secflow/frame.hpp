#pragma once

#include "secflow/types.hpp"
#include "secflow/vector_field.hpp"

namespace secflow {

/// Orthonormal frame {u, n1, n2} of T_x R^3 adapted to the flow direction:
/// u is the unit field, (n1, n2) spans the normal plane N_x = u^perp.
/// The construction is deterministic: n1 comes from Gram-Schmidt against the
/// first reference axis in (e3, e1) making an angle with u of at least
/// acos(0.9), and n2 = u x n1, so det[u n1 n2] = +1.
struct NormalFrame {
  Vec3 base = Vec3::Zero();
  Vec3 u = Vec3::UnitZ();
  Vec3 n1 = Vec3::UnitX();
  Vec3 n2 = Vec3::UnitY();
  double speed = 0.0;  // ||X(base)||; 0 for frames anchored on a blowup fiber

  Vec3 embed(const Vec2& v) const { return v.x() * n1 + v.y() * n2; }
  Vec2 coords(const Vec3& w) const { return Vec2(n1.dot(w), n2.dot(w)); }
  /// Orthogonal projection of w onto the normal plane.
  Vec3 project(const Vec3& w) const { return w - u.dot(w) * u; }
};

/// Frame for a prescribed unit direction (no field evaluation involved).
NormalFrame frame_from_direction(const Vec3& base, const Vec3& unit_dir);

/// Frame at a regular point of the field; throws NearSingularity when
/// ||X(x)|| <= frame_eps.
NormalFrame normal_frame(const VectorField& f, const Vec3& x, double frame_eps = 1e-8);

/// Matrix of N_from -> N_to, v |-> P_to (D v), in the frames' (n1, n2) bases,
/// where P_to is the orthogonal projection onto the target normal plane.
Mat2 cocycle_matrix(const NormalFrame& from, const NormalFrame& to, const Mat3& D);

}  // namespace secflow
