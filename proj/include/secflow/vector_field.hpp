#pragma once

#include <array>
#include <complex>
#include <vector>

#include "secflow/types.hpp"

namespace secflow {

/// One term c * x^i y^j z^k of a polynomial component.
struct Monomial {
  double c = 0.0;
  int i = 0, j = 0, k = 0;
};

/// Autonomous vector field on R^3 with an exact Jacobian.
///
/// Three kinds are supported: the Lorenz family, linear fields x -> A x,
/// and polynomial fields given by per-component monomial lists with total
/// degree at most 4.  Evaluation and Jacobian are closed-form in all cases;
/// no numerical differentiation is involved.
class VectorField {
 public:
  enum class Kind { Lorenz, Linear, Polynomial };

  static VectorField lorenz(double sigma, double rho, double beta);
  static VectorField linear(const Mat3& A);
  static VectorField polynomial(const std::array<std::vector<Monomial>, 3>& comps);

  Vec3 operator()(const Vec3& x) const;
  Mat3 jacobian(const Vec3& x) const;
  double divergence(const Vec3& x) const { return jacobian(x).trace(); }

  /// The field -X, used for backward-time statements.
  VectorField negated() const;

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  double rho() const { return rho_; }
  double beta() const { return beta_; }
  const Mat3& matrix() const { return A_; }
  const std::array<std::vector<Monomial>, 3>& components() const { return comps_; }

 private:
  VectorField() = default;

  Kind kind_ = Kind::Linear;
  double sigma_ = 0, rho_ = 0, beta_ = 0;
  Mat3 A_ = Mat3::Zero();
  std::array<std::vector<Monomial>, 3> comps_;
};

/// Eigen-structure of a zero of the field.  Eigenvalues are sorted by real
/// part (ties broken by imaginary part); eigenvectors are unit vectors with
/// the largest-magnitude component made positive, and are only meaningful
/// for the indices where eig_real is set.
struct SingularityInfo {
  Vec3 location = Vec3::Zero();
  std::array<std::complex<double>, 3> eigenvalues{};
  // Slots without a real eigenvalue stay zero; Eigen default construction
  // would leave them unset and leak allocator noise into the reports.
  std::array<Vec3, 3> eigenvectors{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<bool, 3> eig_real{};
  bool hyperbolic = false;
  bool simple_real = false;
  bool lorenz_like_forward = false;
  bool lorenz_like_backward = false;
};

struct SingularitySearch {
  std::vector<Vec3> roots;  // lexicographically sorted, ||X(root)|| < tol
  int skipped_seeds = 0;    // Newton seeds abandoned on a singular Jacobian
};

/// Newton search for zeros of the field from a 9x9x9 seed grid over the box.
SingularitySearch find_singularities(const VectorField& f, const Box3& box,
                                     double tol = 1e-12);

/// Classify an (approximate) zero of the field.  Reality, simplicity and
/// hyperbolicity splits use |.| <= tol * (1 + |lambda|) style thresholds.
/// Throws NotASingularity when ||X(sigma)|| >= sing_tol.
SingularityInfo classify_singularity(const VectorField& f, const Vec3& sigma,
                                     double tol = 1e-9, double sing_tol = 1e-9);

}  // namespace secflow
