#include "secflow/vector_field.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace secflow {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

}  // namespace

VectorField VectorField::lorenz(double sigma, double rho, double beta) {
  VectorField f;
  f.kind_ = Kind::Lorenz;
  f.sigma_ = sigma;
  f.rho_ = rho;
  f.beta_ = beta;
  return f;
}

VectorField VectorField::linear(const Mat3& A) {
  VectorField f;
  f.kind_ = Kind::Linear;
  f.A_ = A;
  return f;
}

VectorField VectorField::polynomial(const std::array<std::vector<Monomial>, 3>& comps) {
  for (const auto& comp : comps) {
    for (const auto& m : comp) {
      if (m.i < 0 || m.j < 0 || m.k < 0 || m.i + m.j + m.k > 4)
        fail(Err::BadConfig, "polynomial monomial degree must be in [0, 4]");
      if (!std::isfinite(m.c)) fail(Err::BadConfig, "polynomial coefficient must be finite");
    }
  }
  VectorField f;
  f.kind_ = Kind::Polynomial;
  f.comps_ = comps;
  return f;
}

Vec3 VectorField::operator()(const Vec3& p) const {
  switch (kind_) {
    case Kind::Lorenz:
      return Vec3(sigma_ * (p.y() - p.x()),
                  p.x() * (rho_ - p.z()) - p.y(),
                  p.x() * p.y() - beta_ * p.z());
    case Kind::Linear:
      return A_ * p;
    case Kind::Polynomial: {
      Vec3 v = Vec3::Zero();
      for (int c = 0; c < 3; ++c)
        for (const auto& m : comps_[c])
          v[c] += m.c * ipow(p.x(), m.i) * ipow(p.y(), m.j) * ipow(p.z(), m.k);
      return v;
    }
  }
  return Vec3::Zero();
}

Mat3 VectorField::jacobian(const Vec3& p) const {
  Mat3 J = Mat3::Zero();
  switch (kind_) {
    case Kind::Lorenz:
      J << -sigma_, sigma_, 0.0,
           rho_ - p.z(), -1.0, -p.x(),
           p.y(), p.x(), -beta_;
      return J;
    case Kind::Linear:
      return A_;
    case Kind::Polynomial:
      for (int c = 0; c < 3; ++c) {
        for (const auto& m : comps_[c]) {
          if (m.i > 0)
            J(c, 0) += m.c * m.i * ipow(p.x(), m.i - 1) * ipow(p.y(), m.j) * ipow(p.z(), m.k);
          if (m.j > 0)
            J(c, 1) += m.c * m.j * ipow(p.x(), m.i) * ipow(p.y(), m.j - 1) * ipow(p.z(), m.k);
          if (m.k > 0)
            J(c, 2) += m.c * m.k * ipow(p.x(), m.i) * ipow(p.y(), m.j) * ipow(p.z(), m.k - 1);
        }
      }
      return J;
  }
  return J;
}

VectorField VectorField::negated() const {
  switch (kind_) {
    case Kind::Linear:
      return linear(-A_);
    case Kind::Polynomial: {
      auto comps = comps_;
      for (auto& comp : comps)
        for (auto& m : comp) m.c = -m.c;
      return polynomial(comps);
    }
    case Kind::Lorenz: {
      // -X of a Lorenz field is not in the Lorenz family; spell it out as a polynomial.
      std::array<std::vector<Monomial>, 3> comps;
      comps[0] = {{sigma_, 1, 0, 0}, {-sigma_, 0, 1, 0}};
      comps[1] = {{-rho_, 1, 0, 0}, {1.0, 0, 1, 0}, {1.0, 1, 0, 1}};
      comps[2] = {{-1.0, 1, 1, 0}, {beta_, 0, 0, 1}};
      return polynomial(comps);
    }
  }
  return *this;
}

SingularitySearch find_singularities(const VectorField& f, const Box3& box, double tol) {
  if (!(tol > 0)) fail(Err::BadConfig, "find_singularities: tol must be positive");
  SingularitySearch out;
  const int n = 9;
  const double margin = 0.1 * box.diagonal();
  const int max_iters = 50;
  std::vector<Vec3> roots;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        Vec3 x(box.lo.x() + (box.hi.x() - box.lo.x()) * a / (n - 1),
               box.lo.y() + (box.hi.y() - box.lo.y()) * b / (n - 1),
               box.lo.z() + (box.hi.z() - box.lo.z()) * c / (n - 1));
        bool skipped = false, lost = false;
        for (int it = 0; it < max_iters; ++it) {
          Vec3 v = f(x);
          if (!v.allFinite()) {
            lost = true;
            break;
          }
          if (v.norm() < 0.1 * tol) break;
          Eigen::FullPivLU<Mat3> lu(f.jacobian(x));
          if (!lu.isInvertible()) {
            skipped = true;
            break;
          }
          x -= lu.solve(v);
          if (!x.allFinite()) {
            lost = true;
            break;
          }
        }
        if (skipped) {
          ++out.skipped_seeds;
          continue;
        }
        if (lost || !(f(x).norm() < tol) || !box.contains(x, margin)) continue;
        bool dup = false;
        for (const auto& r : roots) {
          if ((r - x).norm() <= 10.0 * tol) {
            dup = true;
            break;
          }
        }
        if (!dup) roots.push_back(x);
      }
    }
  }
  std::sort(roots.begin(), roots.end(), [](const Vec3& p, const Vec3& q) {
    if (p.x() != q.x()) return p.x() < q.x();
    if (p.y() != q.y()) return p.y() < q.y();
    return p.z() < q.z();
  });
  out.roots = std::move(roots);
  return out;
}

SingularityInfo classify_singularity(const VectorField& f, const Vec3& sigma,
                                     double tol, double sing_tol) {
  if (f(sigma).norm() >= sing_tol)
    fail(Err::NotASingularity, "||X|| = " + std::to_string(f(sigma).norm()) + " at the given point");
  SingularityInfo info;
  info.location = sigma;
  Eigen::EigenSolver<Mat3> es(f.jacobian(sigma));
  std::array<int, 3> order = {0, 1, 2};
  auto ev = es.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (ev[a].real() != ev[b].real()) return ev[a].real() < ev[b].real();
    return ev[a].imag() < ev[b].imag();
  });
  double scale = 0.0;
  for (int k = 0; k < 3; ++k) scale = std::max(scale, std::abs(ev[k]));
  for (int k = 0; k < 3; ++k) {
    auto lam = ev[order[k]];
    info.eigenvalues[k] = lam;
    info.eig_real[k] = std::abs(lam.imag()) <= tol * (1.0 + std::abs(lam));
    if (info.eig_real[k]) {
      Vec3 v = es.eigenvectors().col(order[k]).real();
      v.normalize();
      int imax = 0;
      for (int i = 1; i < 3; ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
      if (v[imax] < 0) v = -v;
      info.eigenvectors[k] = v;
    }
  }
  info.hyperbolic = true;
  for (int k = 0; k < 3; ++k)
    if (std::abs(info.eigenvalues[k].real()) <= tol * (1.0 + std::abs(info.eigenvalues[k])))
      info.hyperbolic = false;
  info.simple_real = info.eig_real[0] && info.eig_real[1] && info.eig_real[2];
  for (int a = 0; a < 3 && info.simple_real; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (std::abs(info.eigenvalues[a] - info.eigenvalues[b]) <= tol * (1.0 + scale))
        info.simple_real = false;

  auto lorenz_like = [&](double l1, double l2, double l3) {
    return l1 < l2 && l2 < 0.0 && 0.0 < l3 && l2 + l3 > 0.0 && -l1 > l3;
  };
  if (info.hyperbolic && info.simple_real) {
    double l1 = info.eigenvalues[0].real();
    double l2 = info.eigenvalues[1].real();
    double l3 = info.eigenvalues[2].real();
    info.lorenz_like_forward = lorenz_like(l1, l2, l3);
    // For -X the spectrum negates and reverses order.
    info.lorenz_like_backward = lorenz_like(-l3, -l2, -l1);
  }
  return info;
}

}  // namespace secflow
