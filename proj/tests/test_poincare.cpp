#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "secflow/poincare.hpp"

using namespace secflow;

namespace {

const IntegratorConfig kCfg;

std::vector<Vec3> attractor_points(int n, unsigned seed) {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dt(0.3, 1.7);
  std::vector<Vec3> pts;
  Vec3 p = flow(f, Vec3(1, 1, 1), 30.0, kCfg);
  for (int i = 0; i < n; ++i) {
    p = flow(f, p, dt(rng), kCfg);
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST_CASE("saddle normal cocycle on the unstable axis, closed form") {
  VectorField f = VectorField::linear(Vec3(-3, -1, 2).asDiagonal());
  Vec3 x(0, 0, 1);
  double t = std::log(2.0);

  PoincareCocycle psi = linear_poincare(f, x, t, kCfg);
  Mat2 want;
  want << 0.125, 0, 0, 0.5;
  CHECK((psi.mat - want).norm() < 1e-8);
  CHECK_FALSE(psi.rescaled);
  CHECK(psi.from.speed == doctest::Approx(2));
  CHECK(psi.to.speed == doctest::Approx(8).epsilon(1e-9));

  PoincareCocycle star = rescaled_linear_poincare(f, x, t, kCfg);
  Mat2 want_star;
  want_star << 1.0 / 32, 0, 0, 0.125;
  CHECK((star.mat - want_star).norm() < 1e-8);
  CHECK(star.rescaled);
}

TEST_CASE("normal cocycle composes over consecutive legs") {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  // the junction error scales with the integration tolerance, so the law is
  // checked well below the 1e-8 bound by tightening the integrator
  IntegratorConfig tight = kCfg;
  tight.rel_tol = 1e-12;
  tight.abs_tol = 1e-14;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> dt(0.2, 1.0);
  double worst_plain = 0, worst_rescaled = 0;
  for (const Vec3& x : attractor_points(25, 43)) {
    double t = dt(rng), s = dt(rng);
    Vec3 mid = flow(f, x, t, tight);

    Mat2 once = linear_poincare(f, x, t + s, tight).mat;
    Mat2 legs = linear_poincare(f, mid, s, tight).mat * linear_poincare(f, x, t, tight).mat;
    worst_plain = std::max(worst_plain, (once - legs).norm() / once.norm());

    Mat2 ronce = rescaled_linear_poincare(f, x, t + s, tight).mat;
    Mat2 rlegs = rescaled_linear_poincare(f, mid, s, tight).mat *
                 rescaled_linear_poincare(f, x, t, tight).mat;
    worst_rescaled = std::max(worst_rescaled, (ronce - rlegs).norm() / ronce.norm());
  }
  CHECK(worst_plain <= 1e-8);
  CHECK(worst_rescaled <= 1e-8);
}

TEST_CASE("rescaling factor is the speed ratio") {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  for (const Vec3& x : attractor_points(10, 47)) {
    PoincareCocycle plain = linear_poincare(f, x, 0.6, kCfg);
    PoincareCocycle star = rescaled_linear_poincare(f, x, 0.6, kCfg);
    double ratio = plain.from.speed / plain.to.speed;
    CHECK((star.mat - ratio * plain.mat).norm() < 1e-10 * plain.mat.norm());
  }
}

TEST_CASE("zero section vector rides the orbit itself") {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  Vec3 x = attractor_points(1, 53)[0];
  SectionMapResult r = sectional_poincare(f, x, Vec2::Zero(), 0.7, kCfg);
  CHECK(r.v.norm() < 1e-8);
  CHECK(std::abs(r.tau) < 1e-8);
  CHECK(r.source_speed == doctest::Approx(f(x).norm()));
}

TEST_CASE("derivative of the section map at zero is the linear cocycle") {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  double t = 0.6;
  for (const Vec3& x : attractor_points(10, 59)) {
    Mat2 psi = linear_poincare(f, x, t, kCfg).mat;
    // absolute displacements: small enough to kill the quadratic term, large
    // enough to stay clear of the crossing-detection noise floor
    auto fd = [&](double h) {
      Mat2 d;
      for (int c = 0; c < 2; ++c) {
        Vec2 e = Vec2::Zero();
        e[c] = h;
        Vec2 plus = sectional_poincare(f, x, e, t, kCfg).v;
        Vec2 minus = sectional_poincare(f, x, -e, t, kCfg).v;
        d.col(c) = (plus - minus) / (2 * h);
      }
      return d;
    };
    CHECK((fd(1e-3) - psi).norm() / psi.norm() < 1e-4);
    double c1 = (fd(8e-3) - psi).norm() / psi.norm();
    double c2 = (fd(4e-3) - psi).norm() / psi.norm();
    if (c1 > 1e-7) CHECK(c2 < 0.6 * c1);
  }
}

TEST_CASE("rescaled section map composes as a local flow") {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> dt(0.15, 0.45);
  std::normal_distribution<double> g;
  int usable = 0;
  for (const Vec3& x : attractor_points(25, 67)) {
    double t = dt(rng), s = dt(rng);
    Vec2 u(g(rng), g(rng));
    u *= 0.01 / u.norm();
    try {
      SectionMapResult first = rescaled_sectional_poincare(f, x, u, t, kCfg);
      if (first.v.norm() >= 0.05) continue;
      Vec3 mid = flow(f, x, t, kCfg);
      SectionMapResult second = rescaled_sectional_poincare(f, mid, first.v, s, kCfg);
      SectionMapResult once = rescaled_sectional_poincare(f, x, u, t + s, kCfg);
      CHECK((once.v - second.v).norm() <= 1e-8 + 1e-6 * u.norm());
      ++usable;
    } catch (const FlowError& e) {
      // legs that leave the admissible tube before crossing do not count
      CHECK((e.code() == Err::OutOfDomain || e.code() == Err::NoCrossing));
    }
  }
  CHECK(usable >= 15);
}

TEST_CASE("identification at the same base point is the identity") {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  Vec3 x = attractor_points(1, 71)[0];
  Vec2 u(0.003, -0.004);
  IdentificationResult r = identification_project(f, x, x, u, kCfg);
  CHECK((r.v - u).norm() < 1e-6 * u.norm() + 1e-10);
  CHECK(std::abs(r.s) < 1e-6);
}

TEST_CASE("identification of the zero vector undoes a small time shift") {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  SectionConfig sec;
  sec.s_max = 0.1;  // short window, the plane at x is crossed exactly once
  double eps = 0.02;
  int usable = 0;
  for (const Vec3& x : attractor_points(8, 73)) {
    Vec3 y = flow(f, x, eps, kCfg);
    try {
      IdentificationResult r = identification_project(f, x, y, Vec2::Zero(), kCfg, sec);
      CHECK(r.v.norm() < 1e-7);
      CHECK(r.s == doctest::Approx(-eps).epsilon(1e-6));
      ++usable;
    } catch (const FlowError& e) {
      CHECK(e.code() == Err::AmbiguousCrossing);
    }
  }
  CHECK(usable >= 5);
}

TEST_CASE("identification composes over a chain of nearby points") {
  VectorField f = VectorField::linear((Mat3() << -3, 0.4, 0, 0.2, -1, 0.1, 0, -0.3,
                                       2).finished());
  Vec3 x(0.9, 0.1, 1.1);
  Vec3 z = flow(f, x, 0.015, kCfg);
  Vec3 y = flow(f, x, 0.03, kCfg);
  Vec2 u(0.004, 0.002);
  Vec2 direct = identification_project(f, x, y, u, kCfg).v;
  Vec2 via_z = identification_project(f, x, z, identification_project(f, z, y, u, kCfg).v,
                                      kCfg).v;
  CHECK((direct - via_z).norm() < 1e-10);
}

TEST_CASE("identification is invariant along the local sectional flow") {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  SectionConfig sec;
  sec.s_max = 0.1;
  int usable = 0;
  for (const Vec3& x : attractor_points(12, 79)) {
    double t = 0.08;
    Vec3 y = flow(f, x, -0.04, kCfg);
    Vec2 u(0.004, -0.003);
    try {
      Vec2 before = identification_project(f, x, y, u, kCfg, sec).v;
      SectionMapResult moved = rescaled_sectional_poincare(f, y, u, t, kCfg);
      Vec2 after = identification_project(f, x, flow(f, y, t, kCfg), moved.v, kCfg, sec).v;
      CHECK((before - after).norm() <= 1e-8);
      ++usable;
    } catch (const FlowError& e) {
      CHECK(e.code() == Err::AmbiguousCrossing);
    }
  }
  CHECK(usable >= 8);
}

TEST_CASE("identification rejects distant bases and reports missed crossings") {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  Vec3 x = attractor_points(1, 83)[0];
  double r0 = 0.1 * f(x).norm();
  try {
    identification_project(f, x, x + Vec3(2 * r0, 0, 0), Vec2::Zero(), kCfg);
    CHECK(false);
  } catch (const FlowError& e) {
    CHECK(e.code() == Err::OutOfDomain);
  }

  SectionConfig tight;
  tight.s_max = 0.01;
  try {
    identification_project(f, x, flow(f, x, -0.02, kCfg), Vec2::Zero(), kCfg, tight);
    CHECK(false);
  } catch (const FlowError& e) {
    CHECK(e.code() == Err::NoCrossing);
  }
}

TEST_CASE("oversized section vectors are rejected") {
  VectorField f = VectorField::lorenz(10, 28, 8.0 / 3.0);
  Vec3 x = attractor_points(1, 89)[0];
  double speed = f(x).norm();
  try {
    sectional_poincare(f, x, Vec2(speed, 0), 0.5, kCfg);
    CHECK(false);
  } catch (const FlowError& e) {
    CHECK(e.code() == Err::OutOfDomain);
  }
}
