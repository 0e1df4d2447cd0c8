#include "secflow/poincare.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace secflow {

namespace {

struct TimedPoint {
  double s = 0.0;  // unsigned integration time from the scan origin
  Vec3 z = Vec3::Zero();
};

/// Bracket-preserving secant iteration (Illinois variant) for g along the
/// trajectory parametrized by unsigned time; eval re-integrates from the
/// nearest recorded state, so every call is deterministic.
double refine_root(const std::function<double(double)>& g, double a, double b,
                   double ga, double gb, double gtol) {
  if (std::abs(ga) <= gtol) return a;
  if (std::abs(gb) <= gtol) return b;
  double best = b, gbest = gb;
  for (int it = 0; it < 200; ++it) {
    double c = b - gb * (b - a) / (gb - ga);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    double gc = g(c);
    if (std::abs(gc) < std::abs(gbest)) {
      best = c;
      gbest = gc;
    }
    if (std::abs(gc) <= gtol || std::abs(b - a) <= 1e-16 * (1.0 + std::abs(b))) return c;
    if (gc * gb < 0) {
      a = b;
      ga = gb;
    } else {
      ga *= 0.5;
    }
    b = c;
    gb = gc;
  }
  return best;
}

}  // namespace

PoincareCocycle linear_poincare(const VectorField& f, const Vec3& x, double t,
                                const IntegratorConfig& cfg, double frame_eps) {
  PoincareCocycle c;
  c.from = normal_frame(f, x, frame_eps);
  TangentFlow tf = tangent_flow(f, x, t, cfg);
  c.to = normal_frame(f, tf.point, frame_eps);
  c.t = t;
  c.mat = cocycle_matrix(c.from, c.to, tf.deriv);
  return c;
}

PoincareCocycle rescaled_linear_poincare(const VectorField& f, const Vec3& x, double t,
                                         const IntegratorConfig& cfg, double frame_eps) {
  PoincareCocycle c = linear_poincare(f, x, t, cfg, frame_eps);
  c.mat *= c.from.speed / c.to.speed;
  c.rescaled = true;
  return c;
}

SectionMapResult sectional_poincare(const VectorField& f, const Vec3& x, const Vec2& v,
                                    double t, const IntegratorConfig& cfg,
                                    const SectionConfig& sec) {
  NormalFrame f0 = normal_frame(f, x, sec.frame_eps);
  double radius = sec.beta_sec * f0.speed;
  if (v.norm() > radius * (1.0 + 1e-12))
    fail(Err::OutOfDomain, "section displacement exceeds beta_sec * ||X(x)||");

  const double sign = t >= 0 ? 1.0 : -1.0;
  const double span = std::abs(t);
  const double lo_rec = std::max(0.0, span - sec.tau_max);
  auto fdir = [&](const Vec3& p) { return sign * f(p); };

  // Carry the base point and the displaced point jointly through the whole
  // window [0, t + tau_max], recording the displaced point once inside the
  // crossing window.  Tube violations before the recording window abort
  // immediately; later ones only invalidate crossings that come after them.
  std::vector<TimedPoint> rec;
  double first_violation = std::numeric_limits<double>::infinity();
  auto rhs6 = [&](const ode::State<6>& y, ode::State<6>& dy) {
    dy.head<3>() = fdir(y.head<3>());
    dy.tail<3>() = fdir(y.tail<3>());
  };
  Vec3 p;
  bool have_p = false;
  ode::State<6> yt;
  auto tube_obs = [&](double s, const ode::State<6>& y) {
    Vec3 b = y.head<3>(), z = y.tail<3>();
    double tube = sec.tube_factor * sec.beta_sec * f(b).norm();
    if ((z - b).norm() > tube) {
      if (s < lo_rec)
        fail(Err::OutOfDomain, "trajectory left the flow tube at time offset " +
                                   std::to_string(sign * s));
      first_violation = std::min(first_violation, s);
    }
    if (s >= lo_rec) rec.push_back({s, z});
    if (!have_p && s >= span) {
      p = b;
      have_p = true;
    }
  };
  ode::State<6> y0;
  y0.head<3>() = x;
  y0.tail<3>() = x + f0.embed(v);
  if (span > 0) {
    yt = ode::integrate<6>(rhs6, y0, span, cfg, tube_obs);
  } else {
    yt = y0;
    rec.push_back({0.0, y0.tail<3>()});
  }
  if (!have_p) p = yt.head<3>();
  have_p = true;
  NormalFrame fp = normal_frame(f, p, sec.frame_eps);
  if (rec.empty() || rec.back().s < span) rec.push_back({span, yt.tail<3>()});

  const Vec3 Xp = f(p);
  auto plane = [&](const Vec3& z) { return (z - p).dot(Xp); };
  const double gtol = 1e-12 * fp.speed * fp.speed;

  {
    auto tail_obs = [&](double s, const ode::State<6>& y) {
      if (s == 0.0) return;
      tube_obs(span + s, y);
    };
    ode::integrate<6>(rhs6, yt, sec.tau_max, cfg, tail_obs);
  }

  // Nearest crossing to s = span wins; records past the first tube violation
  // do not count.
  int best = -1;
  double best_dist = 0.0;
  double exact_s = span;
  bool exact_hit = false;
  for (size_t i = 0; i + 1 < rec.size(); ++i) {
    if (rec[i + 1].s > first_violation) break;
    double ga = plane(rec[i].z), gb = plane(rec[i + 1].z);
    if (std::abs(ga) <= gtol || std::abs(gb) <= gtol) {
      double s_hit = std::abs(ga) <= gtol ? rec[i].s : rec[i + 1].s;
      if (!exact_hit || std::abs(s_hit - span) < std::abs(exact_s - span)) {
        exact_s = s_hit;
        exact_hit = true;
      }
      continue;
    }
    if (ga * gb < 0) {
      double d = std::min(std::abs(rec[i].s - span), std::abs(rec[i + 1].s - span));
      if (best < 0 || d < best_dist) {
        best = static_cast<int>(i);
        best_dist = d;
      }
    }
  }

  auto z_at = [&](double s) -> Vec3 {
    size_t k = 0;
    for (size_t i = 0; i < rec.size(); ++i)
      if (rec[i].s <= s + 1e-15) k = i;
    if (rec[k].s >= s) return rec[k].z;
    auto rhs3 = [&](const ode::State<3>& y, ode::State<3>& dy) { dy = fdir(y); };
    return ode::integrate<3>(rhs3, ode::State<3>(rec[k].z), s - rec[k].s, cfg);
  };

  double s_star;
  Vec3 z_star;
  if (exact_hit && (best < 0 || std::abs(exact_s - span) <= best_dist)) {
    s_star = exact_s;
    z_star = z_at(s_star);
  } else if (best >= 0) {
    auto gfun = [&](double s) { return plane(z_at(s)); };
    s_star = refine_root(gfun, rec[best].s, rec[best + 1].s, plane(rec[best].z),
                         plane(rec[best + 1].z), gtol);
    z_star = z_at(s_star);
  } else if (std::isfinite(first_violation)) {
    fail(Err::OutOfDomain, "trajectory left the flow tube before crossing the section");
  } else {
    fail(Err::NoCrossing, "no section crossing within tau_max of the nominal time");
  }

  SectionMapResult out;
  out.tau = sign * (s_star - span);
  out.v = fp.coords(z_star - p);
  out.source_speed = f0.speed;
  out.target_speed = fp.speed;
  return out;
}

SectionMapResult rescaled_sectional_poincare(const VectorField& f, const Vec3& x,
                                             const Vec2& u, double t,
                                             const IntegratorConfig& cfg,
                                             const SectionConfig& sec) {
  if (u.norm() > sec.beta_sec * (1.0 + 1e-12))
    fail(Err::OutOfDomain, "rescaled displacement exceeds beta_sec");
  NormalFrame f0 = normal_frame(f, x, sec.frame_eps);
  SectionMapResult r = sectional_poincare(f, x, f0.speed * u, t, cfg, sec);
  r.v /= r.target_speed;
  return r;
}

IdentificationResult identification_project(const VectorField& f, const Vec3& x,
                                            const Vec3& y, const Vec2& u,
                                            const IntegratorConfig& cfg,
                                            const SectionConfig& sec) {
  NormalFrame fx = normal_frame(f, x, sec.frame_eps);
  NormalFrame fy = normal_frame(f, y, sec.frame_eps);
  if ((y - x).norm() >= sec.r0_scale * fx.speed)
    fail(Err::OutOfDomain, "base points are farther apart than r0");
  if (u.norm() > sec.beta0 * (1.0 + 1e-12))
    fail(Err::OutOfDomain, "identification input exceeds beta0");

  const Vec3 z0 = y + fy.speed * fy.embed(u);
  const Vec3 Xx = f(x);
  auto plane = [&](const Vec3& z) { return (z - x).dot(Xx); };
  const double gtol = 1e-12 * fx.speed * fx.speed;
  const double local_radius = 0.5 * fx.speed;  // crossings beyond this are not local

  IdentificationResult out;
  if (std::abs(plane(z0)) <= gtol) {
    out.s = 0.0;
    out.v = fx.coords(z0 - x) / fx.speed;
    return out;
  }

  // Scan both time directions; a local transversal crossing on each side (or
  // two on one side) makes the projection ambiguous.
  struct Bracket {
    double sign;
    TimedPoint a, b;
  };
  std::vector<Bracket> brackets;
  std::vector<TimedPoint> rec_fwd, rec_bwd;
  for (double dir : {1.0, -1.0}) {
    auto& rec = dir > 0 ? rec_fwd : rec_bwd;
    auto rhs3 = [&](const ode::State<3>& yv, ode::State<3>& dy) { dy = dir * f(yv); };
    auto obsrv = [&](double s, const ode::State<3>& yv) { rec.push_back({s, Vec3(yv)}); };
    ode::integrate<3>(rhs3, ode::State<3>(z0), sec.s_max, cfg, obsrv);
    for (size_t i = 0; i + 1 < rec.size(); ++i) {
      if ((rec[i].z - x).norm() > local_radius && (rec[i + 1].z - x).norm() > local_radius)
        continue;
      double ga = plane(rec[i].z), gb = plane(rec[i + 1].z);
      if (std::abs(ga) <= gtol) continue;  // root already claimed by the previous pair
      if (ga * gb < 0 || std::abs(gb) <= gtol)
        brackets.push_back({dir, rec[i], rec[i + 1]});
    }
  }
  if (brackets.empty())
    fail(Err::NoCrossing, "the carried point does not cross the section at x within s_max");
  if (brackets.size() > 1)
    fail(Err::AmbiguousCrossing, "multiple section crossings within s_max");

  const Bracket& br = brackets.front();
  auto z_at = [&](double s) -> Vec3 {
    auto rhs3 = [&](const ode::State<3>& yv, ode::State<3>& dy) { dy = br.sign * f(yv); };
    return ode::integrate<3>(rhs3, ode::State<3>(br.a.z), s - br.a.s, cfg);
  };
  auto gfun = [&](double s) { return plane(z_at(s)); };
  double s_star =
      refine_root(gfun, br.a.s, br.b.s, plane(br.a.z), plane(br.b.z), gtol);
  Vec3 z_star = z_at(s_star);
  out.s = br.sign * s_star;
  out.v = fx.coords(z_star - x) / fx.speed;
  return out;
}

}  // namespace secflow
