#include "secflow/chain.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "secflow/parallel.hpp"

namespace secflow {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (jobs <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = std::min(jobs, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto body = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  for (int i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

Mat2 CocycleChain::psi_product(int i, int m) const {
  Mat2 p = Mat2::Identity();
  for (int k = i; k < i + m; ++k) p = blocks[k].psi * p;
  return p;
}

Mat3 CocycleChain::dphi_product(int i, int m) const {
  Mat3 p = Mat3::Identity();
  for (int k = i; k < i + m; ++k) p = blocks[k].dphi * p;
  return p;
}

bool CocycleChain::psi_window_valid(int i, int m) const {
  if (i < 0 || i + m > static_cast<int>(blocks.size())) return false;
  for (int k = i; k < i + m; ++k)
    if (!blocks[k].psi_valid) return false;
  return true;
}

double CocycleChain::rescale(int i, int m) const {
  return samples[i].field.norm() / samples[i + m].field.norm();
}

CocycleChain build_chain(const VectorField& f, const SampleConfig& sc,
                         const IntegratorConfig& cfg) {
  if (sc.n <= 0 || sc.lead < 0 || !(sc.spacing > 0))
    fail(Err::BadConfig, "chain: need n > 0, lead >= 0, spacing > 0");
  CocycleChain chain;
  chain.spacing = sc.spacing;
  chain.lead = sc.lead;
  const int total = sc.n + 2 * sc.lead;

  Vec3 p = sc.transient != 0.0 ? flow(f, sc.seed, sc.transient, cfg) : sc.seed;
  chain.samples.resize(total);
  for (int i = 0; i < total; ++i) {
    OrbitSample& s = chain.samples[i];
    s.t = sc.transient + i * sc.spacing;
    s.x = p;
    s.field = f(p);
    s.jac = f.jacobian(p);
    s.near_singular = s.field.norm() <= sc.frame_eps;
    if (!s.near_singular) s.frame = normal_frame(f, p, sc.frame_eps);
    if (i + 1 < total) p = flow(f, p, sc.spacing, cfg);
  }

  chain.blocks.resize(total - 1);
  parallel_for(total - 1, sc.jobs, [&](int i) {
    const OrbitSample& a = chain.samples[i];
    const OrbitSample& b = chain.samples[i + 1];
    ChainBlock& blk = chain.blocks[i];
    TangentFlow tf = tangent_flow(f, a.x, sc.spacing, cfg);
    blk.dphi = tf.deriv;
    blk.speed_from = a.field.norm();
    blk.speed_to = b.field.norm();
    blk.psi_valid = !a.near_singular && !b.near_singular;
    if (blk.psi_valid) blk.psi = cocycle_matrix(a.frame, b.frame, tf.deriv);
  });
  return chain;
}

std::vector<OrbitSample> sample_attractor(const VectorField& f, const SampleConfig& sc,
                                          const IntegratorConfig& cfg) {
  SampleConfig inner = sc;
  inner.lead = 0;
  CocycleChain chain = build_chain(f, inner, cfg);
  return chain.samples;
}

namespace {

Vec2 sign_normalize(Vec2 v) {
  int imax = std::abs(v[0]) >= std::abs(v[1]) ? 0 : 1;
  if (v[imax] < 0) v = -v;
  return v;
}

}  // namespace

SplittingEstimate estimate_splitting(const CocycleChain& chain, double T,
                                     const PowerConfig& pc) {
  if (!(T > 0)) fail(Err::BadConfig, "estimate_splitting: T must be positive");
  int stride = static_cast<int>(std::llround(T / chain.spacing));
  if (stride < 1 || std::abs(stride * chain.spacing - T) > 1e-9 * std::max(1.0, T))
    fail(Err::BadConfig, "estimate_splitting: T must be a multiple of the chain spacing");

  SplittingEstimate est;
  est.T = T;
  est.stride = stride;
  est.k_pow = pc.k_pow;
  est.window = pc.k_pow * stride * chain.spacing;
  const int n = chain.report_count();
  est.dirs.resize(n);

  const Vec2 seed1 = Vec2(1, 1).normalized();
  const Vec2 seed2 = Vec2(1, -1).normalized();
  int n_conv = 0;
  double angle_min = M_PI;
  for (int r = 0; r < n; ++r) {
    DirectionEstimate& d = est.dirs[r];
    const int a = chain.report_begin() + r;
    if (chain.samples[a].near_singular) {
      d.reason = "near-singular sample";
      continue;
    }
    if (a - pc.k_pow * stride < 0 ||
        a + pc.k_pow * stride > static_cast<int>(chain.blocks.size())) {
      d.reason = "insufficient history in the chain";
      continue;
    }
    bool valid = true;
    Vec2 vf1 = seed1, vf2 = seed2;
    for (int j = pc.k_pow; j >= 1 && valid; --j) {
      int i0 = a - j * stride;
      if (!chain.psi_window_valid(i0, stride)) {
        valid = false;
        break;
      }
      Mat2 W = chain.psi_product(i0, stride);
      vf1 = W * vf1;
      vf2 = W * vf2;
      double m1 = vf1.norm(), m2 = vf2.norm();
      if (!(m1 > 0) || !(m2 > 0) || !vf1.allFinite() || !vf2.allFinite()) {
        valid = false;
        break;
      }
      vf1 /= m1;
      vf2 /= m2;
    }
    if (!valid) {
      d.reason = "degenerate or near-singular forward window";
      continue;
    }
    Vec2 ve1 = seed1, ve2 = seed2;
    for (int j = pc.k_pow; j >= 1 && valid; --j) {
      int i0 = a + (j - 1) * stride;
      if (!chain.psi_window_valid(i0, stride)) {
        valid = false;
        break;
      }
      Mat2 W = chain.psi_product(i0, stride);
      double det = W.determinant();
      if (!(std::abs(det) > 0) || !std::isfinite(det)) {
        valid = false;
        break;
      }
      Mat2 Winv;
      Winv << W(1, 1), -W(0, 1), -W(1, 0), W(0, 0);
      Winv /= det;
      ve1 = Winv * ve1;
      ve2 = Winv * ve2;
      double m1 = ve1.norm(), m2 = ve2.norm();
      if (!(m1 > 0) || !(m2 > 0) || !ve1.allFinite() || !ve2.allFinite()) {
        valid = false;
        break;
      }
      ve1 /= m1;
      ve2 /= m2;
    }
    if (!valid) {
      d.reason = "degenerate or near-singular backward window";
      continue;
    }
    // Near-zero line angles via the cross product; acos of the dot product
    // bottoms out around sqrt(eps) and cannot resolve a 1e-8 tolerance.
    auto line_angle = [](const Vec2& a, const Vec2& b) {
      return std::asin(std::min(1.0, std::abs(a.x() * b.y() - a.y() * b.x())));
    };
    double agree_f = line_angle(vf1, vf2);
    double agree_e = line_angle(ve1, ve2);
    d.f_dir = sign_normalize(vf1);
    d.e_dir = sign_normalize(ve1);
    d.angle = std::acos(std::min(1.0, std::abs(d.e_dir.dot(d.f_dir))));
    if (agree_f > pc.dir_tol || agree_e > pc.dir_tol) {
      d.reason = "power iteration did not settle";
      continue;
    }
    if (d.angle < pc.angle_floor) {
      d.reason = "directions collapse onto each other";
      continue;
    }
    d.converged = true;
    ++n_conv;
    angle_min = std::min(angle_min, d.angle);
  }
  est.converged_fraction = n > 0 ? static_cast<double>(n_conv) / n : 0.0;
  est.angle_min = n_conv > 0 ? angle_min : 0.0;
  return est;
}

}  // namespace secflow
