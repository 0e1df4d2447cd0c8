#include "secflow/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>

namespace secflow {

namespace {

Json vec_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }
Json vec_json(const Vec2& v) { return Json::array({v[0], v[1]}); }

Json mat_json(const Mat3& m) {
  Json rows = Json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(Json::array({m(i, 0), m(i, 1), m(i, 2)}));
  return rows;
}

Json mat_json(const Mat2& m) {
  return Json::array({Json::array({m(0, 0), m(0, 1)}), Json::array({m(1, 0), m(1, 1)})});
}

void dump(const Json& j, std::string& out, int indent) {
  const std::string pad(2 * indent, ' ');
  const std::string pad1(2 * (indent + 1), ' ');
  switch (j.type()) {
    case Json::value_t::null:
      out += "null";
      return;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<long long>());
      return;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<unsigned long long>());
      return;
    case Json::value_t::number_float: {
      out += format_num(j.get<double>());
      return;
    }
    case Json::value_t::string:
      out += Json(j.get<std::string>()).dump();
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        out += pad1;
        dump(j[i], out, indent + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "]";
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad1 + Json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "}";
      return;
    }
    default:
      out += "null";
      return;
  }
}

}  // namespace

std::string format_num(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string dump_json(const Json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

Json json_of(const RunConfig& c) {
  Json field;
  field["kind"] = c.field_kind;
  if (c.field_kind == "lorenz") {
    field["sigma"] = c.sigma;
    field["rho"] = c.rho;
    field["beta"] = c.beta;
  } else if (c.field_kind == "linear") {
    field["A"] = mat_json(c.A);
  } else {
    const char* names[3] = {"poly_x", "poly_y", "poly_z"};
    for (int k = 0; k < 3; ++k) {
      Json terms = Json::array();
      for (const Monomial& m : c.poly[k])
        terms.push_back(Json::array({m.c, m.i, m.j, m.k}));
      field[names[k]] = terms;
    }
  }
  field["box"] = Json{{"lo", vec_json(c.box.lo)}, {"hi", vec_json(c.box.hi)}};

  Json integ{{"rel_tol", c.integ.rel_tol},
             {"abs_tol", c.integ.abs_tol},
             {"max_step", c.integ.max_step},
             {"max_steps", c.integ.max_steps},
             {"escape_radius", c.integ.escape_radius}};

  Json analysis;
  analysis["seed_point"] = vec_json(c.seed_point);
  analysis["transient"] = c.transient;
  analysis["n"] = c.n;
  analysis["spacing"] = c.spacing;
  analysis["frame_eps"] = c.frame_eps;
  analysis["T_grid"] = c.T_grid;
  analysis["split_T"] = c.split_T;
  analysis["k_pow"] = c.power.k_pow;
  analysis["dir_tol"] = c.power.dir_tol;
  analysis["angle_floor"] = c.power.angle_floor;
  analysis["threshold"] = c.check.threshold;
  analysis["pass_fraction_min"] = c.check.pass_fraction_min;
  analysis["min_converged"] = c.min_converged;
  analysis["sing_tol"] = c.sing_tol;
  analysis["chart_eps"] = c.chart_eps;
  analysis["wss_radius"] = c.wss.radius;
  analysis["wss_backflow"] = c.wss.backflow;
  analysis["wss_points"] = c.wss.n_pts;
  analysis["wss_threshold"] = c.wss.sep_threshold;
  analysis["contraction_mode"] = c.contraction_mode;
  analysis["pliss_tau0"] = c.pliss_tau0;
  analysis["pliss_gamma"] = c.pliss_gamma;
  analysis["lyap_T"] = c.lyap_T;
  analysis["lyap_dt"] = c.lyap_dt;
  analysis["orbit_T"] = c.orbit_T;
  analysis["orbit_dt"] = c.orbit_dt;
  analysis["orbit_jacobian"] = c.orbit_jacobian;
  analysis["poincare_t"] = c.poincare_t;
  analysis["poincare_n"] = c.poincare_n;
  analysis["blowup_t"] = c.blowup_t;
  analysis["blowup_radii"] = c.blowup_radii;
  analysis["blowup_dir"] = c.blowup_dir;
  analysis["rng_seed"] = c.rng_seed;

  Json output{{"details", c.details}};

  return Json{{"field", field},
              {"integrator", integ},
              {"analysis", analysis},
              {"output", output}};
}

Json json_of(const SingularityInfo& s) {
  Json eigs = Json::array();
  Json vecs = Json::array();
  Json real = Json::array();
  for (int i = 0; i < 3; ++i) {
    eigs.push_back(Json{{"re", s.eigenvalues[i].real()}, {"im", s.eigenvalues[i].imag()}});
    vecs.push_back(vec_json(s.eigenvectors[i]));
    real.push_back(s.eig_real[i]);
  }
  return Json{{"location", vec_json(s.location)},
              {"eigenvalues", eigs},
              {"eigenvectors", vecs},
              {"eig_real", real},
              {"hyperbolic", s.hyperbolic},
              {"simple_real", s.simple_real},
              {"lorenz_like_forward", s.lorenz_like_forward},
              {"lorenz_like_backward", s.lorenz_like_backward}};
}

Json json_of(const PoincareCocycle& c) {
  return Json{{"t", c.t},
              {"from", Json{{"base", vec_json(c.from.base)}, {"speed", c.from.speed}}},
              {"to", Json{{"base", vec_json(c.to.base)}, {"speed", c.to.speed}}},
              {"mat", mat_json(c.mat)},
              {"rescaled", c.rescaled}};
}

Json json_of(const ConvergenceReport& r) {
  Json errors = Json::array();
  for (double e : r.errors) errors.push_back(e);
  return Json{{"radii", r.radii},         {"errors", errors},
              {"failures", r.failures},   {"slope", r.slope},
              {"extrapolated_error", r.extrapolated_error},
              {"monotone", r.monotone},   {"usable", r.usable}};
}

Json json_of(const SplittingEstimate& s, bool details) {
  std::map<std::string, int> reasons;
  for (const DirectionEstimate& d : s.dirs)
    if (!d.converged) ++reasons[d.reason];
  Json rj = Json::object();
  for (const auto& [k, v] : reasons) rj[k] = v;

  Json out{{"T", s.T},
           {"stride", s.stride},
           {"k_pow", s.k_pow},
           {"window", s.window},
           {"n_samples", static_cast<int>(s.dirs.size())},
           {"converged_fraction", s.converged_fraction},
           {"angle_min", s.angle_min},
           {"unconverged_reasons", rj}};
  if (details) {
    Json rows = Json::array();
    for (const DirectionEstimate& d : s.dirs)
      rows.push_back(Json{{"e_dir", vec_json(d.e_dir)},
                          {"f_dir", vec_json(d.f_dir)},
                          {"converged", d.converged},
                          {"angle", d.angle},
                          {"reason", d.reason}});
    out["samples"] = rows;
  }
  return out;
}

Json json_of(const GridCheckReport& r, bool details) {
  Json grid = Json::array();
  for (const GridCell& cell : r.grid) {
    Json cj{{"T", cell.T},
            {"stride", cell.stride},
            {"n_checked", cell.n_checked},
            {"n_passed", cell.n_passed},
            {"pass_fraction", cell.pass_fraction},
            {"worst", cell.worst},
            {"worst_index", cell.worst_index}};
    if (details) cj["values"] = cell.values;
    grid.push_back(std::move(cj));
  }
  Json out{{"criterion", criterion_name(r.criterion)},
           {"rescaled", r.rescaled},
           {"threshold", r.cfg.threshold},
           {"pass_fraction_min", r.cfg.pass_fraction_min},
           {"n_samples", r.n_samples},
           {"T_all", r.T_all},
           {"T_pass", r.T_pass},
           {"passed", r.passed},
           {"grid", grid}};
  if (r.criterion == Criterion::EContraction) out["mode"] = emode_name(r.emode);
  return out;
}

Json json_of(const LyapunovReport& r) {
  return Json{{"tangent", Json::array({r.tangent[0], r.tangent[1], r.tangent[2]})},
              {"normal", Json::array({r.normal[0], r.normal[1]})},
              {"div_mean", r.div_mean},
              {"tangent_sum", r.tangent_sum},
              {"T_total", r.T_total},
              {"renorm_dt", r.renorm_dt},
              {"n_renorm", r.n_renorm},
              {"n_normal_skipped", r.n_normal_skipped}};
}

Json json_of(const WssReport& r) {
  return Json{{"sigma", vec_json(r.sigma)},
              {"min_distance", r.min_distance},
              {"argmin", r.argmin},
              {"n_checked", r.n_checked},
              {"n_excluded", r.n_excluded},
              {"passed", r.passed},
              {"radius", r.cfg.radius},
              {"backflow", r.cfg.backflow},
              {"n_pts", r.cfg.n_pts},
              {"sep_threshold", r.cfg.sep_threshold}};
}

Json json_of(const MixedReport& r, bool details) {
  Json out{{"n_checked", r.n_checked},
           {"n_agree", r.n_agree},
           {"agreement", r.agreement},
           {"disagreements", r.disagreements}};
  if (details) {
    Json rows = Json::array();
    for (const MixedSample& m : r.details)
      rows.push_back(Json{{"checked", m.checked},
                          {"tangent_dom", m.tangent_dom},
                          {"psi_contract", m.psi_contract},
                          {"best_sv_ratio", m.best_sv_ratio},
                          {"best_flow_margin", m.best_flow_margin},
                          {"best_contraction", m.best_contraction}});
    out["samples"] = rows;
  }
  return out;
}

Json json_of(const FiberCrosscheck& f) {
  return Json{{"sigma", vec_json(f.sigma)},
              {"n_inside", f.n_inside},
              {"closest", f.closest},
              {"direction", vec_json(f.direction)},
              {"t", f.t},
              {"convergence", json_of(f.convergence)},
              {"error", f.error}};
}

Json json_of(const DirectionAttempt& a, bool details) {
  Json roots = Json::array();
  for (const Vec3& r : a.search.roots) roots.push_back(vec_json(r));
  Json sings = Json::array();
  for (const SingularityInfo& s : a.singularities) sings.push_back(json_of(s));
  Json wss = Json::array();
  for (const WssReport& w : a.wss) wss.push_back(json_of(w));
  Json fiber = Json::array();
  for (const FiberCrosscheck& f : a.fiber) fiber.push_back(json_of(f));

  return Json{{"backward", a.backward},
              {"roots", roots},
              {"skipped_seeds", a.search.skipped_seeds},
              {"singularities", sings},
              {"singularities_hyperbolic", a.singularities_hyperbolic},
              {"n_samples", a.n_samples},
              {"n_near_singular", a.n_near_singular},
              {"splitting", json_of(a.splitting, details)},
              {"domination", json_of(a.domination, details)},
              {"e_contraction_rescaled", json_of(a.e_rescaled, details)},
              {"e_contraction_tangent", json_of(a.e_tangent, details)},
              {"sectional_expansion", json_of(a.sectional, details)},
              {"mixed_domination", json_of(a.mixed, details)},
              {"strong_stable", wss},
              {"fiber_crosschecks", fiber},
              {"common_T", a.common_T},
              {"verdict", verdict_name(a.verdict)},
              {"reasons", a.reasons},
              {"completed", a.completed}};
}

Json json_of(const SingularHyperbolicityReport& r, bool details) {
  Json out{{"criterion", criterion_name(Criterion::SingularHyperbolic)},
           {"verdict", verdict_name(r.verdict)},
           {"common_T", r.common_T},
           {"used_backward", r.used_backward},
           {"forward", json_of(r.forward, details)}};
  if (r.backward) out["backward"] = json_of(*r.backward, details);
  return out;
}

}  // namespace secflow
