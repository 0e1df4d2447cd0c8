#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "secflow/config.hpp"
#include "secflow/report.hpp"

using namespace secflow;

namespace {

RunConfig parse(const std::string& text) { return parse_config_text(text, "inline"); }

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text, "inline");
  } catch (const FlowError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty text yields the documented defaults") {
  RunConfig c = parse("");
  CHECK(c.field_kind == "lorenz");
  CHECK(c.sigma == 10.0);
  CHECK(c.n == 1000);
  CHECK(c.spacing == 0.05);
  CHECK(c.contraction_mode == "psi_rescaled");
  CHECK(c.out_dir == "out");
  CHECK(c.jobs == 1);
  REQUIRE(c.T_grid.size() == 40);
  CHECK(c.T_grid.front() == doctest::Approx(0.25));
  CHECK(c.T_grid.back() == doctest::Approx(10.0));
}

TEST_CASE("a full file lands every key where it belongs") {
  RunConfig c = parse(
      "# run profile\n"
      "[field]\n"
      "kind = linear\n"
      "A = 1 2 3; 4 5 6; 7 8 10\n"
      "box = -1 1 -2 2 -3 3\n"
      "[integrator]\n"
      "rel_tol = 1e-9\n"
      "abs_tol = 1e-11\n"
      "max_step = 0.5\n"
      "max_steps = 100000\n"
      "escape_radius = 1e4\n"
      "[analysis]\n"
      "seed_point = 0.5 -0.5 2\n"
      "transient = 10\n"
      "n = 64\n"
      "spacing = 0.1\n"
      "T_grid = 1 2 3\n"
      "split_T = 0.5\n"
      "k_pow = 12\n"
      "dir_tol = 1e-6\n"
      "threshold = 0.45   # sharper than one half\n"
      "contraction_mode = tangent\n"
      "pliss_tau0 = 3\n"
      "pliss_gamma = 1.2\n"
      "blowup_dir = 0 0 1\n"
      "rng_seed = 777\n"
      "[output]\n"
      "out_dir = results\n"
      "details = true\n"
      "jobs = 4\n");
  CHECK(c.field_kind == "linear");
  CHECK(c.A(0, 1) == 2.0);
  CHECK(c.A(2, 2) == 10.0);
  CHECK(c.box.lo == Vec3(-1, -2, -3));
  CHECK(c.box.hi == Vec3(1, 2, 3));
  CHECK(c.integ.rel_tol == 1e-9);
  CHECK(c.integ.max_steps == 100000);
  CHECK(c.seed_point == Vec3(0.5, -0.5, 2));
  CHECK(c.n == 64);
  REQUIRE(c.T_grid.size() == 3);
  CHECK(c.T_grid[2] == 3.0);
  CHECK(c.power.k_pow == 12);
  CHECK(c.check.threshold == 0.45);
  CHECK(c.contraction_mode == "tangent");
  CHECK(c.make_emode() == EMode::Tangent);
  CHECK(c.pliss_tau0 == 3);
  CHECK(c.blowup_dir == "0 0 1");
  CHECK(c.blowup_dir_vec == Vec3(0, 0, 1));
  CHECK(c.rng_seed == 777);
  CHECK(c.out_dir == "results");
  CHECK(c.details);
  CHECK(c.jobs == 4);
}

TEST_CASE("unknown keys and sections point at the offending line") {
  std::string e = error_of("[analysis]\nbogus = 1\n");
  CHECK(e.find("inline:2") != std::string::npos);
  CHECK(e.find("bogus") != std::string::npos);

  e = error_of("[junk]\n");
  CHECK(e.find("inline:1") != std::string::npos);
  CHECK(e.find("junk") != std::string::npos);

  e = error_of("kind = lorenz\n");
  CHECK(e.find("outside any section") != std::string::npos);

  e = error_of("[field]\nkind lorenz\n");
  CHECK(e.find("inline:2") != std::string::npos);

  e = error_of("[field]\nkind =\n");
  CHECK(e.find("empty key or value") != std::string::npos);
}

TEST_CASE("grid values parse as lists or inclusive ranges") {
  RunConfig c = parse("[analysis]\nT_grid = 0.5:2:0.5\n");
  REQUIRE(c.T_grid.size() == 4);
  CHECK(c.T_grid[0] == doctest::Approx(0.5));
  CHECK(c.T_grid[3] == doctest::Approx(2.0));

  c = parse("[analysis]\nT_grid = 0.25:10:0.25\n");
  CHECK(c.T_grid.size() == 40);

  c = parse("[analysis]\nT_grid = 2 1 0.5\n");
  REQUIRE(c.T_grid.size() == 3);
  CHECK(c.T_grid[0] == 2.0);

  CHECK_THROWS_AS(parse("[analysis]\nT_grid = 0:1:0\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\nT_grid = 2:1:0.5\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\nT_grid = 1 two 3\n"), FlowError);
}

TEST_CASE("matrix, monomial and box values are shape-checked") {
  RunConfig c = parse(
      "[field]\n"
      "kind = polynomial\n"
      "poly_x = 1 2 0 0; -1 0 1 0\n"
      "poly_y = 2.5 0 0 1\n");
  REQUIRE(c.poly[0].size() == 2);
  CHECK(c.poly[0][0].c == 1.0);
  CHECK(c.poly[0][0].i == 2);
  CHECK(c.poly[0][1].c == -1.0);
  CHECK(c.poly[0][1].j == 1);
  REQUIRE(c.poly[1].size() == 1);
  CHECK(c.poly[1][0].k == 1);
  CHECK(c.poly[2].empty());

  CHECK_THROWS_AS(parse("[field]\nA = 1 2 3; 4 5 6\n"), FlowError);
  CHECK_THROWS_AS(parse("[field]\nA = 1 2; 3 4; 5 6\n"), FlowError);
  CHECK_THROWS_AS(parse("[field]\npoly_x = 1 2 0\n"), FlowError);
  CHECK_THROWS_AS(parse("[field]\npoly_x = 1 -2 0 0\n"), FlowError);
  CHECK_THROWS_AS(parse("[field]\npoly_x = 1 0.5 0 0\n"), FlowError);
  CHECK_THROWS_AS(parse("[field]\nbox = 1 -1 0 1 0 1\n"), FlowError);
  CHECK_THROWS_AS(parse("[field]\nbox = 0 1 0 1\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\nseed_point = 1 2\n"), FlowError);
}

TEST_CASE("validation refuses out-of-range settings") {
  CHECK_THROWS_AS(parse("[field]\nkind = mystery\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\ncontraction_mode = inverted\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\npliss_gamma = 1.0\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\npliss_tau0 = 0\n"), FlowError);
  CHECK_THROWS_AS(parse("[integrator]\nrel_tol = 0\n"), FlowError);
  CHECK_THROWS_AS(parse("[integrator]\nrel_tol = -1e-8\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\nn = 0\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\nspacing = -0.05\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\nT_grid = 0 1\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\npass_fraction_min = 0\n"), FlowError);
  CHECK_THROWS_AS(parse("[analysis]\npass_fraction_min = 1.5\n"), FlowError);
  CHECK_THROWS_AS(parse("[output]\njobs = 0\n"), FlowError);
  CHECK_THROWS_AS(parse_config("/nonexistent/nowhere.cfg"), FlowError);
}

TEST_CASE("json dump is sorted, indented and newline-terminated") {
  Json j{{"b", true}, {"a", 1}, {"s", "hi"}};
  CHECK(dump_json(j) == "{\n  \"a\": 1,\n  \"b\": true,\n  \"s\": \"hi\"\n}\n");

  Json nested{{"v", Json::array({1.5, 2.0})}, {"o", Json{{"x", false}}}};
  CHECK(dump_json(nested) ==
        "{\n  \"o\": {\n    \"x\": false\n  },\n  \"v\": [\n    1.5,\n    2\n  ]\n}\n");

  CHECK(dump_json(Json::array()) == "[]\n");
  CHECK(dump_json(Json::object()) == "{}\n");
}

TEST_CASE("floats round-trip through the printed form") {
  for (double x : {1.0 / 3.0, 0.1, 1e-300, -2.5e17, M_PI, 6.626e-34, -0.0}) {
    Json j = x;
    std::string s = dump_json(j);
    double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == x);
  }
}

TEST_CASE("non-finite numbers are emitted as null") {
  CHECK(dump_json(Json(std::numeric_limits<double>::quiet_NaN())) == "null\n");
  CHECK(dump_json(Json(std::numeric_limits<double>::infinity())) == "null\n");
  CHECK(format_num(-std::numeric_limits<double>::infinity()) == "null");
}

TEST_CASE("embedded config excludes runtime-only settings") {
  RunConfig c = parse("[output]\nout_dir = somewhere\njobs = 8\n");
  std::string s = dump_json(json_of(c));
  CHECK(s.find("out_dir") == std::string::npos);
  CHECK(s.find("somewhere") == std::string::npos);
  CHECK(s.find("jobs") == std::string::npos);
}

TEST_CASE("embedded config carries the resolved default grid") {
  Json j = json_of(parse(""));
  REQUIRE(j["analysis"]["T_grid"].size() == 40);
  CHECK(j["analysis"]["T_grid"][0].get<double>() == 0.25);
  CHECK(j["analysis"]["T_grid"][39].get<double>() == 10.0);
}

TEST_CASE("field section shows only the active kind's parameters") {
  Json lorenz = json_of(parse("[field]\nkind = lorenz\n"));
  CHECK(lorenz["field"].contains("sigma"));
  CHECK_FALSE(lorenz["field"].contains("A"));

  Json linear = json_of(parse("[field]\nkind = linear\nA = 1 0 0; 0 2 0; 0 0 3\n"));
  CHECK(linear["field"].contains("A"));
  CHECK_FALSE(linear["field"].contains("sigma"));

  Json poly = json_of(parse("[field]\nkind = polynomial\npoly_x = 1 1 0 0\n"));
  CHECK(poly["field"].contains("poly_x"));
  CHECK_FALSE(poly["field"].contains("sigma"));
}

TEST_CASE("two parses of the same text dump byte-identically") {
  std::string text =
      "[field]\nkind = lorenz\nsigma = 9.5\n[analysis]\nT_grid = 0.5:4:0.5\n";
  std::string a = dump_json(json_of(parse(text)));
  std::string b = dump_json(json_of(parse(text)));
  CHECK(a == b);
  CHECK(a.back() == '\n');
}
