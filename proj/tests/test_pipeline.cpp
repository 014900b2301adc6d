#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "oracles.hpp"

using namespace hamshear;

namespace {

RunOptions small_grid(std::size_t g = 16) {
  RunOptions o;
  o.grid = g;
  return o;
}

Json without_wall_time(Json j) {
  j.erase("wall_time_ms");
  return j;
}

}  // namespace

TEST_CASE("problem files") {
  SUBCASE("preset gallery") {
    const auto names = preset_names();
    for (const char* want : {"pure_q", "pure_p", "cos_p", "mixed", "interp", "pendulum", "two_term", "bracket_pair"}) {
      CHECK(std::find(names.begin(), names.end(), want) != names.end());
    }
    for (const auto& n : names) CHECK(preset_problem(n).preset == n);
    CHECK_THROWS_AS(preset_problem("nope"), InvalidArgument);
  }
  SUBCASE("autonomous") {
    const Json j = Json::parse(R"({
      "schema": "hamshear/problem/1", "dim": 1,
      "hamiltonian": {"autonomous": {"dim": 1, "modes": [{"m": [0], "k": [1], "re": 1.0, "im": 0.0}]}},
      "target_eps": 0.01, "caps": {"max_word_length": 500, "max_wall_time": 5}})");
    const Problem p = problem_from_json(j);
    CHECK(p.dim == 1);
    CHECK(p.h.is_autonomous());
    CHECK(p.h.at(0.0) == TrigPoly::cos_p(1, 0, 1.0));
    CHECK(p.target_eps == 0.01);
    CHECK(p.caps.max_word_length == 500);
    CHECK(p.caps.max_wall_time == 5.0);
    const Problem back = problem_from_json(problem_to_json(p));
    CHECK(back.h.at(0.0) == p.h.at(0.0));
    CHECK(back.caps.max_word_length == 500);
  }
  SUBCASE("time polynomial") {
    const Json j = Json::parse(R"({
      "dim": 1, "target_eps": 0.05,
      "hamiltonian": {"time_poly": [
        {"power": 0, "poly": {"dim": 1, "modes": [{"m": [1], "k": [0], "re": 1.0, "im": 0.0}]}},
        {"power": 1, "poly": {"dim": 1, "modes": [{"m": [0], "k": [1], "re": 2.0, "im": 0.0}]}}]}})");
    const Problem p = problem_from_json(j);
    CHECK_FALSE(p.h.is_autonomous());
    CHECK(p.h.at(0.5) == TrigPoly::cos_q(1, 0, 1.0) + TrigPoly::cos_p(1, 0, 1.0));
    CHECK(problem_from_json(problem_to_json(p)).h.at(0.5) == p.h.at(0.5));
  }
  SUBCASE("preset reference with overrides") {
    const Problem p = problem_from_json(Json::parse(R"({"preset": "cos_p", "target_eps": 0.2, "time": 0.5})"));
    CHECK(p.preset == "cos_p");
    CHECK(p.target_eps == 0.2);
    CHECK(p.time == 0.5);
    CHECK(problem_from_json(Json::parse(R"({"hamiltonian": {"preset": "interp"}})")).preset == "interp");
  }
  SUBCASE("invalid files") {
    CHECK_THROWS_AS(problem_from_json(Json::parse(R"({"dim": 1, "target_eps": 0.1})")), ParseError);
    CHECK_THROWS_AS(problem_from_json(Json::parse(
                        R"({"preset": "cos_p", "hamiltonian": {"autonomous": {"dim": 1, "modes": []}}})")),
                    ParseError);
    CHECK_THROWS_AS(problem_from_json(Json::parse(
                        R"({"dim": 1, "hamiltonian": {"autonomous": {"dim": 1, "modes": []}}})")),
                    ParseError);
    CHECK_THROWS_AS(problem_from_json(Json::parse(
                        R"({"dim": 1, "target_eps": -1, "hamiltonian": {"autonomous": {"dim": 1, "modes": []}}})")),
                    ParseError);
    CHECK_THROWS_AS(problem_from_json(Json::parse(
                        R"({"dim": 2, "target_eps": 1, "hamiltonian": {"autonomous": {"dim": 1, "modes": []}}})")),
                    DimensionError);
    CHECK_THROWS_AS(problem_from_json(Json::parse(R"({"preset": "nope"})")), InvalidArgument);
    CHECK_THROWS_AS(problem_from_json(Json::parse("[1, 2]")), ParseError);
  }
}

TEST_CASE("compile") {
  SUBCASE("pure-q Hamiltonian is a single exact shear") {
    const CompileResult r = compile(preset_problem("pure_q"), small_grid());
    CHECK(r.word.size() == 1);
    CHECK(r.target_met);
    CHECK(r.report.at("measured_error").get<double>() < 1e-9);
    CHECK(r.report.at("schema") == "hamshear/report/1");
    CHECK(r.report.at("word_length") == 1);
    for (const char* key : {"params", "error_budget", "stage_errors", "budget_ladder", "grid", "wall_time_ms"}) {
      CHECK(r.report.contains(key));
    }
    for (const char* key : {"slicing", "sum", "outer_commutator", "inner_commutator"}) {
      CHECK(r.report.at("stage_errors").contains(key));
    }
  }
  SUBCASE("mixed mode at a short time meets its target") {
    Problem p = preset_problem("mixed");
    p.time = 0.1;
    p.caps.max_word_length = 200000;
    const CompileResult r = compile(p, small_grid(8));
    CHECK(r.target_met);
    CHECK(r.report.at("measured_error").get<double>() <= p.target_eps);
  }
  SUBCASE("budget ladder errors never increase") {
    Problem p = preset_problem("cos_p");
    p.time = 0.01;
    p.target_eps = 1e-4;
    p.caps.max_word_length = 100000;
    const CompileResult r = compile(p, small_grid(8));
    const Json& ladder = r.report.at("budget_ladder");
    REQUIRE(ladder.size() >= 2);
    for (std::size_t i = 1; i < ladder.size(); ++i) {
      CHECK(ladder[i].at("error").get<double>() <= ladder[i - 1].at("error").get<double>() * (1 + 1e-12));
    }
  }
  SUBCASE("cap is flagged and a word is still emitted") {
    Problem p = preset_problem("cos_p");
    p.target_eps = 1e-6;
    p.caps.max_word_length = 2000;
    const CompileResult r = compile(p, small_grid(8));
    CHECK_FALSE(r.target_met);
    CHECK(r.cap_hit);
    CHECK(r.report.at("cap_reason").is_string());
    CHECK(r.word.size() <= 2000);
  }
  SUBCASE("deterministic apart from wall time") {
    Problem p = preset_problem("two_term");
    p.caps.max_word_length = 5000;
    const CompileResult a = compile(p, small_grid(8));
    const CompileResult b = compile(p, small_grid(8));
    CHECK(word_to_json(a.word).dump() == word_to_json(b.word).dump());
    CHECK(without_wall_time(a.report).dump() == without_wall_time(b.report).dump());
  }
  SUBCASE("time-dependent interpolation") {
    Problem p = preset_problem("interp");
    p.caps.max_word_length = 20000;
    const CompileResult r = compile(p, small_grid(8));
    CHECK(r.word.size() <= 20000);
    CHECK(r.report.at("params").at("N_slices").get<std::size_t>() >= 1);
    CHECK(r.report.at("stage_errors").at("slicing").contains("error"));
  }
}

TEST_CASE("verify") {
  SUBCASE("agrees with compile") {
    Problem p = preset_problem("two_term");
    p.caps.max_word_length = 5000;
    const CompileResult c = compile(p, small_grid());
    const VerifyResult v = verify(word_from_json(word_to_json(c.word)), p, small_grid());
    CHECK(std::abs(v.report.at("measured_error").get<double>() - c.report.at("measured_error").get<double>()) <
          1e-12);
    CHECK(v.report.at("symplectic_residual_relative").get<double>() < 1e-10);
  }
  SUBCASE("empty word against H = 0") {
    Problem p;
    p.dim = 1;
    p.h = TimePoly::autonomous(TrigPoly(1));
    const VerifyResult v = verify(ShearWord(1), p, small_grid());
    CHECK(v.report.at("measured_error").get<double>() == 0.0);
    CHECK(v.target_met);
  }
  SUBCASE("one flipped generator sign is detected") {
    Problem p = preset_problem("cos_p");
    p.time = 1e-3;
    SchemeParams sp;
    sp.N_sum = 4;
    sp.N_comm_outer = 4;
    sp.N_comm_inner = 4;
    const ShearWord w = build_word(p, sp);
    Json j = word_to_json(w);
    Json& g = j.at("shears")[j.at("shears").size() / 2].at("generator");
    for (auto& m : g.at("modes")) {
      m["re"] = -m.at("re").get<double>();
      m["im"] = -m.at("im").get<double>();
    }
    const double clean = verify(w, p, small_grid()).report.at("measured_error").get<double>();
    const double bad = verify(word_from_json(j), p, small_grid()).report.at("measured_error").get<double>();
    CHECK(bad >= 10 * clean);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(verify(ShearWord(2), preset_problem("pure_q"), small_grid()), DimensionError);
  }
}

TEST_CASE("ladders") {
  SUBCASE("trotter on the two-term preset") {
    const LadderResult r =
        ladder(preset_problem("two_term"), LadderScheme::Trotter, {8, 16, 32, 64}, small_grid());
    CHECK(r.rows.size() == 4);
    CHECK_FALSE(r.fit.skipped);
    CHECK(r.fit.slope <= -0.85);
    const std::string csv = r.csv();
    CHECK(csv.rfind("steps,error,word_length,wall_time_ms\n", 0) == 0);
    CHECK(csv.find("\n#fit {") != std::string::npos);
  }
  SUBCASE("commutator") {
    const LadderResult r =
        ladder(preset_problem("bracket_pair"), LadderScheme::Commutator, {16, 64, 256, 1024}, small_grid());
    CHECK(r.fit.slope <= -0.45);
  }
  SUBCASE("exact flows sit at the measurement floor") {
    const LadderResult r = ladder(preset_problem("pure_q"), LadderScheme::Trotter, {1, 2, 4, 8}, small_grid());
    CHECK(r.fit.skipped);
    CHECK_FALSE(r.fit.note.empty());
    for (const auto& row : r.rows) CHECK(row.error <= kMeasurementFloor);
  }
  SUBCASE("scheme names") {
    CHECK(parse_ladder_scheme("end_to_end") == LadderScheme::EndToEnd);
    CHECK(parse_ladder_scheme("slicing") == LadderScheme::Slicing);
    CHECK_THROWS_AS(parse_ladder_scheme("strang"), InvalidArgument);
    CHECK_THROWS_AS(ladder_word(preset_problem("interp"), LadderScheme::Commutator, 4, 4), InvalidArgument);
  }
}

TEST_CASE("decompose_problem") {
  const Json a = decompose_problem(preset_problem("cos_p"));
  CHECK(a.at("schema") == "hamshear/decomposition/1");
  CHECK(a.at("terms").size() == 4);
  const Json t = decompose_problem(preset_problem("interp"));
  CHECK(t.at("time_poly").size() == 2);
}

TEST_CASE("gallery words are symplectic") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    Problem p = preset_problem(name);
    p.caps.max_word_length = 3000;
    p.caps.max_wall_time = 60;
    const CompileResult r = compile(p, small_grid(6));
    CHECK(r.word.size() <= 3000);
    const VerifyResult v = verify(r.word, p, small_grid(6));
    CHECK(v.report.at("symplectic_residual_relative").get<double>() < 1e-8);
    if (v.report.at("jacobian_max_entry").get<double>() < 1e3) {
      CHECK(v.report.at("symplectic_residual").get<double>() < 1e-8);
      CHECK(v.report.at("det_deviation").get<double>() < 1e-8);
    }
  }
}
