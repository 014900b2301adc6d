#pragma once

// End-to-end compilation: problem files, presets, budget search, reports,
// verification and convergence ladders.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/decompose.hpp"
#include "core/fourier.hpp"
#include "core/reference.hpp"
#include "core/schemes.hpp"
#include "core/shear.hpp"

namespace hamshear {

struct Caps {
  std::size_t max_word_length = 1'000'000;
  double max_wall_time = 600.0;  // seconds
};

struct Problem {
  std::size_t dim = 1;
  TimePoly h;
  double target_eps = 1e-2;
  double time = 1.0;  // flow from 0 to time
  Caps caps;
  std::string preset;  // empty unless built from a preset
};

std::vector<std::string> preset_names();
Problem preset_problem(const std::string& name);

// {"schema": "hamshear/problem/1", "dim", "hamiltonian": {"autonomous": poly} |
//  {"time_poly": [{"power": d, "poly": poly}]} | {"preset": name}, "target_eps",
//  "caps": {"max_word_length", "max_wall_time"}, "time"}
Problem problem_from_json(const Json& j);
Json problem_to_json(const Problem& p);

struct RunOptions {
  std::size_t grid = 0;  // points per axis, 0 = default
  double tol = 1e-11;
  std::optional<std::size_t> cap_length;
  std::optional<std::uint64_t> seed;
  std::optional<double> time;
  std::size_t inner_steps = 64;
};

// Applies option overrides (time, cap) to a problem.
Problem with_options(Problem p, const RunOptions& opts);

FlowSpec flow_spec(const Problem& p, double tol);
PointSet error_grid(const Problem& p, const RunOptions& opts);
Json grid_to_json(const Problem& p, const RunOptions& opts, const PointSet& grid);

// Full pipeline at fixed parameters: slicing, decomposition, Trotter over
// {v0 shear} and double-bracket words.
ShearWord build_word(const Problem& p, const SchemeParams& params);

struct CompileResult {
  ShearWord word;
  Json report;
  bool target_met = false;
  bool cap_hit = false;
};

CompileResult compile(const Problem& p, const RunOptions& opts = {});

struct VerifyResult {
  Json report;
  bool target_met = false;
};

VerifyResult verify(const ShearWord& word, const Problem& p, const RunOptions& opts = {});

enum class LadderScheme { Trotter, Commutator, Slicing, EndToEnd };
LadderScheme parse_ladder_scheme(const std::string& name);

struct LadderRow {
  std::size_t steps = 0;
  double error = 0.0;
  std::size_t word_length = 0;
  double wall_time_ms = 0.0;
};

struct LadderResult {
  std::vector<LadderRow> rows;
  ConvergenceFit fit;
  std::string csv() const;
};

// Word of the isolated scheme at one step count.
ShearWord ladder_word(const Problem& p, LadderScheme scheme, std::size_t steps, std::size_t inner_steps);
// Flow that ladder_word approximates.
FlowSpec ladder_reference(const Problem& p, LadderScheme scheme, double tol);

LadderResult ladder(const Problem& p, LadderScheme scheme, const std::vector<std::size_t>& steps,
                    const RunOptions& opts = {});

// Decomposition of every time coefficient of H.
Json decompose_problem(const Problem& p);

}  // namespace hamshear
