#include "core/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "core/errors.hpp"

namespace hamshear {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr std::size_t kBudgetGridPoints = 1024;
constexpr double kAttributionCost = 2e5;  // integrations per stage
constexpr std::uint64_t kVerifySeed = 20240601;
constexpr std::size_t kVerifyPoints = 50;

// ---------------------------------------------------------------- presets

struct PresetInfo {
  const char* name;
  const char* description;
};

const PresetInfo kPresets[] = {
    {"pure_q", "cos(2 pi q)/(4 pi^2): a single vertical shear"},
    {"pure_p", "cos(2 pi p)/(2 pi): p-only, compiled through bracket terms"},
    {"cos_p", "cos(2 pi p)"},
    {"mixed", "cos(2 pi (q + p))/(4 pi^2)"},
    {"two_term", "cos(2 pi q)/(4 pi^2) + cos(2 pi p)/(2 pi)"},
    {"standard", "alias of two_term (standard-map amplitudes)"},
    {"bracket_pair", "cos(2 pi q) + cos(2 pi p), flown for time 1e-3"},
    {"interp", "(1 - t) cos(2 pi q)/(4 pi^2) + t cos(2 pi p)/(2 pi)"},
    {"pendulum", "periodized p^2/2 + cos q on the box [-pi, pi]^2, degree 4"},
};

constexpr double kQAmp = 1.0 / (4.0 * kPi * kPi);
constexpr double kPAmp = 1.0 / kTwoPi;

Problem make_preset(const std::string& name) {
  Problem p;
  p.dim = 1;
  p.preset = name;
  auto autonomous = [&](TrigPoly h, double eps) {
    p.h = TimePoly::autonomous(std::move(h));
    p.target_eps = eps;
  };
  if (name == "pure_q") {
    autonomous(TrigPoly::cos_q(1, 0, kQAmp), 1e-9);
  } else if (name == "pure_p") {
    autonomous(TrigPoly::cos_p(1, 0, kPAmp), 1e-2);
  } else if (name == "cos_p") {
    autonomous(TrigPoly::cos_p(1, 0, 1.0), 1e-2);
  } else if (name == "mixed") {
    autonomous(TrigPoly::term({1}, {1}, Complex(kQAmp, 0.0)), 1e-2);
  } else if (name == "two_term" || name == "standard") {
    autonomous(TrigPoly::cos_q(1, 0, kQAmp) + TrigPoly::cos_p(1, 0, kPAmp), 1e-3);
  } else if (name == "bracket_pair") {
    autonomous(TrigPoly::cos_q(1, 0, 1.0) + TrigPoly::cos_p(1, 0, 1.0), 1e-2);
    p.time = 1e-3;
  } else if (name == "interp") {
    TimePoly h;
    h.dim = 1;
    h.terms.emplace_back(0, TrigPoly::cos_q(1, 0, kQAmp));
    h.terms.emplace_back(1, TrigPoly::cos_p(1, 0, kPAmp) - TrigPoly::cos_q(1, 0, kQAmp));
    p.h = std::move(h);
    p.target_eps = 5e-2;
  } else if (name == "pendulum") {
    const Periodization per = periodize(
        [](std::span<const double> x) { return 0.5 * x[1] * x[1] + std::cos(x[0]); }, 1, kPi, 4);
    // Box coordinates x = s u on both blocks rescale the Hamiltonian by 1/s^2.
    autonomous((1.0 / (per.scale * per.scale)) * per.poly, 5e-2);
  } else {
    throw InvalidArgument("unknown preset \"" + name + "\"");
  }
  return p;
}

// ---------------------------------------------------------------- structure

struct Structure {
  bool sliced = false;
  bool has_sum = false;
  bool has_brackets = false;
};

Structure analyze(const Problem& p) {
  Structure s;
  s.sliced = !p.h.is_autonomous();
  std::map<ModeIndex, int> modes;
  for (const auto& [power, poly] : p.h.terms) {
    for (const auto& [mode, c] : poly.modes()) modes[mode] = 1;
  }
  std::size_t factors = 0;
  bool has_v0 = false;
  for (const auto& [mode, flag] : modes) {
    if (mode.has_zero_k()) {
      if (!mode.is_zero()) has_v0 = true;
    } else {
      factors += 4;
      s.has_brackets = true;
    }
  }
  if (has_v0) ++factors;
  s.has_sum = factors > 1;
  return s;
}

bool is_separable(const TimePoly& h) {
  return std::all_of(h.terms.begin(), h.terms.end(),
                     [](const auto& t) { return split_separable(t.second).mixed.empty(); });
}

// ---------------------------------------------------------------- error grids

PointSet budget_grid(const Problem& p, const RunOptions& opts, const PointSet& full) {
  if (full.size() <= kBudgetGridPoints) return full;
  const std::size_t axis = p.dim == 1 ? 16 : (p.dim == 2 ? 4 : 2);
  return make_grid(p.dim, axis, opts.seed);
}

PointSet attribution_grid(const Problem& p, const RunOptions& opts) {
  const std::size_t axis = p.dim == 1 ? 8 : (p.dim == 2 ? 3 : 2);
  return make_grid(p.dim, axis, opts.seed);
}

// ---------------------------------------------------------------- stage attribution

Json stage_value(double err, double multiplicity, const std::string& note = {}) {
  Json j{{"error", err}, {"multiplicity", multiplicity}};
  if (!note.empty()) j["note"] = note;
  return j;
}

Json stage_skipped(const std::string& reason) { return Json{{"skipped", true}, {"reason", reason}}; }

FlowSpec autonomous_spec(const TrigPoly& h, double t, double tol) {
  return FlowSpec{TimePoly::autonomous(h), 0.0, t, tol};
}

struct Attribution {
  Json stages = Json::object();
  std::optional<double> eps_N;
};

Attribution attribute(const Problem& p, const SchemeParams& sp, const RunOptions& opts) {
  Attribution out;
  const PointSet grid = attribution_grid(p, opts);
  const double npts = static_cast<double>(grid.size());
  const double T = p.time;
  const double ds = T / static_cast<double>(sp.N_slices);
  const double h = ds / static_cast<double>(sp.N_sum);
  double eps = 0.0;
  bool complete = true;

  // Slicing: exact frozen flows composed slice by slice.
  if (p.h.is_autonomous()) {
    out.stages["slicing"] = stage_value(0.0, 1.0, "autonomous Hamiltonian: slicing is exact");
  } else if (static_cast<double>(sp.N_slices) * npts > kAttributionCost) {
    out.stages["slicing"] = stage_skipped("attribution cost above limit");
    complete = false;
  } else {
    PointSet sliced = grid;
    for (std::size_t j = 0; j < sp.N_slices; ++j) {
      FlowIntegrator(autonomous_spec(p.h.at(static_cast<double>(j) * ds), ds, opts.tol)).flow(sliced);
    }
    PointSet exact = grid;
    FlowIntegrator(flow_spec(p, opts.tol)).flow(exact);
    const double e = max_torus_distance(sliced, exact);
    out.stages["slicing"] = stage_value(e, 1.0, "exact frozen flows vs exact flow, whole interval");
    eps += e;
  }

  const TrigPoly h0 = p.h.at(0.0);
  const Decomposition d = decompose(h0);
  const std::size_t factors = d.terms.size() + (d.v0.is_constant() ? 0 : 1);

  // Sum: Trotter over exact factor flows on the first slice.
  if (factors <= 1) {
    out.stages["sum"] = stage_value(0.0, 1.0, "single factor: splitting is exact");
  } else if (static_cast<double>(sp.N_sum * factors) * npts > kAttributionCost) {
    out.stages["sum"] = stage_skipped("attribution cost above limit");
    complete = false;
  } else {
    std::vector<FlowIntegrator> term_flows;
    for (const auto& t : d.terms) term_flows.emplace_back(autonomous_spec(term_value(t), h, opts.tol));
    const ShearWord v0_step = shear_flow(d.v0, h);
    PointSet split = grid;
    for (std::size_t n = 0; n < sp.N_sum; ++n) {
      for (auto it = term_flows.rbegin(); it != term_flows.rend(); ++it) it->flow(split);
      apply_word(v0_step, split);
    }
    PointSet exact = grid;
    FlowIntegrator(autonomous_spec(h0, ds, opts.tol)).flow(exact);
    const double e = max_torus_distance(split, exact);
    out.stages["sum"] = stage_value(e, static_cast<double>(sp.N_slices),
                                    "Trotter of exact factor flows vs exact frozen flow, one slice");
    eps += static_cast<double>(sp.N_slices) * e;
  }

  if (d.terms.empty()) {
    out.stages["outer_commutator"] = stage_value(0.0, 0.0, "no bracket terms");
    out.stages["inner_commutator"] = stage_value(0.0, 0.0, "no bracket terms");
  } else {
    const auto it = std::max_element(d.terms.begin(), d.terms.end(), [](const auto& a, const auto& b) {
      return std::abs(a.weight) < std::abs(b.weight);
    });
    const BracketTerm& term = *it;
    const double total = std::abs(term.weight * h);
    const double s = std::sqrt(total / static_cast<double>(sp.N_comm_outer));
    const TrigPoly u = poisson_bracket(term.v, term.tau);
    const double terms = static_cast<double>(d.terms.size());
    const double per_sum = static_cast<double>(sp.N_slices * sp.N_sum) * terms;

    // Outer: commutator of exact u flows with the exact w shear.
    if (static_cast<double>(2 * sp.N_comm_outer) * npts > kAttributionCost) {
      out.stages["outer_commutator"] = stage_skipped("attribution cost above limit");
      complete = false;
    } else {
      const FlowIntegrator u_flow(autonomous_spec(u, s, opts.tol));
      const ShearWord w_fwd = shear_flow(term.w, s);
      const ShearWord w_back = shear_flow(term.w, -s);
      PointSet comm = grid;
      for (std::size_t r = 0; r < sp.N_comm_outer; ++r) {
        u_flow.flow(comm);
        apply_word(w_fwd, comm);
        u_flow.flow(comm, true);
        apply_word(w_back, comm);
      }
      PointSet exact = grid;
      FlowIntegrator(autonomous_spec(poisson_bracket(term.w, u), total, opts.tol)).flow(exact);
      const double e = max_torus_distance(comm, exact);
      out.stages["outer_commutator"] = stage_value(
          e, per_sum, "largest-weight term, exact inner flows, one Trotter step");
      eps += per_sum * e;
    }

    // Inner: commutator word vs exact u flow at the outer shear time.
    {
      PointSet word_img = grid;
      apply_word(commutator_bracket_flow(term.v, term.tau, s, sp.N_comm_inner), word_img);
      PointSet exact = grid;
      FlowIntegrator(autonomous_spec(u, s, opts.tol)).flow(exact);
      const double e = max_torus_distance(word_img, exact);
      const double mult = 2.0 * static_cast<double>(sp.N_comm_outer) * per_sum;
      out.stages["inner_commutator"] =
          stage_value(e, mult, "largest-weight term, inner word vs exact flow at the outer shear time");
      eps += mult * e;
    }
  }
  if (complete) out.eps_N = eps;
  return out;
}

// ---------------------------------------------------------------- budget search

struct Step {
  SchemeParams params;
  std::size_t length = 0;
  double error = 0.0;
};

Json step_to_json(const Step& s) {
  Json j = params_to_json(s.params);
  j.erase("L_bound");
  j["word_length"] = s.length;
  j["error"] = s.error;
  return j;
}

enum class Axis { Slices, Sum, Outer, Inner };

SchemeParams doubled(SchemeParams p, Axis a) {
  switch (a) {
    case Axis::Slices: p.N_slices *= 2; break;
    case Axis::Sum: p.N_sum *= 2; break;
    case Axis::Outer: p.N_comm_outer *= 2; break;
    case Axis::Inner: p.N_comm_inner *= 2; break;
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------- problems

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

Problem preset_problem(const std::string& name) { return make_preset(name); }

Problem problem_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ParseError("problem file must be an object");
    if (j.contains("schema") && j.at("schema") != "hamshear/problem/1") {
      throw ParseError("unsupported problem schema " + j.at("schema").dump());
    }
    const Json empty = Json::object();
    const Json& ham = j.contains("hamiltonian") ? j.at("hamiltonian") : empty;
    if (!ham.is_object()) throw ParseError("\"hamiltonian\" must be an object");
    const int sources = static_cast<int>(ham.contains("autonomous")) +
                        static_cast<int>(ham.contains("time_poly")) +
                        static_cast<int>(ham.contains("preset")) + static_cast<int>(j.contains("preset"));
    if (sources != 1) {
      throw ParseError("problem needs exactly one of hamiltonian.autonomous, hamiltonian.time_poly, preset");
    }

    Problem p;
    if (ham.contains("preset") || j.contains("preset")) {
      p = make_preset((ham.contains("preset") ? ham : j).at("preset").get<std::string>());
      if (j.contains("dim") && j.at("dim").get<std::size_t>() != p.dim) {
        throw DimensionError("problem dim does not match preset dimension");
      }
    } else {
      p.dim = j.at("dim").get<std::size_t>();
      if (p.dim == 0) throw ParseError("problem dim must be >= 1");
      p.h.dim = p.dim;
      if (ham.contains("autonomous")) {
        p.h.terms.emplace_back(0, poly_from_json(ham.at("autonomous")));
      } else {
        for (const auto& t : ham.at("time_poly")) {
          const int power = t.at("power").get<int>();
          if (power < 0) throw ParseError("time_poly power must be >= 0");
          p.h.terms.emplace_back(power, poly_from_json(t.at("poly")));
        }
      }
      for (const auto& [power, poly] : p.h.terms) {
        if (poly.dim() != p.dim) throw DimensionError("Hamiltonian dimension does not match problem dim");
      }
      if (!j.contains("target_eps")) throw ParseError("problem needs target_eps");
    }
    if (j.contains("target_eps")) p.target_eps = j.at("target_eps").get<double>();
    if (!(p.target_eps > 0.0)) throw ParseError("target_eps must be positive");
    if (j.contains("time")) p.time = j.at("time").get<double>();
    if (!(p.time >= 0.0) || !std::isfinite(p.time)) throw ParseError("time must be finite and >= 0");
    if (j.contains("caps")) {
      const Json& caps = j.at("caps");
      if (caps.contains("max_word_length")) p.caps.max_word_length = caps.at("max_word_length").get<std::size_t>();
      if (caps.contains("max_wall_time")) p.caps.max_wall_time = caps.at("max_wall_time").get<double>();
      if (p.caps.max_word_length == 0) throw ParseError("caps.max_word_length must be >= 1");
      if (!(p.caps.max_wall_time > 0.0)) throw ParseError("caps.max_wall_time must be positive");
    }
    return p;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed problem: ") + e.what());
  }
}

Json problem_to_json(const Problem& p) {
  Json j{{"schema", "hamshear/problem/1"}, {"dim", p.dim}, {"target_eps", p.target_eps}, {"time", p.time}};
  if (!p.preset.empty()) {
    j["hamiltonian"] = Json{{"preset", p.preset}};
  } else if (p.h.is_autonomous()) {
    j["hamiltonian"] = Json{{"autonomous", poly_to_json(p.h.at(0.0))}};
  } else {
    Json terms = Json::array();
    for (const auto& [power, poly] : p.h.terms) terms.push_back(Json{{"power", power}, {"poly", poly_to_json(poly)}});
    j["hamiltonian"] = Json{{"time_poly", std::move(terms)}};
  }
  j["caps"] = Json{{"max_word_length", p.caps.max_word_length}, {"max_wall_time", p.caps.max_wall_time}};
  return j;
}

Problem with_options(Problem p, const RunOptions& opts) {
  if (opts.time) {
    if (!(*opts.time >= 0.0) || !std::isfinite(*opts.time)) throw InvalidArgument("time must be finite and >= 0");
    p.time = *opts.time;
  }
  if (opts.cap_length) {
    if (*opts.cap_length == 0) throw InvalidArgument("cap length must be >= 1");
    p.caps.max_word_length = *opts.cap_length;
  }
  if (!(opts.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  return p;
}

FlowSpec flow_spec(const Problem& p, double tol) { return FlowSpec{p.h, 0.0, p.time, tol}; }

PointSet error_grid(const Problem& p, const RunOptions& opts) { return make_grid(p.dim, opts.grid, opts.seed); }

Json grid_to_json(const Problem& p, const RunOptions& opts, const PointSet& grid) {
  const char* kind = opts.seed ? "random" : (p.dim == 1 ? "uniform" : "halton");
  Json j{{"kind", kind},
         {"points_per_axis", opts.grid == 0 ? default_flow_grid(p.dim) : opts.grid},
         {"points", grid.size()}};
  j["seed"] = opts.seed ? Json(*opts.seed) : Json(nullptr);
  return j;
}

// ---------------------------------------------------------------- compilation

ShearWord build_word(const Problem& p, const SchemeParams& sp) {
  const std::size_t n = p.dim;
  AutonomousCompiler frozen = [&](const TrigPoly& h, double dt) {
    const Decomposition d = decompose(h);
    std::vector<FlowFactory> flows;
    flows.push_back(shear_flow_factory(d.v0));
    for (const auto& term : d.terms) {
      flows.push_back([term, &sp](double s) {
        return double_bracket_flow(term, s, sp.N_comm_outer, sp.N_comm_inner);
      });
    }
    return trotter_sum_flow(flows, dt, sp.N_sum, n);
  };
  const std::size_t slices = p.h.is_autonomous() ? 1 : sp.N_slices;
  return time_sliced_flow(p.h, frozen, slices, 0.0, p.time);
}

CompileResult compile(const Problem& problem, const RunOptions& opts) {
  const auto start = Clock::now();
  const Problem p = with_options(problem, opts);
  const Structure st = analyze(p);
  const FlowSpec spec = flow_spec(p, opts.tol);
  const PointSet full = error_grid(p, opts);
  const ReferenceImages full_ref(spec, full);
  const PointSet coarse = budget_grid(p, opts, full);
  const bool same_grid = coarse.size() == full.size();
  const std::optional<ReferenceImages> coarse_ref =
      same_grid ? std::nullopt : std::optional<ReferenceImages>(ReferenceImages(spec, coarse));

  std::vector<Axis> axes;
  if (st.sliced) axes.push_back(Axis::Slices);
  if (st.has_sum) axes.push_back(Axis::Sum);
  if (st.has_brackets) {
    axes.push_back(Axis::Outer);
    axes.push_back(Axis::Inner);
  }

  const std::size_t cap = p.caps.max_word_length;
  bool cap_hit = false;
  std::string cap_reason;
  std::vector<Step> ladder_steps;

  // Greedy doubling: each round tries every relevant axis and keeps the best.
  SchemeParams params;
  ShearWord word = build_word(p, params);
  if (word.size() > cap) {
    cap_hit = true;
    cap_reason = "smallest parameters already exceed the word-length cap";
  }
  const ReferenceImages* ref = same_grid ? &full_ref : &*coarse_ref;
  double err = ref->error(word);
  ladder_steps.push_back({params, word.size(), err});
  double final_err = std::numeric_limits<double>::quiet_NaN();

  while (!cap_hit) {
    if (err <= p.target_eps) {
      final_err = full_ref.error(word);
      if (final_err <= p.target_eps || ref == &full_ref) break;
      // Coarse grid passed but the declared grid did not: continue on the full grid.
      ref = &full_ref;
      err = final_err;
      ladder_steps.push_back({params, word.size(), err});
      continue;
    }
    if (axes.empty()) break;
    std::optional<Step> best;
    ShearWord best_word;
    for (Axis a : axes) {
      if (ms_since(start) > 1000.0 * p.caps.max_wall_time) break;
      const SchemeParams cand = doubled(params, a);
      ShearWord w = build_word(p, cand);
      if (w.size() > cap) continue;
      const double e = ref->error(w);
      if (!best || e < best->error || (e == best->error && w.size() < best->length)) {
        best = Step{cand, w.size(), e};
        best_word = std::move(w);
      }
    }
    if (ms_since(start) > 1000.0 * p.caps.max_wall_time) {
      cap_hit = true;
      cap_reason = "wall-time cap";
    }
    if (!best) {
      cap_hit = true;
      if (cap_reason.empty()) cap_reason = "word-length cap";
      break;
    }
    params = best->params;
    word = std::move(best_word);
    err = best->error;
    ladder_steps.push_back(*best);
    final_err = std::numeric_limits<double>::quiet_NaN();
  }
  if (std::isnan(final_err)) final_err = ref == &full_ref ? err : full_ref.error(word);

  const double L = lipschitz_estimate(p.h, coarse, 0.0, p.time);
  params.L_bound = L;
  const Attribution attr = attribute(p, params, opts);

  CompileResult r;
  r.target_met = final_err <= p.target_eps;
  r.cap_hit = cap_hit && !r.target_met;

  std::vector<std::pair<double, double>> by_length;
  for (const auto& s : ladder_steps) by_length.emplace_back(static_cast<double>(s.length), s.error);
  const ConvergenceFit fit = fit_convergence(by_length);

  Json ladder_json = Json::array();
  for (const auto& s : ladder_steps) ladder_json.push_back(step_to_json(s));

  Json pj = params_to_json(params);
  pj["word_length"] = word.size();
  pj["eps_target"] = p.target_eps;
  pj["measured_error"] = final_err;
  pj["fitted_slopes"] = Json{{"error_vs_word_length", fit_to_json(fit)}};

  Json budget_json{{"L_bound", L}};
  if (attr.eps_N) {
    const ErrorBudget b = [&] {
      ErrorBudget eb = ErrorBudget::from(*attr.eps_N, L);
      eb.measured_total = final_err;
      return eb;
    }();
    budget_json["eps_N"] = b.eps_N;
    budget_json["predicted_total"] = b.predicted_total;
    budget_json["measured_total"] = b.measured_total;
  } else {
    budget_json["eps_N"] = nullptr;
    budget_json["predicted_total"] = nullptr;
    budget_json["measured_total"] = final_err;
    budget_json["note"] = "eps_N needs every stage attribution";
  }

  r.report = Json{{"schema", "hamshear/report/1"},
                  {"command", "compile"},
                  {"problem", problem_to_json(p)},
                  {"word_path", nullptr},
                  {"word_length", word.size()},
                  {"length_before_merge", word.unmerged_length()},
                  {"measured_error", final_err},
                  {"target_eps", p.target_eps},
                  {"target_met", r.target_met},
                  {"cap_hit", r.cap_hit},
                  {"cap_reason", r.cap_hit ? Json(cap_reason) : Json(nullptr)},
                  {"params", pj},
                  {"error_budget", budget_json},
                  {"stage_errors", attr.stages},
                  {"budget_ladder", ladder_json},
                  {"grid", grid_to_json(p, opts, full)},
                  {"budget_grid_points", coarse.size()},
                  {"tol", opts.tol}};
  r.word = std::move(word);
  r.report["wall_time_ms"] = ms_since(start);
  return r;
}

VerifyResult verify(const ShearWord& word, const Problem& problem, const RunOptions& opts) {
  const auto start = Clock::now();
  const Problem p = with_options(problem, opts);
  if (word.dim() != p.dim) throw DimensionError("word dimension does not match problem dimension");
  const PointSet grid = error_grid(p, opts);
  const double err = ReferenceImages(flow_spec(p, opts.tol), grid).error(word);

  const PointSet pts = random_points(p.dim, kVerifyPoints, opts.seed.value_or(kVerifySeed));
  const ShearWord inv = invert_word(word);
  double residual = 0.0, residual_rel = 0.0, det_dev = 0.0, roundtrip = 0.0, jac_max = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const PhasePoint x = pts.at(i);
    const Eigen::MatrixXd J = word_jacobian(word, x);
    residual = std::max(residual, symplectic_residual(J));
    residual_rel = std::max(residual_rel, symplectic_residual_relative(J));
    jac_max = std::max(jac_max, J.cwiseAbs().maxCoeff());
    det_dev = std::max(det_dev, std::abs(J.determinant() - 1.0));
    roundtrip = std::max(roundtrip, torus_distance(apply_word(inv, apply_word(word, x)), x.wrapped()));
  }

  VerifyResult r;
  r.target_met = err <= p.target_eps;
  r.report = Json{{"schema", "hamshear/report/1"},
                  {"command", "verify"},
                  {"problem", problem_to_json(p)},
                  {"word_length", word.size()},
                  {"measured_error", err},
                  {"target_eps", p.target_eps},
                  {"target_met", r.target_met},
                  {"symplectic_residual", residual},
                  {"symplectic_residual_relative", residual_rel},
                  {"jacobian_max_entry", jac_max},
                  {"det_deviation", det_dev},
                  {"inverse_roundtrip_error", roundtrip},
                  {"check_points", pts.size()},
                  {"grid", grid_to_json(p, opts, grid)},
                  {"tol", opts.tol}};
  r.report["wall_time_ms"] = ms_since(start);
  return r;
}

// ---------------------------------------------------------------- ladders

LadderScheme parse_ladder_scheme(const std::string& name) {
  if (name == "trotter") return LadderScheme::Trotter;
  if (name == "commutator") return LadderScheme::Commutator;
  if (name == "slicing") return LadderScheme::Slicing;
  if (name == "end_to_end") return LadderScheme::EndToEnd;
  throw InvalidArgument("unknown ladder scheme \"" + name + "\" (trotter, commutator, slicing, end_to_end)");
}

ShearWord ladder_word(const Problem& p, LadderScheme scheme, std::size_t steps, std::size_t inner_steps) {
  if (steps == 0 || inner_steps == 0) throw InvalidArgument("ladder step counts must be >= 1");
  switch (scheme) {
    case LadderScheme::Trotter: {
      if (!p.h.is_autonomous()) throw InvalidArgument("trotter ladder needs an autonomous Hamiltonian");
      const TrigPoly h = p.h.at(0.0);
      if (split_separable(h).mixed.empty()) return separable_flow(h, p.time, steps);
      SchemeParams sp;
      sp.N_sum = steps;
      sp.N_comm_outer = sp.N_comm_inner = inner_steps;
      return build_word(p, sp);
    }
    case LadderScheme::Commutator: {
      if (!p.h.is_autonomous()) throw InvalidArgument("commutator ladder needs an autonomous Hamiltonian");
      const SeparableParts parts = split_separable(p.h.at(0.0));
      if (!parts.mixed.empty()) {
        throw InvalidArgument("commutator ladder needs H = v(q) + tau(p) without mixed modes");
      }
      return commutator_bracket_flow(parts.q_part, parts.p_part, p.time, steps);
    }
    case LadderScheme::Slicing: {
      AutonomousCompiler inner;
      if (is_separable(p.h)) {
        inner = [inner_steps](const TrigPoly& h, double dt) { return separable_flow(h, dt, inner_steps); };
      } else {
        inner = [&p, inner_steps](const TrigPoly& h, double dt) {
          SchemeParams sp;
          sp.N_sum = sp.N_comm_outer = sp.N_comm_inner = inner_steps;
          Problem frozen = p;
          frozen.h = TimePoly::autonomous(h);
          frozen.time = dt;
          return build_word(frozen, sp);
        };
      }
      return time_sliced_flow(p.h, inner, steps, 0.0, p.time);
    }
    case LadderScheme::EndToEnd: {
      SchemeParams sp;
      sp.N_sum = sp.N_comm_outer = sp.N_comm_inner = sp.N_slices = steps;
      return build_word(p, sp);
    }
  }
  throw InvalidArgument("unknown ladder scheme");
}

FlowSpec ladder_reference(const Problem& p, LadderScheme scheme, double tol) {
  if (scheme == LadderScheme::Commutator) {
    const SeparableParts parts = split_separable(p.h.at(0.0));
    return autonomous_spec(poisson_bracket(parts.q_part, parts.p_part), p.time, tol);
  }
  return flow_spec(p, tol);
}

std::string LadderResult::csv() const {
  std::ostringstream out;
  out << "steps,error,word_length,wall_time_ms\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%zu,%.3f\n", r.steps, r.error, r.word_length, r.wall_time_ms);
    out << buf;
  }
  out << "#fit " << fit_to_json(fit).dump() << "\n";
  return out.str();
}

LadderResult ladder(const Problem& problem, LadderScheme scheme, const std::vector<std::size_t>& steps,
                    const RunOptions& opts) {
  const Problem p = with_options(problem, opts);
  if (steps.empty()) throw InvalidArgument("ladder needs at least one step count");
  const ReferenceImages ref(ladder_reference(p, scheme, opts.tol), error_grid(p, opts));
  LadderResult out;
  std::vector<std::pair<double, double>> points;
  for (std::size_t n : steps) {
    const auto start = Clock::now();
    const ShearWord w = ladder_word(p, scheme, n, opts.inner_steps);
    LadderRow row{n, ref.error(w), w.size(), 0.0};
    row.wall_time_ms = ms_since(start);
    out.rows.push_back(row);
    points.emplace_back(static_cast<double>(n), row.error);
  }
  out.fit = fit_convergence(points);
  return out;
}

Json decompose_problem(const Problem& p) {
  if (p.h.is_autonomous()) return decomposition_to_json(decompose(p.h.at(0.0)));
  Json terms = Json::array();
  for (const auto& [power, poly] : p.h.terms) {
    terms.push_back(Json{{"power", power}, {"decomposition", decomposition_to_json(decompose(poly))}});
  }
  return Json{{"schema", "hamshear/decomposition-time/1"}, {"dim", p.dim}, {"time_poly", std::move(terms)}};
}

}  // namespace hamshear
