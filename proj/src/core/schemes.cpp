#include "core/schemes.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace hamshear {

namespace {

void require_steps(std::size_t steps, const char* what) {
  if (steps == 0) throw InvalidArgument(std::string(what) + ": step count must be >= 1");
}

// Smallest N >= 1 with bound(N) <= eps.
template <class Bound>
std::size_t smallest_steps(double guess, double eps, Bound bound) {
  if (!std::isfinite(guess) || guess > 1e15) {
    throw InvalidArgument("budget: required step count is not representable");
  }
  auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(guess)));
  while (n > 1 && bound(static_cast<double>(n - 1)) <= eps) --n;
  while (bound(static_cast<double>(n)) > eps) ++n;
  return n;
}

}  // namespace

ShearWord shear_flow(const TrigPoly& g, double t) {
  ShearWord w(g.dim());
  if (t == 0.0 || g.is_constant()) return w;
  if (g.depends_only_on_q()) {
    w.push_back(Shear::vertical(g, t));
  } else if (g.depends_only_on_p()) {
    w.push_back(Shear::horizontal(g, t));
  } else {
    throw InvalidArgument("shear_flow: generator mixes q and p modes");
  }
  return w;
}

FlowFactory shear_flow_factory(TrigPoly g) {
  const std::size_t n = g.dim();
  if (g.is_constant()) return [n](double) { return ShearWord(n); };
  if (!g.depends_only_on_q() && !g.depends_only_on_p()) {
    throw InvalidArgument("shear_flow: generator mixes q and p modes");
  }
  const ShearKind kind = g.depends_only_on_q() ? ShearKind::Vertical : ShearKind::Horizontal;
  auto gen = std::make_shared<const Generator>(kind, std::move(g));
  return [gen, kind, n](double t) {
    ShearWord w(n);
    if (t != 0.0) w.push_back(Shear{kind, gen, t});
    return w;
  };
}

ShearWord trotter_sum_flow(const std::vector<FlowFactory>& flows, double t, std::size_t steps,
                           std::size_t dim) {
  require_steps(steps, "trotter_sum_flow");
  ShearWord step(dim);
  if (t == 0.0) return step;
  const double h = t / static_cast<double>(steps);
  for (auto it = flows.rbegin(); it != flows.rend(); ++it) step.append((*it)(h));
  return ShearWord::repeat(step, steps);
}

ShearWord commutator_bracket_flow(const TrigPoly& v, const TrigPoly& tau, double t, std::size_t steps) {
  require_steps(steps, "commutator_bracket_flow");
  if (v.dim() != tau.dim()) throw DimensionError("commutator_bracket_flow: dimension mismatch");
  if (!v.depends_only_on_q()) throw InvalidArgument("commutator_bracket_flow: v must depend on q only");
  if (!tau.depends_only_on_p()) {
    throw InvalidArgument("commutator_bracket_flow: tau must depend on p only");
  }
  if (t < 0.0) return invert_word(commutator_bracket_flow(v, tau, -t, steps));
  ShearWord unit(v.dim());
  if (t == 0.0 || v.is_constant() || tau.is_constant()) return unit;

  const double s = std::sqrt(t / static_cast<double>(steps));
  const Shear sv = Shear::vertical(v, s);
  const Shear st = Shear::horizontal(tau, s);
  if (kCommutatorSecondArgumentFirst) {
    unit.push_back(st);
    unit.push_back(sv);
    unit.push_back(st.inverse());
    unit.push_back(sv.inverse());
  } else {
    unit.push_back(sv);
    unit.push_back(st);
    unit.push_back(sv.inverse());
    unit.push_back(st.inverse());
  }
  return ShearWord::repeat(unit, steps);
}

ShearWord double_bracket_flow(const BracketTerm& term, double t, std::size_t outer_steps,
                              std::size_t inner_steps) {
  require_steps(outer_steps, "double_bracket_flow");
  require_steps(inner_steps, "double_bracket_flow");
  const std::size_t n = term.w.dim();
  if (term.v.dim() != n || term.tau.dim() != n) throw DimensionError("double_bracket_flow: dimension mismatch");
  if (!term.w.depends_only_on_q()) throw InvalidArgument("double_bracket_flow: w must depend on q only");

  const double total = term.weight * t;
  ShearWord unit(n);
  if (total == 0.0 || term.w.is_constant()) return unit;
  const double s = std::sqrt(std::abs(total) / static_cast<double>(outer_steps));

  // {w, u} with u = {v, tau}: u plays the second argument.
  const ShearWord inner = commutator_bracket_flow(term.v, term.tau, s, inner_steps);
  if (inner.empty()) return unit;
  const Shear sw = Shear::vertical(term.w, s);
  if (kCommutatorSecondArgumentFirst) {
    unit.append(inner);
    unit.push_back(sw);
    unit.append(invert_word(inner));
    unit.push_back(sw.inverse());
  } else {
    unit.push_back(sw);
    unit.append(inner);
    unit.push_back(sw.inverse());
    unit.append(invert_word(inner));
  }
  ShearWord word = ShearWord::repeat(unit, outer_steps);
  return total < 0.0 ? invert_word(word) : word;
}

ShearWord time_sliced_flow(const TimePoly& h, const AutonomousCompiler& compiler, std::size_t slices,
                           double t0, double t1) {
  require_steps(slices, "time_sliced_flow");
  if (!(t0 <= t1)) throw InvalidArgument("time_sliced_flow: needs t0 <= t1");
  ShearWord word(h.dim);
  if (t1 == t0) return word;
  const double dt = (t1 - t0) / static_cast<double>(slices);
  if (h.is_autonomous()) return ShearWord::repeat(compiler(h.at(t0), dt), slices);
  for (std::size_t j = 0; j < slices; ++j) {
    word.append(compiler(h.at(t0 + static_cast<double>(j) * dt), dt));
  }
  return word;
}

SeparableParts split_separable(const TrigPoly& h) {
  const std::size_t n = h.dim();
  TrigPolyBuilder q(n), p(n), mixed(n);
  for (const auto& [mode, c] : h.modes()) {
    if (mode.has_zero_k()) {
      q.add(mode, c);
    } else if (mode.has_zero_m()) {
      p.add(mode, c);
    } else {
      mixed.add(mode, c);
    }
  }
  return {q.finish(), p.finish(), mixed.finish()};
}

ShearWord separable_flow(const TrigPoly& h, double t, std::size_t steps) {
  SeparableParts parts = split_separable(h);
  if (!parts.mixed.empty()) throw InvalidArgument("separable_flow: Hamiltonian has mixed q-p modes");
  const std::vector<FlowFactory> flows{shear_flow_factory(std::move(parts.q_part)),
                                       shear_flow_factory(std::move(parts.p_part))};
  return trotter_sum_flow(flows, t, steps, h.dim());
}

ErrorBudget ErrorBudget::from(double eps_N, double L_bound) {
  ErrorBudget b;
  b.eps_N = eps_N;
  b.L_bound = L_bound;
  b.predicted_total = std::exp(L_bound) * eps_N;
  return b;
}

double calibrate_linear(double probe_error) { return probe_error * static_cast<double>(kProbeSteps); }

double calibrate_sqrt(double probe_error) {
  return probe_error * std::sqrt(static_cast<double>(kProbeSteps));
}

SchemeParams budget(double eps_target, double L_bound, const BudgetConstants& c) {
  if (!(eps_target > 0.0)) throw InvalidArgument("budget: eps_target must be positive");
  if (!(L_bound >= 0.0) || !std::isfinite(L_bound)) {
    throw InvalidArgument("budget: L_bound must be finite and non-negative");
  }
  SchemeParams p;
  p.L_bound = L_bound;
  if (std::isinf(eps_target)) return p;
  const double amp = std::exp(L_bound);
  auto linear = [&](double constant) {
    return smallest_steps(amp * constant / eps_target, eps_target,
                          [&](double n) { return amp * constant / n; });
  };
  auto root = [&](double constant) {
    const double r = amp * constant / eps_target;
    return smallest_steps(r * r, eps_target, [&](double n) { return amp * constant / std::sqrt(n); });
  };
  p.N_sum = linear(c.sum);
  p.N_slices = linear(c.slicing);
  p.N_comm_outer = root(c.outer);
  p.N_comm_inner = root(c.inner);
  return p;
}

Json params_to_json(const SchemeParams& p) {
  return Json{{"N_sum", p.N_sum},
              {"N_comm_outer", p.N_comm_outer},
              {"N_comm_inner", p.N_comm_inner},
              {"N_slices", p.N_slices},
              {"L_bound", p.L_bound}};
}

}  // namespace hamshear
