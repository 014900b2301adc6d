#pragma once

// Product formulas that turn flows of sums, brackets and time-dependent
// Hamiltonians into shear words.

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "core/decompose.hpp"
#include "core/fourier.hpp"
#include "core/shear.hpp"

namespace hamshear {

// Word approximating the time-s flow of some Hamiltonian.
using FlowFactory = std::function<ShearWord(double)>;
// Word approximating the time-s flow of a frozen (autonomous) Hamiltonian.
using AutonomousCompiler = std::function<ShearWord(const TrigPoly&, double)>;

// Group commutator orientation. With the second argument's shear applied
// first, (tau(s), v(s), tau(-s), v(-s)) converges to the flow of +{v, tau}.
inline constexpr bool kCommutatorSecondArgumentFirst = true;

// Exact time-t flow of a generator that depends on q only or on p only.
ShearWord shear_flow(const TrigPoly& g, double t);
FlowFactory shear_flow_factory(TrigPoly g);

// (F_1(t/N) o ... o F_R(t/N))^N; F_R is applied first within each step.
ShearWord trotter_sum_flow(const std::vector<FlowFactory>& flows, double t, std::size_t steps,
                           std::size_t dim);

// (tau(s), v(s), tau(-s), v(-s)) repeated M times, s = sqrt(t/M); t < 0 by inversion.
ShearWord commutator_bracket_flow(const TrigPoly& v, const TrigPoly& tau, double t, std::size_t steps);

// Outer commutator of the exact w shear with the inner commutator word for {v,tau}.
// Outer time s = sqrt(|weight t| / M_outer); negative weight * t by inversion.
ShearWord double_bracket_flow(const BracketTerm& term, double t, std::size_t outer_steps,
                              std::size_t inner_steps);

// Frozen flows of H_{t0 + j dt} for j = 0..N-1 (j = 0 applied first), dt = (t1-t0)/N.
ShearWord time_sliced_flow(const TimePoly& h, const AutonomousCompiler& compiler, std::size_t slices,
                           double t0 = 0.0, double t1 = 1.0);

struct SeparableParts {
  TrigPoly q_part;  // modes with k = 0 (includes the constant)
  TrigPoly p_part;  // modes with m = 0, k != 0
  TrigPoly mixed;
};
SeparableParts split_separable(const TrigPoly& h);

// Trotter splitting of q_part + p_part with exact shears; rejects mixed modes.
ShearWord separable_flow(const TrigPoly& h, double t, std::size_t steps);

struct SchemeParams {
  std::size_t N_sum = 1;
  std::size_t N_comm_outer = 1;
  std::size_t N_comm_inner = 1;
  std::size_t N_slices = 1;
  double L_bound = 0.0;
};

struct ErrorBudget {
  double eps_N = 0.0;
  double L_bound = 0.0;
  double predicted_total = 0.0;  // exp(L_bound) * eps_N
  double measured_total = std::numeric_limits<double>::quiet_NaN();

  static ErrorBudget from(double eps_N, double L_bound);
};

// Error constants c in eps_N = c/N (sum, slicing) and c/sqrt(N) (commutators).
struct BudgetConstants {
  double sum = 1.0;
  double slicing = 1.0;
  double outer = 1.0;
  double inner = 1.0;
};

inline constexpr std::size_t kProbeSteps = 16;
// c from one probe error measured at kProbeSteps.
double calibrate_linear(double probe_error);
double calibrate_sqrt(double probe_error);

// A-priori step counts: smallest N with exp(L) * eps_N <= eps_target per stage.
SchemeParams budget(double eps_target, double L_bound, const BudgetConstants& c = {});

Json params_to_json(const SchemeParams& p);

}  // namespace hamshear
