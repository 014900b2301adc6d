#pragma once

// Ground-truth Hamiltonian flows and error metrology.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/fourier.hpp"
#include "core/shear.hpp"

namespace hamshear {

struct FlowSpec {
  TimePoly h;
  double t0 = 0.0;
  double t1 = 1.0;
  double tol = 1e-11;
};

// Adaptive Runge-Kutta-Fehlberg 7(8) on the unwrapped coordinates,
//   q' = dH/dp,  p' = -dH/dq,
// result reduced mod 1.
class FlowIntegrator {
 public:
  explicit FlowIntegrator(const FlowSpec& spec);

  std::size_t dim() const { return dim_; }
  // Flow from t0 to t1 (or t1 back to t0 when reverse is set).
  PhasePoint flow(const PhasePoint& x0, bool reverse = false) const;
  void flow(PointSet& points, bool reverse = false) const;

 private:
  std::size_t dim_;
  double t0_, t1_, tol_;
  std::vector<std::pair<int, CompiledPoly>> terms_;
};

PhasePoint integrate(const FlowSpec& spec, const PhasePoint& x0);
PhasePoint integrate_reverse(const FlowSpec& spec, const PhasePoint& x1);

// Default points per axis for flow error grids: 64 (n=1), 20 (n=2), 6 beyond.
std::size_t default_flow_grid(std::size_t dim);

// n=1: uniform lattice (i/G, j/G). n>=2: Halton points, G^(2n) of them.
// With a seed: G^(2n) uniform random points instead.
PointSet make_grid(std::size_t dim, std::size_t points_per_axis = 0,
                   std::optional<std::uint64_t> seed = std::nullopt);
PointSet random_points(std::size_t dim, std::size_t count, std::uint64_t seed);

// Max over the 2n components of the circular distance on R/Z.
double torus_distance(const PhasePoint& a, const PhasePoint& b);
double max_torus_distance(const PointSet& a, const PointSet& b);

// Reference images of a grid, computed once and reused across words.
class ReferenceImages {
 public:
  ReferenceImages(const FlowSpec& spec, PointSet grid);

  const PointSet& grid() const { return grid_; }
  const PointSet& images() const { return images_; }
  double error(const ShearWord& word) const;

 private:
  PointSet grid_;
  PointSet images_;
};

double sup_error(const ShearWord& word, const FlowSpec& spec, const PointSet& grid);

struct ConvergenceFit {
  std::vector<std::pair<double, double>> ladder;  // (steps, error)
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t used = 0;
  bool skipped = false;
  std::string note;
};

inline constexpr double kMeasurementFloor = 1e-13;

// Least squares on (log steps, log error); points at or below the floor are dropped.
// Fewer than 4 usable points: skipped with a note.
ConvergenceFit fit_convergence(const std::vector<std::pair<double, double>>& ladder);
Json fit_to_json(const ConvergenceFit& fit);

// sup over the grid (and time samples in [t0,t1]) of the spectral norm of dX_H.
double lipschitz_estimate(const TimePoly& h, const PointSet& grid, double t0 = 0.0, double t1 = 1.0);

}  // namespace hamshear
