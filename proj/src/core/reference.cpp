#include "core/reference.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "core/errors.hpp"

namespace hamshear {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

constexpr std::size_t kMaxSteps = 10'000'000;
constexpr int kMaxConsecutiveRejects = 500;

double circular(double a, double b) {
  double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

// ---------------------------------------------------------------- integration

FlowIntegrator::FlowIntegrator(const FlowSpec& spec)
    : dim_(spec.h.dim), t0_(spec.t0), t1_(spec.t1), tol_(spec.tol) {
  if (!(spec.tol > 0.0)) throw InvalidArgument("flow tolerance must be positive");
  if (!(spec.t0 <= spec.t1)) throw InvalidArgument("flow interval needs t0 <= t1");
  for (const auto& [power, poly] : spec.h.terms) {
    if (poly.dim() != dim_) throw DimensionError("time-polynomial term dimension mismatch");
    if (power < 0) throw InvalidArgument("negative time power");
    if (poly.is_constant()) continue;
    terms_.emplace_back(power, CompiledPoly(poly));
  }
}

PhasePoint FlowIntegrator::flow(const PhasePoint& x0, bool reverse) const {
  if (x0.q.size() != dim_ || x0.p.size() != dim_) {
    throw DimensionError("point dimension does not match Hamiltonian");
  }
  const std::size_t n = dim_;
  State x(2 * n);
  std::copy(x0.q.begin(), x0.q.end(), x.begin());
  std::copy(x0.p.begin(), x0.p.end(), x.begin() + n);

  if (!terms_.empty() && t1_ > t0_) {
    std::vector<double> gq(n), gp(n);
    auto field = [&](const State& s, State& dsdt, double t) {
      std::fill(gq.begin(), gq.end(), 0.0);
      std::fill(gp.begin(), gp.end(), 0.0);
      for (const auto& [power, poly] : terms_) {
        const double c = power == 0 ? 1.0 : std::pow(t, power);
        poly.add_gradient(s.data(), s.data() + n, gq.data(), gp.data(), c);
      }
      for (std::size_t i = 0; i < n; ++i) {
        dsdt[i] = gp[i];
        dsdt[n + i] = -gq[i];
      }
    };

    auto stepper = odeint::make_controlled(tol_, 0.0, odeint::runge_kutta_fehlberg78<State>());
    const double start = reverse ? t1_ : t0_;
    const double end = reverse ? t0_ : t1_;
    const double span = t1_ - t0_;
    const double dir = reverse ? -1.0 : 1.0;
    double t = start;
    double dt = dir * span / 16.0;
    std::size_t steps = 0;
    int rejects = 0;
    while (dir * (end - t) > 1e-15 * std::max(1.0, span)) {
      if (dir * (t + dt - end) > 0.0) dt = end - t;
      if (stepper.try_step(field, x, t, dt) == odeint::success) {
        rejects = 0;
        if (++steps > kMaxSteps) throw IntegrationError("reference integrator exceeded step cap");
      } else if (++rejects > kMaxConsecutiveRejects || std::abs(dt) < 1e-14 * span) {
        throw IntegrationError("reference integrator step size underflow");
      }
    }
  }

  PhasePoint y;
  y.q.assign(x.begin(), x.begin() + n);
  y.p.assign(x.begin() + n, x.end());
  return y.wrapped();
}

void FlowIntegrator::flow(PointSet& points, bool reverse) const {
  if (points.dim != dim_) throw DimensionError("point set dimension does not match Hamiltonian");
  for (std::size_t i = 0; i < points.size(); ++i) points.set(i, flow(points.at(i), reverse));
}

PhasePoint integrate(const FlowSpec& spec, const PhasePoint& x0) {
  return FlowIntegrator(spec).flow(x0);
}

PhasePoint integrate_reverse(const FlowSpec& spec, const PhasePoint& x1) {
  return FlowIntegrator(spec).flow(x1, true);
}

// ---------------------------------------------------------------- grids

std::size_t default_flow_grid(std::size_t dim) {
  if (dim == 1) return 64;
  if (dim == 2) return 20;
  return 6;
}

PointSet make_grid(std::size_t dim, std::size_t points_per_axis, std::optional<std::uint64_t> seed) {
  if (dim == 0) throw InvalidArgument("grid dimension must be >= 1");
  const std::size_t g = points_per_axis == 0 ? default_flow_grid(dim) : points_per_axis;
  std::size_t count = 1;
  for (std::size_t i = 0; i < 2 * dim; ++i) count *= g;
  if (seed) return random_points(dim, count, *seed);

  PointSet pts(dim, count);
  if (dim == 1) {
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; j < g; ++j) {
        pts.q[i * g + j] = static_cast<double>(i) / g;
        pts.p[i * g + j] = static_cast<double>(j) / g;
      }
    }
    return pts;
  }
  if (2 * dim > std::size(kPrimes)) throw InvalidArgument("Halton grid supports n <= 8");
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t a = 0; a < dim; ++a) {
      pts.q[i * dim + a] = radical_inverse(i + 1, kPrimes[a]);
      pts.p[i * dim + a] = radical_inverse(i + 1, kPrimes[dim + a]);
    }
  }
  return pts;
}

PointSet random_points(std::size_t dim, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointSet pts(dim, count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t a = 0; a < dim; ++a) pts.q[i * dim + a] = u(rng);
    for (std::size_t a = 0; a < dim; ++a) pts.p[i * dim + a] = u(rng);
  }
  return pts;
}

// ---------------------------------------------------------------- metrics

double torus_distance(const PhasePoint& a, const PhasePoint& b) {
  if (a.q.size() != b.q.size() || a.p.size() != b.p.size()) {
    throw DimensionError("torus_distance: dimension mismatch");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.q.size(); ++i) d = std::max(d, circular(a.q[i], b.q[i]));
  for (std::size_t i = 0; i < a.p.size(); ++i) d = std::max(d, circular(a.p[i], b.p[i]));
  return d;
}

double max_torus_distance(const PointSet& a, const PointSet& b) {
  if (a.dim != b.dim || a.q.size() != b.q.size()) {
    throw DimensionError("max_torus_distance: point sets differ in shape");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.q.size(); ++i) d = std::max(d, circular(a.q[i], b.q[i]));
  for (std::size_t i = 0; i < a.p.size(); ++i) d = std::max(d, circular(a.p[i], b.p[i]));
  return d;
}

ReferenceImages::ReferenceImages(const FlowSpec& spec, PointSet grid)
    : grid_(std::move(grid)), images_(grid_) {
  FlowIntegrator(spec).flow(images_);
}

double ReferenceImages::error(const ShearWord& word) const {
  PointSet pts = grid_;
  apply_word(word, pts);
  return max_torus_distance(pts, images_);
}

double sup_error(const ShearWord& word, const FlowSpec& spec, const PointSet& grid) {
  if (word.dim() != spec.h.dim || grid.dim != word.dim()) {
    throw DimensionError("sup_error: word, Hamiltonian and grid dimensions differ");
  }
  return ReferenceImages(spec, grid).error(word);
}

ConvergenceFit fit_convergence(const std::vector<std::pair<double, double>>& ladder) {
  ConvergenceFit fit;
  fit.ladder = ladder;
  std::vector<double> xs, ys;
  std::size_t dropped = 0;
  for (const auto& [steps, err] : ladder) {
    if (!(steps > 0.0) || !(err > kMeasurementFloor) || !std::isfinite(err)) {
      ++dropped;
      continue;
    }
    xs.push_back(std::log(steps));
    ys.push_back(std::log(err));
  }
  fit.used = xs.size();
  if (dropped > 0) {
    fit.note = std::to_string(dropped) + " point(s) at or below the measurement floor excluded";
  }
  if (xs.size() < 4) {
    fit.skipped = true;
    fit.note += std::string(fit.note.empty() ? "" : "; ") + "fewer than 4 usable points, fit skipped";
    return fit;
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) {
    fit.skipped = true;
    fit.note += std::string(fit.note.empty() ? "" : "; ") + "all steps equal, fit skipped";
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

Json fit_to_json(const ConvergenceFit& fit) {
  Json j{{"points", fit.ladder.size()}, {"used", fit.used}, {"skipped", fit.skipped}};
  if (fit.skipped) {
    j["slope"] = nullptr;
    j["intercept"] = nullptr;
    j["r2"] = nullptr;
  } else {
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r2"] = fit.r2;
  }
  if (!fit.note.empty()) j["note"] = fit.note;
  return j;
}

double lipschitz_estimate(const TimePoly& h, const PointSet& grid, double t0, double t1) {
  if (grid.dim != h.dim) throw DimensionError("lipschitz_estimate: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(h.dim);
  std::vector<double> times{t0};
  if (!h.is_autonomous()) {
    times.clear();
    for (int i = 0; i <= 10; ++i) times.push_back(t0 + (t1 - t0) * i / 10.0);
  }
  double best = 0.0;
  Eigen::MatrixXd hess(2 * n, 2 * n), dx(2 * n, 2 * n);
  for (double t : times) {
    const CompiledPoly f(h.at(t));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      hess.setZero();
      f.add_hessian(&grid.q[i * h.dim], &grid.p[i * h.dim], hess);
      // X = (H_p, -H_q)
      dx.topRows(n) = hess.bottomRows(n);
      dx.bottomRows(n) = -hess.topRows(n);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(dx);
      best = std::max(best, svd.singularValues()(0));
    }
  }
  return best;
}

}  // namespace hamshear
