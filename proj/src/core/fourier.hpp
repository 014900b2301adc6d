#pragma once

// Real trigonometric polynomials on the 2n-torus T^n x T^n.
//
// A TrigPoly represents
//     f(q, p) = sum over stored modes of Re( c_{m,k} exp(2 pi i (<m,q> + <k,p>)) )
// with at most one entry per mode class {(m,k), (-m,-k)}. The stored
// representative is the one whose first nonzero component of (m,k) is
// positive; the zero mode stores a real constant.

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace hamshear {

using Complex = std::complex<double>;
using Json = nlohmann::json;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383279;

// Relative prune threshold applied after every algebraic operation.
inline constexpr double kPruneRelTol = 1e-14;

struct ModeIndex {
  std::vector<int> m;  // position frequencies
  std::vector<int> k;  // momentum frequencies

  std::size_t dim() const { return m.size(); }
  bool is_zero() const;
  bool has_zero_k() const;
  bool has_zero_m() const;
  // First nonzero component of (m,k) is positive (zero mode counts as canonical).
  bool is_canonical() const;
  ModeIndex negated() const;
  int max_abs() const;

  auto operator<=>(const ModeIndex&) const = default;
};

struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;

  std::size_t dim() const { return q.size(); }
  // Components reduced to [0,1).
  PhasePoint wrapped() const;
};

double wrap_unit(double x);

// Flat storage for many points: point i occupies q[i*n .. i*n+n) and p[...].
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> q;
  std::vector<double> p;

  PointSet() = default;
  PointSet(std::size_t n, std::size_t count) : dim(n), q(n * count), p(n * count) {}

  std::size_t size() const { return dim == 0 ? 0 : q.size() / dim; }
  PhasePoint at(std::size_t i) const;
  void set(std::size_t i, const PhasePoint& x);
  void push_back(const PhasePoint& x);
};

class TrigPolyBuilder;

class TrigPoly {
 public:
  using ModeMap = std::map<ModeIndex, Complex>;

  explicit TrigPoly(std::size_t dim = 1);

  static TrigPoly constant(std::size_t dim, double value);
  // Single term Re(c exp(2 pi i(<m,q>+<k,p>))); (m,k) need not be canonical.
  static TrigPoly term(std::vector<int> m, std::vector<int> k, Complex c);
  // cos(2 pi <m,q>) style helpers for tests and presets.
  static TrigPoly cos_q(std::size_t dim, std::size_t axis, double amplitude, int freq = 1);
  static TrigPoly cos_p(std::size_t dim, std::size_t axis, double amplitude, int freq = 1);

  std::size_t dim() const { return dim_; }
  const ModeMap& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }
  int degree() const;
  // sum |c|: an upper bound for the sup norm.
  double l1_norm() const;
  bool depends_only_on_q() const;  // every mode has k = 0
  bool depends_only_on_p() const;  // every mode has m = 0
  // True when every mode is the zero mode (gradient vanishes identically).
  bool is_constant() const;
  // Coefficient for (m,k) in this polynomial's convention (looks up either representative).
  Complex coefficient(const ModeIndex& mode) const;

  TrigPoly operator-() const;
  friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b);
  friend TrigPoly operator-(const TrigPoly& a, const TrigPoly& b);
  friend TrigPoly operator*(double s, const TrigPoly& a);
  friend TrigPoly operator*(const TrigPoly& a, double s) { return s * a; }

  friend bool operator==(const TrigPoly&, const TrigPoly&) = default;

 private:
  friend class TrigPolyBuilder;
  std::size_t dim_;
  ModeMap modes_;
};

// Accumulates terms in canonical form; prunes on finish() relative to the
// total magnitude of everything that was added.
class TrigPolyBuilder {
 public:
  explicit TrigPolyBuilder(std::size_t dim);
  void add(const ModeIndex& mode, Complex c);
  void add(const TrigPoly& f, double scale = 1.0);
  TrigPoly finish();

 private:
  std::size_t dim_;
  TrigPoly::ModeMap acc_;
  double magnitude_ = 0.0;
};

// Polynomial with time-polynomial coefficients: H_t = sum_d terms[d].second * t^terms[d].first.
struct TimePoly {
  std::size_t dim = 1;
  std::vector<std::pair<int, TrigPoly>> terms;

  static TimePoly autonomous(TrigPoly h);
  bool is_autonomous() const;
  TrigPoly at(double t) const;
};

// Evaluation-friendly flattened copy of a TrigPoly (no zero mode, no map lookups).
class CompiledPoly {
 public:
  CompiledPoly() = default;
  explicit CompiledPoly(const TrigPoly& f);

  std::size_t dim() const { return dim_; }
  double value(const double* q, const double* p) const;
  // Accumulates scale * grad into gq, gp.
  void add_gradient(const double* q, const double* p, double* gq, double* gp, double scale = 1.0) const;
  // Accumulates scale * Hessian (2n x 2n, q block first) into h.
  void add_hessian(const double* q, const double* p, Eigen::MatrixXd& h, double scale = 1.0) const;

 private:
  std::size_t dim_ = 0;
  double constant_ = 0.0;
  std::vector<int> freq_;  // 2n per mode
  std::vector<double> re_;
  std::vector<double> im_;
};

double evaluate(const TrigPoly& f, const PhasePoint& x);
std::vector<double> gradient_q(const TrigPoly& f, const PhasePoint& x);
std::vector<double> gradient_p(const TrigPoly& f, const PhasePoint& x);
// Full 2n x 2n Hessian, coordinates ordered (q_1..q_n, p_1..p_n).
Eigen::MatrixXd hessian(const TrigPoly& f, const PhasePoint& x);

// {f,g} = sum_i dq_i f dp_i g - dq_i g dp_i f, computed exactly on modes.
TrigPoly poisson_bracket(const TrigPoly& f, const TrigPoly& g);

// Values on the uniform grid with G points per axis (coordinate g/G), row-major
// over (q_1..q_n, p_1..p_n). Uses separable direct sums.
std::vector<double> sample_uniform(const TrigPoly& f, std::size_t points_per_axis);
// Default sup-norm grid: 64 per axis for n=1, 32 for n=2, 8 beyond.
std::size_t default_poly_grid(std::size_t dim);
double sup_norm(const TrigPoly& f, std::size_t points_per_axis = 0);
double sup_distance(const TrigPoly& f, const TrigPoly& g, std::size_t points_per_axis = 0);

using Sampler = std::function<double(const PhasePoint&)>;

// Degree-K Fourier truncation of a sampled function via discrete sums on the
// uniform grid. points_per_axis = 0 picks 2K+2; anything <= 2K+1 is rejected.
TrigPoly project_from_samples(const Sampler& sampler, std::size_t dim, int degree,
                              std::size_t points_per_axis = 0);

struct Periodization {
  TrigPoly poly;
  // Box coordinate x = scale * u for torus coordinate u in [-1/2, 1/2).
  double scale = 1.0;
  std::string window;
};

// f takes box coordinates (x_1..x_2n), q block first.
using BoxFunction = std::function<double(std::span<const double>)>;

// Maps [-h,h]^{2n} into the middle half of a torus cell of period 4h, windows
// f to zero at the seam and projects to degree K.
Periodization periodize(const BoxFunction& f, std::size_t dim, double half_width, int degree);

// Structured-text form: {"dim": n, "modes": [{"m": [...], "k": [...], "re": x, "im": y}]},
// modes in lexicographic (m,k) order.
Json poly_to_json(const TrigPoly& f);
TrigPoly poly_from_json(const Json& j);

}  // namespace hamshear
