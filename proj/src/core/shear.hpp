#pragma once

// Shear maps and finite shear words.
//
//   Horizontal (tau on T^n in p):  (q, p) -> (q + grad tau(p), p)
//   Vertical   (v on T^n in q):    (q, p) -> (q, p - grad v(q))
//
// A time-t flow is stored as the time-1 shear of t * generator. Generators are
// shared between shears and carry a scale factor, so repeated words cost one
// pointer per shear.

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "core/fourier.hpp"

namespace hamshear {

enum class ShearKind { Horizontal, Vertical };

const char* kind_tag(ShearKind kind);  // "H" / "V"

// Immutable generator: polynomial in one variable group plus a flattened copy
// of its non-constant modes restricted to that group.
class Generator {
 public:
  Generator(ShearKind kind, TrigPoly poly);

  ShearKind kind() const { return kind_; }
  const TrigPoly& poly() const { return poly_; }
  bool is_trivial() const { return re_.empty(); }

  // Accumulates scale * grad(generator)(x) into out (length n).
  void add_gradient(const double* x, double scale, double* out) const;
  // Accumulates scale * Hess(generator)(x) into the n x n block h.
  void add_hessian(const double* x, double scale, Eigen::MatrixXd& h) const;

 private:
  ShearKind kind_;
  TrigPoly poly_;
  std::size_t dim_;
  std::vector<int> freq_;  // n per mode
  std::vector<double> re_;
  std::vector<double> im_;
};

struct Shear {
  ShearKind kind = ShearKind::Horizontal;
  std::shared_ptr<const Generator> gen;
  double scale = 1.0;

  static Shear horizontal(TrigPoly tau, double scale = 1.0);
  static Shear vertical(TrigPoly v, double scale = 1.0);

  std::size_t dim() const { return gen->poly().dim(); }
  // scale * generator as a polynomial.
  TrigPoly generator() const;
  Shear inverse() const { return Shear{kind, gen, -scale}; }
  Shear scaled(double s) const { return Shear{kind, gen, scale * s}; }
  bool is_identity() const { return scale == 0.0 || gen->is_trivial(); }
};

// Ordered shears S_1..S_M, applied as S_M o ... o S_1 (first listed = first applied).
class ShearWord {
 public:
  explicit ShearWord(std::size_t dim = 1, bool merge = true);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return shears_.size(); }
  bool empty() const { return shears_.empty(); }
  const std::vector<Shear>& shears() const { return shears_; }
  bool merging() const { return merge_; }
  // Number of shears pushed before same-kind merging and identity removal.
  std::size_t unmerged_length() const { return unmerged_; }

  // Appends one shear, merging with the last one when both have the same kind.
  void push_back(const Shear& s);
  void append(const ShearWord& w);
  // w repeated `times` times (merged boundary shear built once).
  static ShearWord repeat(const ShearWord& w, std::size_t times);

 private:
  std::size_t dim_;
  bool merge_;
  std::vector<Shear> shears_;
  std::size_t unmerged_ = 0;
};

PhasePoint apply_shear(const Shear& s, const PhasePoint& x);
PhasePoint apply_word(const ShearWord& w, const PhasePoint& x);
// In-place application to every point of the set.
void apply_word(const ShearWord& w, PointSet& points);

Eigen::MatrixXd word_jacobian(const ShearWord& w, const PhasePoint& x);
ShearWord invert_word(const ShearWord& w);

// Omega = [[0, I], [-I, 0]] in (q, p) ordering.
Eigen::MatrixXd symplectic_form(std::size_t dim);
// max_ij |J^T Omega J - Omega|_ij
double symplectic_residual(const Eigen::MatrixXd& jacobian);
// Same, divided by max(1, max_ij |J_ij|)^2: the rounding floor of J^T Omega J grows with |J|^2.
double symplectic_residual_relative(const Eigen::MatrixXd& jacobian);

// {"schema": "hamshear/word/1", "dim": n, "shears": [{"kind": "H"|"V", "generator": poly}]}
Json word_to_json(const ShearWord& w);
ShearWord word_from_json(const Json& j);
// Sidecar record: word length before/after merging.
Json word_metrics_json(const ShearWord& w);

}  // namespace hamshear
