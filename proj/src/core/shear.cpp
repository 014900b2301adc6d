#include "core/shear.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace hamshear {

namespace {

void require_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(expected) +
                         " vs " + std::to_string(got) + ")");
  }
}

void require_point(const ShearWord& w, const PhasePoint& x) {
  if (x.q.size() != w.dim() || x.p.size() != w.dim()) {
    throw DimensionError("point dimension does not match word dimension " +
                         std::to_string(w.dim()));
  }
}

// Shifts the moving block of one point in place.
inline void shear_point(const Shear& s, double* q, double* p, double* grad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) grad[i] = 0.0;
  if (s.kind == ShearKind::Horizontal) {
    s.gen->add_gradient(p, s.scale, grad);
    for (std::size_t i = 0; i < n; ++i) q[i] = wrap_unit(q[i] + grad[i]);
  } else {
    s.gen->add_gradient(q, s.scale, grad);
    for (std::size_t i = 0; i < n; ++i) p[i] = wrap_unit(p[i] - grad[i]);
  }
}

}  // namespace

const char* kind_tag(ShearKind kind) { return kind == ShearKind::Horizontal ? "H" : "V"; }

// ---------------------------------------------------------------- Generator

Generator::Generator(ShearKind kind, TrigPoly poly)
    : kind_(kind), poly_(std::move(poly)), dim_(poly_.dim()) {
  const bool ok = kind == ShearKind::Horizontal ? poly_.depends_only_on_p()
                                                : poly_.depends_only_on_q();
  if (!ok) {
    throw InvalidArgument(kind == ShearKind::Horizontal
                              ? "horizontal shear generator must depend on p only (m = 0)"
                              : "vertical shear generator must depend on q only (k = 0)");
  }
  for (const auto& [mode, c] : poly_.modes()) {
    if (mode.is_zero()) continue;
    const auto& nu = kind == ShearKind::Horizontal ? mode.k : mode.m;
    freq_.insert(freq_.end(), nu.begin(), nu.end());
    re_.push_back(c.real());
    im_.push_back(c.imag());
  }
}

void Generator::add_gradient(const double* x, double scale, double* out) const {
  const std::size_t n = dim_;
  for (std::size_t j = 0; j < re_.size(); ++j) {
    const int* nu = &freq_[n * j];
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) phase += nu[i] * x[i];
    phase *= kTwoPi;
    const double a = scale * re_[j];
    const double b = scale * im_[j];
    const double w = -kTwoPi * (a * std::sin(phase) + b * std::cos(phase));
    for (std::size_t i = 0; i < n; ++i) out[i] += w * nu[i];
  }
}

void Generator::add_hessian(const double* x, double scale, Eigen::MatrixXd& h) const {
  const std::size_t n = dim_;
  for (std::size_t j = 0; j < re_.size(); ++j) {
    const int* nu = &freq_[n * j];
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) phase += nu[i] * x[i];
    phase *= kTwoPi;
    const double a = scale * re_[j];
    const double b = scale * im_[j];
    const double w = -kTwoPi * kTwoPi * (a * std::cos(phase) - b * std::sin(phase));
    for (std::size_t r = 0; r < n; ++r) {
      if (nu[r] == 0) continue;
      for (std::size_t c = 0; c < n; ++c) h(r, c) += w * nu[r] * nu[c];
    }
  }
}

// ---------------------------------------------------------------- Shear

Shear Shear::horizontal(TrigPoly tau, double scale) {
  return Shear{ShearKind::Horizontal,
               std::make_shared<const Generator>(ShearKind::Horizontal, std::move(tau)), scale};
}

Shear Shear::vertical(TrigPoly v, double scale) {
  return Shear{ShearKind::Vertical,
               std::make_shared<const Generator>(ShearKind::Vertical, std::move(v)), scale};
}

TrigPoly Shear::generator() const { return scale * gen->poly(); }

// ---------------------------------------------------------------- ShearWord

ShearWord::ShearWord(std::size_t dim, bool merge) : dim_(dim), merge_(merge) {
  if (dim == 0) throw InvalidArgument("word dimension must be >= 1");
}

void ShearWord::push_back(const Shear& s) {
  require_dim(dim_, s.dim(), "ShearWord::push_back");
  ++unmerged_;
  if (!merge_) {
    shears_.push_back(s);
    return;
  }
  if (s.is_identity()) return;
  if (shears_.empty() || shears_.back().kind != s.kind) {
    shears_.push_back(s);
    return;
  }
  Shear& last = shears_.back();
  if (last.gen == s.gen) {
    const double scale = last.scale + s.scale;
    if (scale == 0.0) {
      shears_.pop_back();
    } else {
      last.scale = scale;
    }
    return;
  }
  TrigPolyBuilder sum(dim_);
  sum.add(last.gen->poly(), last.scale);
  sum.add(s.gen->poly(), s.scale);
  TrigPoly merged = sum.finish();
  if (merged.is_constant()) {
    shears_.pop_back();
    return;
  }
  last = Shear{s.kind, std::make_shared<const Generator>(s.kind, std::move(merged)), 1.0};
}

void ShearWord::append(const ShearWord& w) {
  require_dim(dim_, w.dim(), "ShearWord::append");
  const std::size_t before = unmerged_;
  for (const auto& s : w.shears_) push_back(s);
  unmerged_ = before + w.unmerged_;
}

ShearWord ShearWord::repeat(const ShearWord& w, std::size_t times) {
  ShearWord r(w.dim_, w.merge_);
  if (times == 0 || w.empty()) return r;
  const auto& s = w.shears_;
  const bool alternating_ends = s.front().kind != s.back().kind;

  if (w.merge_ && s.size() >= 2 && alternating_ends) {
    r.shears_.reserve(s.size() * times);
    for (std::size_t t = 0; t < times; ++t) r.shears_.insert(r.shears_.end(), s.begin(), s.end());
    r.unmerged_ = w.unmerged_ * times;
    return r;
  }
  if (w.merge_ && s.size() >= 3) {
    ShearWord junction(w.dim_, true);
    junction.push_back(s.back());
    junction.push_back(s.front());
    if (junction.size() == 1) {
      r.shears_.reserve((s.size() - 1) * times + 1);
      r.shears_.insert(r.shears_.end(), s.begin(), s.end() - 1);
      for (std::size_t t = 1; t < times; ++t) {
        r.shears_.push_back(junction.shears_.front());
        r.shears_.insert(r.shears_.end(), s.begin() + 1, s.end() - 1);
      }
      r.shears_.push_back(s.back());
      r.unmerged_ = w.unmerged_ * times;
      return r;
    }
  }
  for (std::size_t t = 0; t < times; ++t) r.append(w);
  return r;
}

// ---------------------------------------------------------------- application

PhasePoint apply_shear(const Shear& s, const PhasePoint& x) {
  if (x.q.size() != s.dim() || x.p.size() != s.dim()) {
    throw DimensionError("point dimension does not match shear dimension");
  }
  PhasePoint y = x;
  std::vector<double> grad(s.dim());
  shear_point(s, y.q.data(), y.p.data(), grad.data(), s.dim());
  return y;
}

PhasePoint apply_word(const ShearWord& w, const PhasePoint& x) {
  require_point(w, x);
  PhasePoint y = x.wrapped();
  std::vector<double> grad(w.dim());
  for (const auto& s : w.shears()) shear_point(s, y.q.data(), y.p.data(), grad.data(), w.dim());
  return y;
}

void apply_word(const ShearWord& w, PointSet& points) {
  require_dim(w.dim(), points.dim, "apply_word");
  const std::size_t n = w.dim();
  const std::size_t count = points.size();
  for (auto& v : points.q) v = wrap_unit(v);
  for (auto& v : points.p) v = wrap_unit(v);
  std::vector<double> grad(n);
  for (const auto& s : w.shears()) {
    for (std::size_t i = 0; i < count; ++i) {
      shear_point(s, &points.q[i * n], &points.p[i * n], grad.data(), n);
    }
  }
}

Eigen::MatrixXd word_jacobian(const ShearWord& w, const PhasePoint& x) {
  require_point(w, x);
  const auto n = static_cast<Eigen::Index>(w.dim());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  Eigen::MatrixXd h(n, n);
  PhasePoint y = x.wrapped();
  std::vector<double> grad(w.dim());
  for (const auto& s : w.shears()) {
    h.setZero();
    if (s.kind == ShearKind::Horizontal) {
      // q' = q + grad tau(p): top rows gain Hess(tau) * bottom rows.
      s.gen->add_hessian(y.p.data(), s.scale, h);
      jac.topRows(n) += h * jac.bottomRows(n);
    } else {
      // p' = p - grad v(q): bottom rows lose Hess(v) * top rows.
      s.gen->add_hessian(y.q.data(), s.scale, h);
      jac.bottomRows(n) -= h * jac.topRows(n);
    }
    shear_point(s, y.q.data(), y.p.data(), grad.data(), w.dim());
  }
  return jac;
}

ShearWord invert_word(const ShearWord& w) {
  ShearWord r(w.dim(), w.merging());
  for (auto it = w.shears().rbegin(); it != w.shears().rend(); ++it) r.push_back(it->inverse());
  return r;
}

Eigen::MatrixXd symplectic_form(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return omega;
}

double symplectic_residual(const Eigen::MatrixXd& jacobian) {
  const Eigen::MatrixXd omega = symplectic_form(static_cast<std::size_t>(jacobian.rows() / 2));
  return (jacobian.transpose() * omega * jacobian - omega).cwiseAbs().maxCoeff();
}

double symplectic_residual_relative(const Eigen::MatrixXd& jacobian) {
  const double scale = std::max(1.0, jacobian.cwiseAbs().maxCoeff());
  return symplectic_residual(jacobian) / (scale * scale);
}

// ---------------------------------------------------------------- serialization

Json word_to_json(const ShearWord& w) {
  Json shears = Json::array();
  for (const auto& s : w.shears()) {
    shears.push_back(Json{{"kind", kind_tag(s.kind)}, {"generator", poly_to_json(s.generator())}});
  }
  return Json{{"schema", "hamshear/word/1"}, {"dim", w.dim()}, {"shears", std::move(shears)}};
}

ShearWord word_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ParseError("word file must be an object");
    if (j.contains("schema") && j.at("schema") != "hamshear/word/1") {
      throw ParseError("unsupported word schema " + j.at("schema").dump());
    }
    const auto dim = j.at("dim").get<std::size_t>();
    if (dim == 0) throw ParseError("word dim must be >= 1");
    // File content is taken verbatim: no merging on load.
    ShearWord w(dim, false);
    for (const auto& e : j.at("shears")) {
      const auto kind = e.at("kind").get<std::string>();
      TrigPoly g = poly_from_json(e.at("generator"));
      if (g.dim() != dim) throw DimensionError("shear generator dimension does not match word");
      if (kind == "H") {
        w.push_back(Shear::horizontal(std::move(g)));
      } else if (kind == "V") {
        w.push_back(Shear::vertical(std::move(g)));
      } else {
        throw ParseError("shear kind must be \"H\" or \"V\", got \"" + kind + "\"");
      }
    }
    return w;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed word: ") + e.what());
  }
}

Json word_metrics_json(const ShearWord& w) {
  return Json{{"schema", "hamshear/word-metrics/1"},
              {"length_before_merge", w.unmerged_length()},
              {"length_after_merge", w.size()},
              {"merging", w.merging()}};
}

}  // namespace hamshear
