#include "core/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"

namespace hamshear {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

void require_point_dim(const TrigPoly& f, const PhasePoint& x) {
  if (x.q.size() != f.dim() || x.p.size() != f.dim()) {
    throw DimensionError("point dimension does not match polynomial dimension " +
                         std::to_string(f.dim()));
  }
}

ModeIndex sum_mode(const ModeIndex& a, const ModeIndex& b, int sign) {
  ModeIndex r{a.m, a.k};
  for (std::size_t i = 0; i < r.m.size(); ++i) {
    r.m[i] += sign * b.m[i];
    r.k[i] += sign * b.k[i];
  }
  return r;
}

long dot(const std::vector<int>& a, const std::vector<int>& b) {
  long s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long>(a[i]) * b[i];
  return s;
}

std::size_t ipow(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

// Applies the (out x in) matrix `m` along `axis` of a row-major tensor.
void transform_axis(std::vector<Complex>& data, std::vector<std::size_t>& shape, std::size_t axis,
                    const std::vector<Complex>& m, std::size_t out_len) {
  const std::size_t in_len = shape[axis];
  std::size_t outer = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= shape[a];
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];

  std::vector<Complex> result(outer * out_len * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t c = 0; c < in_len; ++c) {
      const Complex* src = &data[(o * in_len + c) * inner];
      bool any = false;
      for (std::size_t i = 0; i < inner && !any; ++i) any = src[i] != Complex{};
      if (!any) continue;
      for (std::size_t r = 0; r < out_len; ++r) {
        const Complex coef = m[r * in_len + c];
        Complex* dst = &result[(o * out_len + r) * inner];
        for (std::size_t i = 0; i < inner; ++i) dst[i] += coef * src[i];
      }
    }
  }
  data.swap(result);
  shape[axis] = out_len;
}

// Smooth step: 1 on (-inf,0], 0 on [1,inf), C^inf in between.
double smooth_step_down(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return b / (a + b);
}

}  // namespace

// ---------------------------------------------------------------- ModeIndex

bool ModeIndex::is_zero() const { return has_zero_m() && has_zero_k(); }

bool ModeIndex::has_zero_k() const {
  return std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
}

bool ModeIndex::has_zero_m() const {
  return std::all_of(m.begin(), m.end(), [](int v) { return v == 0; });
}

bool ModeIndex::is_canonical() const {
  for (int v : m) {
    if (v != 0) return v > 0;
  }
  for (int v : k) {
    if (v != 0) return v > 0;
  }
  return true;
}

ModeIndex ModeIndex::negated() const {
  ModeIndex r{m, k};
  for (auto& v : r.m) v = -v;
  for (auto& v : r.k) v = -v;
  return r;
}

int ModeIndex::max_abs() const {
  int r = 0;
  for (int v : m) r = std::max(r, std::abs(v));
  for (int v : k) r = std::max(r, std::abs(v));
  return r;
}

// ---------------------------------------------------------------- points

double wrap_unit(double x) {
  double r = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.0.
  return r >= 1.0 ? 0.0 : r;
}

PhasePoint PhasePoint::wrapped() const {
  PhasePoint r = *this;
  for (auto& v : r.q) v = wrap_unit(v);
  for (auto& v : r.p) v = wrap_unit(v);
  return r;
}

PhasePoint PointSet::at(std::size_t i) const {
  PhasePoint x;
  x.q.assign(q.begin() + i * dim, q.begin() + (i + 1) * dim);
  x.p.assign(p.begin() + i * dim, p.begin() + (i + 1) * dim);
  return x;
}

void PointSet::set(std::size_t i, const PhasePoint& x) {
  std::copy(x.q.begin(), x.q.end(), q.begin() + i * dim);
  std::copy(x.p.begin(), x.p.end(), p.begin() + i * dim);
}

void PointSet::push_back(const PhasePoint& x) {
  if (dim == 0) dim = x.dim();
  require_same_dim(dim, x.dim(), "PointSet::push_back");
  q.insert(q.end(), x.q.begin(), x.q.end());
  p.insert(p.end(), x.p.begin(), x.p.end());
}

// ---------------------------------------------------------------- TrigPoly

TrigPoly::TrigPoly(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw InvalidArgument("TrigPoly dimension must be >= 1");
}

TrigPoly TrigPoly::constant(std::size_t dim, double value) {
  TrigPolyBuilder b(dim);
  b.add(ModeIndex{std::vector<int>(dim, 0), std::vector<int>(dim, 0)}, value);
  return b.finish();
}

TrigPoly TrigPoly::term(std::vector<int> m, std::vector<int> k, Complex c) {
  require_same_dim(m.size(), k.size(), "TrigPoly::term");
  TrigPolyBuilder b(m.size());
  b.add(ModeIndex{std::move(m), std::move(k)}, c);
  return b.finish();
}

TrigPoly TrigPoly::cos_q(std::size_t dim, std::size_t axis, double amplitude, int freq) {
  std::vector<int> m(dim, 0);
  m.at(axis) = freq;
  return term(m, std::vector<int>(dim, 0), amplitude);
}

TrigPoly TrigPoly::cos_p(std::size_t dim, std::size_t axis, double amplitude, int freq) {
  std::vector<int> k(dim, 0);
  k.at(axis) = freq;
  return term(std::vector<int>(dim, 0), k, amplitude);
}

int TrigPoly::degree() const {
  int d = 0;
  for (const auto& [mode, c] : modes_) d = std::max(d, mode.max_abs());
  return d;
}

double TrigPoly::l1_norm() const {
  double s = 0.0;
  for (const auto& [mode, c] : modes_) s += std::abs(c);
  return s;
}

bool TrigPoly::depends_only_on_q() const {
  return std::all_of(modes_.begin(), modes_.end(),
                     [](const auto& e) { return e.first.has_zero_k(); });
}

bool TrigPoly::depends_only_on_p() const {
  return std::all_of(modes_.begin(), modes_.end(),
                     [](const auto& e) { return e.first.has_zero_m(); });
}

bool TrigPoly::is_constant() const {
  return std::all_of(modes_.begin(), modes_.end(),
                     [](const auto& e) { return e.first.is_zero(); });
}

Complex TrigPoly::coefficient(const ModeIndex& mode) const {
  if (mode.is_canonical()) {
    auto it = modes_.find(mode);
    return it == modes_.end() ? Complex{} : it->second;
  }
  auto it = modes_.find(mode.negated());
  return it == modes_.end() ? Complex{} : std::conj(it->second);
}

TrigPoly TrigPoly::operator-() const { return -1.0 * *this; }

TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
  require_same_dim(a.dim(), b.dim(), "TrigPoly +");
  TrigPolyBuilder out(a.dim());
  out.add(a);
  out.add(b);
  return out.finish();
}

TrigPoly operator-(const TrigPoly& a, const TrigPoly& b) {
  require_same_dim(a.dim(), b.dim(), "TrigPoly -");
  TrigPolyBuilder out(a.dim());
  out.add(a);
  out.add(b, -1.0);
  return out.finish();
}

TrigPoly operator*(double s, const TrigPoly& a) {
  TrigPoly r(a.dim());
  if (s == 0.0) return r;
  r.modes_ = a.modes_;
  for (auto& [mode, c] : r.modes_) c *= s;
  return r;
}

// ---------------------------------------------------------------- builder

TrigPolyBuilder::TrigPolyBuilder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw InvalidArgument("TrigPoly dimension must be >= 1");
}

void TrigPolyBuilder::add(const ModeIndex& mode, Complex c) {
  if (mode.m.size() != dim_ || mode.k.size() != dim_) {
    throw DimensionError("mode dimension does not match polynomial dimension " +
                         std::to_string(dim_));
  }
  if (c == Complex{}) return;
  magnitude_ += std::abs(c);
  if (mode.is_zero()) {
    acc_[mode] += Complex(c.real(), 0.0);
  } else if (mode.is_canonical()) {
    acc_[mode] += c;
  } else {
    acc_[mode.negated()] += std::conj(c);
  }
}

void TrigPolyBuilder::add(const TrigPoly& f, double scale) {
  require_same_dim(dim_, f.dim(), "TrigPolyBuilder::add");
  if (scale == 0.0) return;
  for (const auto& [mode, c] : f.modes()) {
    magnitude_ += std::abs(c * scale);
    acc_[mode] += c * scale;
  }
}

TrigPoly TrigPolyBuilder::finish() {
  TrigPoly r(dim_);
  const double cut = kPruneRelTol * magnitude_;
  for (auto& [mode, c] : acc_) {
    if (std::abs(c) > cut && c != Complex{}) r.modes_.emplace_hint(r.modes_.end(), mode, c);
  }
  acc_.clear();
  magnitude_ = 0.0;
  return r;
}

// ---------------------------------------------------------------- TimePoly

TimePoly TimePoly::autonomous(TrigPoly h) {
  TimePoly r;
  r.dim = h.dim();
  r.terms.emplace_back(0, std::move(h));
  return r;
}

bool TimePoly::is_autonomous() const {
  return std::all_of(terms.begin(), terms.end(),
                     [](const auto& t) { return t.first == 0 || t.second.empty(); });
}

TrigPoly TimePoly::at(double t) const {
  TrigPolyBuilder b(dim);
  for (const auto& [power, poly] : terms) b.add(poly, std::pow(t, power));
  return b.finish();
}

// ---------------------------------------------------------------- CompiledPoly

CompiledPoly::CompiledPoly(const TrigPoly& f) : dim_(f.dim()) {
  for (const auto& [mode, c] : f.modes()) {
    if (mode.is_zero()) {
      constant_ += c.real();
      continue;
    }
    freq_.insert(freq_.end(), mode.m.begin(), mode.m.end());
    freq_.insert(freq_.end(), mode.k.begin(), mode.k.end());
    re_.push_back(c.real());
    im_.push_back(c.imag());
  }
}

double CompiledPoly::value(const double* q, const double* p) const {
  double s = constant_;
  const std::size_t n = dim_;
  for (std::size_t j = 0; j < re_.size(); ++j) {
    const int* nu = &freq_[2 * n * j];
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) phase += nu[i] * q[i] + nu[n + i] * p[i];
    phase *= kTwoPi;
    s += re_[j] * std::cos(phase) - im_[j] * std::sin(phase);
  }
  return s;
}

void CompiledPoly::add_gradient(const double* q, const double* p, double* gq, double* gp,
                                double scale) const {
  const std::size_t n = dim_;
  for (std::size_t j = 0; j < re_.size(); ++j) {
    const int* nu = &freq_[2 * n * j];
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) phase += nu[i] * q[i] + nu[n + i] * p[i];
    phase *= kTwoPi;
    // d/dx_a Re(c e^{i phase}) = -2 pi nu_a (re sin + im cos)
    const double w = -kTwoPi * scale * (re_[j] * std::sin(phase) + im_[j] * std::cos(phase));
    for (std::size_t i = 0; i < n; ++i) {
      gq[i] += w * nu[i];
      gp[i] += w * nu[n + i];
    }
  }
}

void CompiledPoly::add_hessian(const double* q, const double* p, Eigen::MatrixXd& h,
                               double scale) const {
  const std::size_t n = dim_;
  for (std::size_t j = 0; j < re_.size(); ++j) {
    const int* nu = &freq_[2 * n * j];
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) phase += nu[i] * q[i] + nu[n + i] * p[i];
    phase *= kTwoPi;
    const double w =
        -kTwoPi * kTwoPi * scale * (re_[j] * std::cos(phase) - im_[j] * std::sin(phase));
    for (std::size_t a = 0; a < 2 * n; ++a) {
      if (nu[a] == 0) continue;
      for (std::size_t b = 0; b < 2 * n; ++b) h(a, b) += w * nu[a] * nu[b];
    }
  }
}

// ---------------------------------------------------------------- pointwise calculus

double evaluate(const TrigPoly& f, const PhasePoint& x) {
  require_point_dim(f, x);
  return CompiledPoly(f).value(x.q.data(), x.p.data());
}

std::vector<double> gradient_q(const TrigPoly& f, const PhasePoint& x) {
  require_point_dim(f, x);
  std::vector<double> gq(f.dim(), 0.0), gp(f.dim(), 0.0);
  CompiledPoly(f).add_gradient(x.q.data(), x.p.data(), gq.data(), gp.data());
  return gq;
}

std::vector<double> gradient_p(const TrigPoly& f, const PhasePoint& x) {
  require_point_dim(f, x);
  std::vector<double> gq(f.dim(), 0.0), gp(f.dim(), 0.0);
  CompiledPoly(f).add_gradient(x.q.data(), x.p.data(), gq.data(), gp.data());
  return gp;
}

Eigen::MatrixXd hessian(const TrigPoly& f, const PhasePoint& x) {
  require_point_dim(f, x);
  const auto n = static_cast<Eigen::Index>(2 * f.dim());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  CompiledPoly(f).add_hessian(x.q.data(), x.p.data(), h);
  return h;
}

// ---------------------------------------------------------------- Poisson bracket

TrigPoly poisson_bracket(const TrigPoly& f, const TrigPoly& g) {
  require_same_dim(f.dim(), g.dim(), "poisson_bracket");
  // For modes a e^{iA} on (m1,k1) and b e^{iB} on (m2,k2), with D = m1.k2 - m2.k1,
  // the bracket of their real parts is
  //   Re(-2 pi^2 D a b e^{i(A+B)}) + Re(2 pi^2 D a conj(b) e^{i(A-B)}).
  const double two_pi_sq = 2.0 * kPi * kPi;
  TrigPolyBuilder out(f.dim());
  for (const auto& [mf, a] : f.modes()) {
    for (const auto& [mg, b] : g.modes()) {
      const long d = dot(mf.m, mg.k) - dot(mg.m, mf.k);
      if (d == 0) continue;
      const double scale = two_pi_sq * static_cast<double>(d);
      out.add(sum_mode(mf, mg, +1), -scale * a * b);
      out.add(sum_mode(mf, mg, -1), scale * a * std::conj(b));
    }
  }
  return out.finish();
}

// ---------------------------------------------------------------- grids

std::size_t default_poly_grid(std::size_t dim) {
  if (dim == 1) return 64;
  if (dim == 2) return 32;
  return 8;
}

std::vector<double> sample_uniform(const TrigPoly& f, std::size_t points_per_axis) {
  if (points_per_axis == 0) throw InvalidArgument("grid must have at least one point per axis");
  const std::size_t axes = 2 * f.dim();
  const std::size_t grid = points_per_axis;
  const int K = f.degree();
  const std::size_t width = static_cast<std::size_t>(2 * K + 1);

  // Full (two-sided) complex Fourier coefficients on [-K,K]^{2n}.
  std::vector<std::size_t> shape(axes, width);
  std::vector<Complex> data(ipow(width, axes));
  auto flat_index = [&](const ModeIndex& mode, int sign) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < axes; ++a) {
      const int v = sign * (a < f.dim() ? mode.m[a] : mode.k[a - f.dim()]);
      idx = idx * width + static_cast<std::size_t>(v + K);
    }
    return idx;
  };
  for (const auto& [mode, c] : f.modes()) {
    if (mode.is_zero()) {
      data[flat_index(mode, 1)] += c.real();
    } else {
      data[flat_index(mode, 1)] += 0.5 * c;
      data[flat_index(mode, -1)] += 0.5 * std::conj(c);
    }
  }

  std::vector<Complex> synth(grid * width);
  for (std::size_t g = 0; g < grid; ++g) {
    for (std::size_t v = 0; v < width; ++v) {
      const double freq = static_cast<double>(static_cast<int>(v) - K);
      synth[g * width + v] = std::polar(1.0, kTwoPi * freq * static_cast<double>(g) / grid);
    }
  }
  for (std::size_t a = 0; a < axes; ++a) transform_axis(data, shape, a, synth, grid);

  std::vector<double> values(data.size());
  std::transform(data.begin(), data.end(), values.begin(), [](Complex c) { return c.real(); });
  return values;
}

double sup_norm(const TrigPoly& f, std::size_t points_per_axis) {
  if (points_per_axis == 0) points_per_axis = default_poly_grid(f.dim());
  double s = 0.0;
  for (double v : sample_uniform(f, points_per_axis)) s = std::max(s, std::abs(v));
  return s;
}

double sup_distance(const TrigPoly& f, const TrigPoly& g, std::size_t points_per_axis) {
  require_same_dim(f.dim(), g.dim(), "sup_distance");
  if (points_per_axis == 0) points_per_axis = default_poly_grid(f.dim());
  const auto a = sample_uniform(f, points_per_axis);
  const auto b = sample_uniform(g, points_per_axis);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

// ---------------------------------------------------------------- projection

TrigPoly project_from_samples(const Sampler& sampler, std::size_t dim, int degree,
                              std::size_t points_per_axis) {
  if (dim == 0) throw InvalidArgument("dimension must be >= 1");
  if (degree < 0) throw InvalidArgument("degree must be >= 0");
  const std::size_t K = static_cast<std::size_t>(degree);
  if (points_per_axis == 0) points_per_axis = 2 * K + 2;
  if (points_per_axis <= 2 * K + 1) {
    throw InvalidArgument("grid too coarse: " + std::to_string(points_per_axis) +
                          " points per axis cannot resolve degree " + std::to_string(degree));
  }
  const std::size_t grid = points_per_axis;
  const std::size_t axes = 2 * dim;
  const std::size_t width = 2 * K + 1;

  std::vector<Complex> data(ipow(grid, axes));
  PhasePoint x{std::vector<double>(dim), std::vector<double>(dim)};
  std::vector<std::size_t> idx(axes, 0);
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    std::size_t rest = flat;
    for (std::size_t a = axes; a-- > 0;) {
      idx[a] = rest % grid;
      rest /= grid;
    }
    for (std::size_t a = 0; a < dim; ++a) {
      x.q[a] = static_cast<double>(idx[a]) / grid;
      x.p[a] = static_cast<double>(idx[dim + a]) / grid;
    }
    data[flat] = sampler(x);
  }

  std::vector<Complex> analysis(width * grid);
  for (std::size_t v = 0; v < width; ++v) {
    const double freq = static_cast<double>(static_cast<long>(v) - static_cast<long>(K));
    for (std::size_t g = 0; g < grid; ++g) {
      analysis[v * grid + g] =
          std::polar(1.0 / grid, -kTwoPi * freq * static_cast<double>(g) / grid);
    }
  }
  std::vector<std::size_t> shape(axes, grid);
  for (std::size_t a = 0; a < axes; ++a) transform_axis(data, shape, a, analysis, width);

  TrigPolyBuilder out(dim);
  ModeIndex mode{std::vector<int>(dim), std::vector<int>(dim)};
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    std::size_t rest = flat;
    for (std::size_t a = axes; a-- > 0;) {
      const int v = static_cast<int>(rest % width) - degree;
      rest /= width;
      if (a < dim) {
        mode.m[a] = v;
      } else {
        mode.k[a - dim] = v;
      }
    }
    if (!mode.is_canonical()) continue;
    // One-sided amplitude: the conjugate partner carries the other half.
    out.add(mode, mode.is_zero() ? data[flat] : 2.0 * data[flat]);
  }
  return out.finish();
}

Periodization periodize(const BoxFunction& f, std::size_t dim, double half_width, int degree) {
  if (!(half_width > 0.0)) throw InvalidArgument("box half-width must be positive");
  const double period = 4.0 * half_width;
  const double flat_radius = 0.5 * half_width;
  const double seam = 2.0 * half_width;

  auto window = [&](double x) {
    return smooth_step_down((std::abs(x) - flat_radius) / (seam - flat_radius));
  };
  std::vector<double> box(2 * dim);
  Sampler sampler = [&](const PhasePoint& u) {
    double w = 1.0;
    for (std::size_t a = 0; a < dim; ++a) {
      double uq = u.q[a] >= 0.5 ? u.q[a] - 1.0 : u.q[a];
      double up = u.p[a] >= 0.5 ? u.p[a] - 1.0 : u.p[a];
      box[a] = period * uq;
      box[dim + a] = period * up;
      w *= window(box[a]) * window(box[dim + a]);
    }
    return w == 0.0 ? 0.0 : w * f(box);
  };
  const std::size_t grid = 4 * static_cast<std::size_t>(degree) + 4;
  Periodization r{project_from_samples(sampler, dim, degree, grid), period,
                  "cinf-smoothstep: flat for |x|<=h/2, zero at the seam |x|=2h, period 4h"};
  return r;
}

// ---------------------------------------------------------------- serialization

Json poly_to_json(const TrigPoly& f) {
  Json modes = Json::array();
  for (const auto& [mode, c] : f.modes()) {
    modes.push_back(Json{{"m", mode.m}, {"k", mode.k}, {"re", c.real()}, {"im", c.imag()}});
  }
  return Json{{"dim", f.dim()}, {"modes", std::move(modes)}};
}

TrigPoly poly_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ParseError("polynomial must be an object");
    const auto dim = j.at("dim").get<std::size_t>();
    if (dim == 0) throw ParseError("polynomial dim must be >= 1");
    TrigPolyBuilder b(dim);
    for (const auto& e : j.at("modes")) {
      ModeIndex mode{e.at("m").get<std::vector<int>>(), e.at("k").get<std::vector<int>>()};
      if (mode.m.size() != dim || mode.k.size() != dim) {
        throw ParseError("mode vector length does not match dim " + std::to_string(dim));
      }
      b.add(mode, Complex(e.at("re").get<double>(), e.value("im", 0.0)));
    }
    return b.finish();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed polynomial: ") + e.what());
  }
}

}  // namespace hamshear
