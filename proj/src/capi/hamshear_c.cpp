#include "hamshear/hamshear.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "core/errors.hpp"
#include "core/pipeline.hpp"

struct hs_poly {
  hamshear::TrigPoly value;
};

struct hs_word {
  hamshear::ShearWord value;
};

namespace {

thread_local std::string g_last_error;

hs_status fail(hs_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <class F>
hs_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const hamshear::DimensionError& e) {
    return fail(HS_ERR_DIMENSION, e.what());
  } catch (const hamshear::ParseError& e) {
    return fail(HS_ERR_INVALID_INPUT, e.what());
  } catch (const hamshear::InvalidArgument& e) {
    return fail(HS_ERR_INVALID_INPUT, e.what());
  } catch (const hamshear::IntegrationError& e) {
    return fail(HS_ERR_INTEGRATION, e.what());
  } catch (const hamshear::Json::exception& e) {
    return fail(HS_ERR_INVALID_INPUT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HS_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

hamshear::Json parse(const char* text) {
  if (!text) throw hamshear::InvalidArgument("null input text");
  try {
    return hamshear::Json::parse(text);
  } catch (const hamshear::Json::parse_error& e) {
    throw hamshear::ParseError(std::string("invalid JSON: ") + e.what());
  }
}

hamshear::RunOptions to_options(const hs_options* o) {
  hamshear::RunOptions r;
  if (!o) return r;
  r.grid = o->grid_per_axis;
  r.tol = o->tol;
  if (o->cap_length != 0) r.cap_length = o->cap_length;
  if (o->has_seed) r.seed = o->seed;
  if (o->has_time) r.time = o->time;
  r.inner_steps = o->inner_steps;
  return r;
}

template <class T>
void require(const T* ptr, const char* what) {
  if (!ptr) throw hamshear::InvalidArgument(std::string("null argument: ") + what);
}

hamshear::PhasePoint point(std::size_t n, const double* q, const double* p) {
  hamshear::PhasePoint x;
  x.q.assign(q, q + n);
  x.p.assign(p, p + n);
  return x;
}

}  // namespace

extern "C" {

const char* hs_version(void) { return "0.1.0"; }

const char* hs_last_error(void) { return g_last_error.c_str(); }

void hs_string_free(char* s) { std::free(s); }

void hs_options_default(hs_options* opts) {
  if (!opts) return;
  const hamshear::RunOptions d;
  opts->grid_per_axis = d.grid;
  opts->tol = d.tol;
  opts->cap_length = 0;
  opts->has_seed = 0;
  opts->seed = 0;
  opts->has_time = 0;
  opts->time = 1.0;
  opts->inner_steps = d.inner_steps;
}

// ---------------------------------------------------------------- polynomials

hs_status hs_poly_from_json(const char* json, hs_poly** out) {
  return guarded([&] {
    require(out, "out");
    *out = new hs_poly{hamshear::poly_from_json(parse(json))};
    return HS_OK;
  });
}

hs_status hs_poly_to_json(const hs_poly* f, char** out) {
  return guarded([&] {
    require(f, "poly");
    require(out, "out");
    *out = dup_string(hamshear::poly_to_json(f->value).dump());
    return HS_OK;
  });
}

size_t hs_poly_dim(const hs_poly* f) { return f ? f->value.dim() : 0; }

hs_status hs_poly_evaluate(const hs_poly* f, const double* q, const double* p, double* out) {
  return guarded([&] {
    require(f, "poly");
    require(q, "q");
    require(p, "p");
    require(out, "out");
    *out = hamshear::evaluate(f->value, point(f->value.dim(), q, p));
    return HS_OK;
  });
}

hs_status hs_poly_gradient(const hs_poly* f, const double* q, const double* p, double* grad_q,
                           double* grad_p) {
  return guarded([&] {
    require(f, "poly");
    require(q, "q");
    require(p, "p");
    require(grad_q, "grad_q");
    require(grad_p, "grad_p");
    const auto x = point(f->value.dim(), q, p);
    const auto gq = hamshear::gradient_q(f->value, x);
    const auto gp = hamshear::gradient_p(f->value, x);
    std::copy(gq.begin(), gq.end(), grad_q);
    std::copy(gp.begin(), gp.end(), grad_p);
    return HS_OK;
  });
}

hs_status hs_poly_bracket(const hs_poly* f, const hs_poly* g, hs_poly** out) {
  return guarded([&] {
    require(f, "f");
    require(g, "g");
    require(out, "out");
    *out = new hs_poly{hamshear::poisson_bracket(f->value, g->value)};
    return HS_OK;
  });
}

void hs_poly_free(hs_poly* f) { delete f; }

// ---------------------------------------------------------------- words

hs_status hs_word_from_json(const char* json, hs_word** out) {
  return guarded([&] {
    require(out, "out");
    *out = new hs_word{hamshear::word_from_json(parse(json))};
    return HS_OK;
  });
}

hs_status hs_word_to_json(const hs_word* w, char** out) {
  return guarded([&] {
    require(w, "word");
    require(out, "out");
    *out = dup_string(hamshear::word_to_json(w->value).dump());
    return HS_OK;
  });
}

hs_status hs_word_metrics(const hs_word* w, char** out) {
  return guarded([&] {
    require(w, "word");
    require(out, "out");
    *out = dup_string(hamshear::word_metrics_json(w->value).dump(2));
    return HS_OK;
  });
}

size_t hs_word_length(const hs_word* w) { return w ? w->value.size() : 0; }

size_t hs_word_dim(const hs_word* w) { return w ? w->value.dim() : 0; }

hs_status hs_word_apply(const hs_word* w, double* q, double* p, size_t count) {
  return guarded([&] {
    require(w, "word");
    if (count == 0) return HS_OK;
    require(q, "q");
    require(p, "p");
    const std::size_t n = w->value.dim();
    hamshear::PointSet pts(n, count);
    std::copy(q, q + n * count, pts.q.begin());
    std::copy(p, p + n * count, pts.p.begin());
    hamshear::apply_word(w->value, pts);
    std::copy(pts.q.begin(), pts.q.end(), q);
    std::copy(pts.p.begin(), pts.p.end(), p);
    return HS_OK;
  });
}

hs_status hs_word_jacobian(const hs_word* w, const double* q, const double* p, double* out) {
  return guarded([&] {
    require(w, "word");
    require(q, "q");
    require(p, "p");
    require(out, "out");
    const std::size_t n = w->value.dim();
    const Eigen::MatrixXd J = hamshear::word_jacobian(w->value, point(n, q, p));
    for (Eigen::Index r = 0; r < J.rows(); ++r) {
      for (Eigen::Index c = 0; c < J.cols(); ++c) out[r * J.cols() + c] = J(r, c);
    }
    return HS_OK;
  });
}

hs_status hs_word_invert(const hs_word* w, hs_word** out) {
  return guarded([&] {
    require(w, "word");
    require(out, "out");
    *out = new hs_word{hamshear::invert_word(w->value)};
    return HS_OK;
  });
}

void hs_word_free(hs_word* w) { delete w; }

// ---------------------------------------------------------------- pipeline

hs_status hs_compile(const char* problem_json, const hs_options* opts, hs_word** word, char** report) {
  return guarded([&] {
    require(word, "word");
    require(report, "report");
    const hamshear::Problem p = hamshear::problem_from_json(parse(problem_json));
    hamshear::CompileResult r = hamshear::compile(p, to_options(opts));
    *report = dup_string(r.report.dump(2));
    *word = new hs_word{std::move(r.word)};
    return r.target_met ? HS_OK : HS_TARGET_NOT_MET;
  });
}

hs_status hs_verify(const hs_word* w, const char* problem_json, const hs_options* opts, char** report) {
  return guarded([&] {
    require(w, "word");
    require(report, "report");
    const hamshear::Problem p = hamshear::problem_from_json(parse(problem_json));
    const hamshear::VerifyResult r = hamshear::verify(w->value, p, to_options(opts));
    *report = dup_string(r.report.dump(2));
    return r.target_met ? HS_OK : HS_TARGET_NOT_MET;
  });
}

hs_status hs_ladder(const char* problem_json, const char* scheme, const size_t* steps, size_t n_steps,
                    const hs_options* opts, char** csv) {
  return guarded([&] {
    require(scheme, "scheme");
    require(csv, "csv");
    if (n_steps > 0) require(steps, "steps");
    const hamshear::Problem p = hamshear::problem_from_json(parse(problem_json));
    const std::vector<std::size_t> list(steps, steps + n_steps);
    const auto r = hamshear::ladder(p, hamshear::parse_ladder_scheme(scheme), list, to_options(opts));
    *csv = dup_string(r.csv());
    return HS_OK;
  });
}

hs_status hs_decompose_problem(const char* problem_json, char** out) {
  return guarded([&] {
    require(out, "out");
    const hamshear::Problem p = hamshear::problem_from_json(parse(problem_json));
    *out = dup_string(hamshear::decompose_problem(p).dump(2));
    return HS_OK;
  });
}

hs_status hs_preset_names(char** out) {
  return guarded([&] {
    require(out, "out");
    std::string s;
    for (const auto& n : hamshear::preset_names()) s += n + "\n";
    *out = dup_string(s);
    return HS_OK;
  });
}

}  // extern "C"
