#ifndef HAMSHEAR_HAMSHEAR_H
#define HAMSHEAR_HAMSHEAR_H

/* C interface to the hamshear compiler.
 *
 * Handles are opaque. Every call returns an hs_status; on failure the message
 * is available from hs_last_error() (thread-local, valid until the next call
 * on the same thread). Strings returned through char** are owned by the
 * caller and released with hs_string_free. Structured text is JSON.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(HAMSHEAR_BUILDING_LIBRARY)
#    define HS_API __declspec(dllexport)
#  else
#    define HS_API __declspec(dllimport)
#  endif
#else
#  define HS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hs_status {
  HS_OK = 0,
  HS_TARGET_NOT_MET = 1,  /* word produced, error above target (or cap hit) */
  HS_ERR_INVALID_INPUT = 2,
  HS_ERR_DIMENSION = 3,
  HS_ERR_IO = 4,
  HS_ERR_INTEGRATION = 5,
  HS_ERR_INTERNAL = 6
} hs_status;

typedef struct hs_poly hs_poly;
typedef struct hs_word hs_word;

typedef struct hs_options {
  size_t grid_per_axis; /* 0 = default (64 for n=1, 20 for n=2) */
  double tol;           /* reference integrator tolerance */
  size_t cap_length;    /* 0 = problem file value */
  int has_seed;         /* nonzero: random error grid from seed */
  uint64_t seed;
  int has_time;         /* nonzero: override the problem's flow time */
  double time;
  size_t inner_steps;   /* inner budget for ladders */
} hs_options;

HS_API const char* hs_version(void);
HS_API const char* hs_last_error(void);
HS_API void hs_string_free(char* s);
HS_API void hs_options_default(hs_options* opts);

/* polynomials */
HS_API hs_status hs_poly_from_json(const char* json, hs_poly** out);
HS_API hs_status hs_poly_to_json(const hs_poly* f, char** out);
HS_API size_t hs_poly_dim(const hs_poly* f);
HS_API hs_status hs_poly_evaluate(const hs_poly* f, const double* q, const double* p, double* out);
/* grad_q and grad_p receive n values each */
HS_API hs_status hs_poly_gradient(const hs_poly* f, const double* q, const double* p, double* grad_q,
                                  double* grad_p);
HS_API hs_status hs_poly_bracket(const hs_poly* f, const hs_poly* g, hs_poly** out);
HS_API void hs_poly_free(hs_poly* f);

/* shear words */
HS_API hs_status hs_word_from_json(const char* json, hs_word** out);
HS_API hs_status hs_word_to_json(const hs_word* w, char** out);
HS_API hs_status hs_word_metrics(const hs_word* w, char** out);
HS_API size_t hs_word_length(const hs_word* w);
HS_API size_t hs_word_dim(const hs_word* w);
/* count points, point i at q[i*n..], p[i*n..], updated in place */
HS_API hs_status hs_word_apply(const hs_word* w, double* q, double* p, size_t count);
/* 2n x 2n row-major, (q, p) ordering */
HS_API hs_status hs_word_jacobian(const hs_word* w, const double* q, const double* p, double* out);
HS_API hs_status hs_word_invert(const hs_word* w, hs_word** out);
HS_API void hs_word_free(hs_word* w);

/* pipeline: problem files are JSON text */
HS_API hs_status hs_compile(const char* problem_json, const hs_options* opts, hs_word** word,
                            char** report);
HS_API hs_status hs_verify(const hs_word* w, const char* problem_json, const hs_options* opts,
                           char** report);
/* scheme: "trotter", "commutator", "slicing", "end_to_end"; csv ends with a "#fit {...}" line */
HS_API hs_status hs_ladder(const char* problem_json, const char* scheme, const size_t* steps,
                           size_t n_steps, const hs_options* opts, char** csv);
HS_API hs_status hs_decompose_problem(const char* problem_json, char** out);
/* newline-separated preset names */
HS_API hs_status hs_preset_names(char** out);

#ifdef __cplusplus
}
#endif

#endif
