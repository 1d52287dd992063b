#ifndef EPITRACE_H
#define EPITRACE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum EtStatus {
  ET_STATUS_OK = 0,
  ET_STATUS_NULL_POINTER = 1,
  ET_STATUS_INVALID_ARGUMENT = 2,
  ET_STATUS_DIMENSION_MISMATCH = 3,
  ET_STATUS_HYPOTHESIS = 4,
  ET_STATUS_NOT_NORMALIZABLE = 5,
  ET_STATUS_DOMAIN_REJECTED = 6,
  ET_STATUS_PARSE = 7,
  ET_STATUS_IO = 8,
  ET_STATUS_PANIC = 9,
} EtStatus;

// An epigraph domain {x_n ≥ φ(x₁)}.
typedef struct EtDomain EtDomain;

// A grid function with values in ℝ ∪ {+∞}.
typedef struct EtGrid EtGrid;

// Result of a discrete gap evaluation.
typedef struct EtGap {
  double lhs;
  double rhs;
  double gap;
  double error_estimate;
} EtGap;

// Sharp constants for one (n, p, a) on one domain, Euclidean norm.
typedef struct EtConstants {
  double c;
  double a;
  double b;
  double d;
  double u;
  double v;
  double theta;
  double q_trace;
  double d_npa;
} EtConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the next call.
const char *et_last_error(void);

// Library version as a static NUL-terminated string.
const char *et_version(void);

// Builds a grid on the box [lo, hi] with `res` nodes per axis (row-major values, last
// axis fastest). Values may be +INFINITY; NaN and −∞ are rejected.
//
// # Safety
// `lo`, `hi`, `res` point to `dim` elements, `values` to `len` elements, `out` is writable.
enum EtStatus et_grid_new(uintptr_t dim,
                          const double *lo,
                          const double *hi,
                          const uintptr_t *res,
                          const double *values,
                          uintptr_t len,
                          struct EtGrid **out_grid);

// # Safety
// `grid` is NULL or a handle from this library that has not been freed.
void et_grid_free(struct EtGrid *grid);

// Number of nodes, or 0 for NULL.
//
// # Safety
// `grid` is NULL or a live handle.
uintptr_t et_grid_len(const struct EtGrid *grid);

// Copies the node values into `buf`, which must hold `et_grid_len` doubles.
//
// # Safety
// `grid` is a live handle and `buf` has room for `len` doubles.
enum EtStatus et_grid_values(const struct EtGrid *grid, double *buf, uintptr_t len);

// Discrete Legendre transform on the dual box [dual_lo, dual_hi] with `dual_res` nodes.
//
// # Safety
// `grid` is a live handle; the dual arrays have one entry per dimension.
enum EtStatus et_legendre(const struct EtGrid *grid,
                          const double *dual_lo,
                          const double *dual_hi,
                          const uintptr_t *dual_res,
                          struct EtGrid **out_grid);

// Hopf–Lax operator Q_h^W(g) on the grid of g.
//
// # Safety
// `g` and `w` are live handles.
enum EtStatus et_hopflax(const struct EtGrid *g,
                         const struct EtGrid *w,
                         double h,
                         struct EtGrid **out_grid);

// Domain from a kind name (`halfspace`, `cone`, `paraboloid`, `affine_max`) and its
// parameters, as in the config format.
//
// # Safety
// `kind` is a NUL-terminated string and `params` points to `nparams` doubles.
enum EtStatus et_domain_new(const char *kind,
                            uintptr_t n,
                            const double *params,
                            uintptr_t nparams,
                            struct EtDomain **out_domain);

// # Safety
// `domain` is NULL or a live handle.
void et_domain_free(struct EtDomain *domain);

// Whether x lies in Ω + h·e.
//
// # Safety
// `domain` is a live handle and `x` has `len` entries.
enum EtStatus et_domain_contains(const struct EtDomain *domain,
                                 const double *x,
                                 uintptr_t len,
                                 double h,
                                 bool *inside);

// Whether x lies in B_h, the domain of Q_h on a general convex epigraph.
//
// # Safety
// `domain` is a live handle and `x` has `len` entries.
enum EtStatus et_domain_bh_membership(const struct EtDomain *domain,
                                      const double *x,
                                      uintptr_t len,
                                      double h,
                                      bool *inside);

// Discrete gap for g and W on grids with odd resolutions, without a tail bound.
//
// # Safety
// `g` and `w` are live handles and `result` is writable.
enum EtStatus et_bbl_gap(const struct EtGrid *g,
                         const struct EtGrid *w,
                         uintptr_t n,
                         double a,
                         double p,
                         double h,
                         struct EtGap *result);

// Sharp constants on `domain` in the Euclidean norm.
//
// # Safety
// `domain` is a live handle and `result` is writable.
enum EtStatus et_sharp_constants(const struct EtDomain *domain,
                                 double a,
                                 double p,
                                 struct EtConstants *result);

// Parses and runs a JSON experiment config given as text. The report is returned as a
// JSON string to release with `et_string_free`; `passed` receives the overall outcome.
//
// # Safety
// `config_json` is a NUL-terminated string; the out pointers are writable.
enum EtStatus et_run_config(const char *config_json, char **report_json, bool *passed);

// # Safety
// `s` is NULL or a string returned by this library that has not been freed.
void et_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* EPITRACE_H */
