#ifndef QOVERFLOW_H
#define QOVERFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QoStatus {
  QO_STATUS_OK = 0,
  QO_STATUS_NULL_POINTER = 1,
  QO_STATUS_INVALID_ARGUMENT = 2,
  QO_STATUS_ASSUMPTION = 3,
  QO_STATUS_NUMERICAL = 4,
  QO_STATUS_PANIC = 5,
} QoStatus;

typedef enum QoMethod {
  QO_METHOD_AUTO = 0,
  QO_METHOD_GAUSS_SEIDEL = 1,
  QO_METHOD_DIRECT = 2,
} QoMethod;

// Opaque fitted approximation.
typedef struct QoApprox QoApprox;

// Opaque lattice solution on `A_n`.
typedef struct QoGrid QoGrid;

// Opaque rate parameters.
typedef struct QoParams QoParams;

typedef struct QoAssumptions {
  double rho1;
  double rho2;
  double r;
  bool stable;
  bool ordered;
  bool distinct_utilizations;
  bool conjugate_inside;
  bool geometric_case;
} QoAssumptions;

typedef struct QoComplex {
  double re;
  double im;
} QoComplex;

typedef struct QoRootPair {
  struct QoComplex beta1;
  struct QoComplex beta2;
  struct QoComplex discriminant;
} QoRootPair;

typedef struct QoMcEstimate {
  double mean;
  double half_width_95;
  uint64_t trials;
  uint64_t hits;
  uint64_t seed;
  uint64_t truncated_paths;
} QoMcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Valid until the next
// failing call on the same thread; never null.
const char *qo_last_error(void);

// Creates parameters; the rates must be positive and sum to 1.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum QoStatus qo_params_new(double lambda1,
                            double lambda2,
                            double mu1,
                            double mu2,
                            struct QoParams **out);

// # Safety
// `p` must be null or a handle from `qo_params_new` not yet freed.
void qo_params_free(struct QoParams *p);

// Fills `out` with the derived rates and assumption flags.
//
// Returns `QO_STATUS_ASSUMPTION` when a flag required for the harmonic
// construction fails; `out` is filled either way.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_params_validate(const struct QoParams *p, struct QoAssumptions *out);

// Both roots in `beta` of the characteristic equation at `alpha`.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_betas_of_alpha(const struct QoParams *p,
                                double alpha_re,
                                double alpha_im,
                                struct QoRootPair *out);

// Builds `h^{a,0}`; `c8` (may be null) receives the upper sandwich constant.
//
// # Safety
// `p` and `out` must be valid; `c8` may be null.
enum QoStatus qo_build_h_a0(const struct QoParams *p, struct QoApprox **out, double *c8);

// Builds `h^{a,K}` with `K` extra alpha points on a circle of `radius`.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_build_h_ak(const struct QoParams *p,
                            size_t k,
                            double radius,
                            struct QoApprox **out);

// Evaluates the approximation at the Y-picture point `(y1, y2)`, `y2 >= 0`.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_approx_eval(const struct QoApprox *a, int64_t y1, int64_t y2, double *out);

// The certificate `c*` and the diagonal index where it is attained.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_approx_cstar(const struct QoApprox *a, double *cstar, int64_t *argmax);

// Number of fitted coefficients; `c_0` multiplies `h_rho1`.
//
// # Safety
// `a` must be a live handle.
size_t qo_approx_coefficient_count(const struct QoApprox *a);

// Coefficient `index`.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_approx_coefficient(const struct QoApprox *a, size_t index, struct QoComplex *out);

// # Safety
// `a` must be null or a live handle.
void qo_approx_free(struct QoApprox *a);

// Solves `P_x(tau_n < tau_0)` on `A_n`.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_solve_pn(const struct QoParams *p,
                          size_t n,
                          enum QoMethod method,
                          struct QoGrid **out);

// Value at `(x1, x2)` in `A_n`.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_grid_value(const struct QoGrid *g, int64_t x1, int64_t x2, double *out);

// # Safety
// `g` must be null or a live handle.
void qo_grid_free(struct QoGrid *g);

// `P_y(tau < inf)` from the truncated wedge, converged to `rtol`.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_solve_py_inf(const struct QoParams *p,
                              int64_t y1,
                              int64_t y2,
                              double rtol,
                              double *out);

// Monte Carlo estimate of `P_x(tau_n < tau_0)`.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_mc_pn(const struct QoParams *p,
                       int64_t x1,
                       int64_t x2,
                       int64_t n,
                       uint64_t trials,
                       uint64_t seed,
                       struct QoMcEstimate *out);

// Monte Carlo estimate of `P_y(tau < inf)`.
//
// # Safety
// Pointers must be valid.
enum QoStatus qo_mc_py_inf(const struct QoParams *p,
                           int64_t y1,
                           int64_t y2,
                           uint64_t trials,
                           uint64_t max_steps,
                           uint64_t seed,
                           struct QoMcEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QOVERFLOW_H */
