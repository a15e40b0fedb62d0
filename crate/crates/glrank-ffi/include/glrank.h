#ifndef GLRANK_H
#define GLRANK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum GlrankStatus {
  Ok = 0,
  NullPointer = 1,
  InvalidArgument = 2,
  ParseError = 3,
  BudgetExceeded = 4,
  NumericError = 5,
  Panic = 6,
} GlrankStatus;

/**
 * Existence outcome for the numeric Gaussian check.
 */
typedef enum GlrankGaussianOutcome {
  Exists = 0,
  NotExists = 1,
  Inconclusive = 2,
} GlrankGaussianOutcome;

/**
 * Estimator objective selector.
 */
typedef enum GlrankMethod {
  Concord = 0,
  Conspace = 1,
  Gaussian = 2,
} GlrankMethod;

/**
 * Fit termination status.
 */
typedef enum GlrankFitStatus {
  Converged = 0,
  Diverged = 1,
  Maxiter = 2,
} GlrankFitStatus;

/**
 * Opaque graph handle.
 */
typedef struct GlrankGraph GlrankGraph;

/**
 * Opaque existence verdict handle (exact pseudo-likelihood check).
 */
typedef struct GlrankVerdict GlrankVerdict;

/**
 * Randomized rank bound estimates; the chain is
 * kappa*+1 <= gamma <= rho <= l <= delta+1.
 */
typedef struct GlrankRankBounds {
  uintptr_t kappa_star_plus1;
  uintptr_t gaussian_rank_estimate;
  uintptr_t weak_rank_estimate;
  uintptr_t gcr;
  uintptr_t degeneracy_plus1;
  uintptr_t rbar;
} GlrankRankBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message for this thread into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null with `len` 0.
 */
uintptr_t glrank_last_error(char *buf, uintptr_t len);

/**
 * Parse an edge-list graph (`p <count>` then `e <i> <j>` lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum GlrankStatus glrank_graph_parse(const char *text, struct GlrankGraph **out);

/**
 * Free a graph handle. Null is a no-op.
 *
 * # Safety
 * `g` must come from `glrank_graph_parse` and not be freed twice.
 */
void glrank_graph_free(struct GlrankGraph *g);

/**
 * Vertex count of a graph handle; 0 on null.
 *
 * # Safety
 * `g` must be a live graph handle or null.
 */
uintptr_t glrank_graph_vertex_count(const struct GlrankGraph *g);

/**
 * Exact pseudo-likelihood existence check of a dense row-major p*p
 * symmetric PSD matrix against the graph's pattern.
 *
 * # Safety
 * `a` must point to `p*p` doubles for the graph's `p`; `out` writable.
 */
enum GlrankStatus glrank_certify_pseudo(const struct GlrankGraph *g,
                                        const double *a,
                                        struct GlrankVerdict **out);

/**
 * Free a verdict handle. Null is a no-op.
 *
 * # Safety
 * `v` must come from `glrank_certify_pseudo` and not be freed twice.
 */
void glrank_verdict_free(struct GlrankVerdict *v);

/**
 * Verdict accessors; all return 0 on a null handle.
 *
 * # Safety
 * `v` must be a live verdict handle or null.
 */
int glrank_verdict_exists(const struct GlrankVerdict *v);

/**
 * # Safety
 * `v` must be a live verdict handle or null.
 */
int glrank_verdict_unique(const struct GlrankVerdict *v);

/**
 * # Safety
 * `v` must be a live verdict handle or null.
 */
uintptr_t glrank_verdict_kernel_dim(const struct GlrankVerdict *v);

/**
 * # Safety
 * `v` must be a live verdict handle or null.
 */
uintptr_t glrank_verdict_zero_diag_dim(const struct GlrankVerdict *v);

/**
 * Numeric Gaussian existence check (alternating projections).
 *
 * # Safety
 * `a` must point to `p*p` doubles; `outcome` and `residual` writable.
 */
enum GlrankStatus glrank_check_gaussian(const struct GlrankGraph *g,
                                        const double *a,
                                        double tol,
                                        uintptr_t max_iter,
                                        enum GlrankGaussianOutcome *outcome,
                                        double *residual);

/**
 * Fit an estimator; writes the fitted matrix into `omega` (row-major
 * p*p) and the termination data into the out parameters.
 *
 * # Safety
 * `a` and `omega` must point to `p*p` doubles; the scalar out
 * parameters must be writable.
 */
enum GlrankStatus glrank_fit(const struct GlrankGraph *g,
                             const double *a,
                             enum GlrankMethod method,
                             double tol,
                             uintptr_t max_iter,
                             double *omega,
                             enum GlrankFitStatus *status,
                             double *objective,
                             uintptr_t *iterations);

/**
 * Randomized weak rank estimates with the exact bound endpoints.
 *
 * # Safety
 * `out` must point to a writable `GlrankRankBounds`.
 */
enum GlrankStatus glrank_estimate_weak_ranks(const struct GlrankGraph *g,
                                             uintptr_t trials,
                                             uint64_t seed,
                                             struct GlrankRankBounds *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLRANK_H */
