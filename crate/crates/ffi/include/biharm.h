/* C interface for the biharm finite-difference solver. */

#ifndef BIHARM_H
#define BIHARM_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirroring the CLI exit codes.
 */
typedef enum BiharmStatus {
  Ok = 0,
  InvalidArgument = 1,
  NumericalFailure = 2,
  NullPointer = 3,
} BiharmStatus;

/**
 * Opaque grid handle.
 */
typedef struct BiharmGrid BiharmGrid;

/**
 * Summary of one solve.
 */
typedef struct BiharmSolveStats {
  uintptr_t iterations;
  double residual;
  double error_h2h;
} BiharmSolveStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *biharm_last_error(void);

/**
 * Create a grid for the unit cube in dimension `n` with spacing `1/m`.
 *
 * # Safety
 * `out` must be a valid pointer to a grid-handle slot.
 */
enum BiharmStatus biharm_grid_new(uintptr_t n, int64_t m, struct BiharmGrid **out);

/**
 * # Safety
 * `grid` must come from `biharm_grid_new` and not have been freed.
 */
void biharm_grid_free(struct BiharmGrid *grid);

/**
 * Number of interior unknowns of a grid.
 *
 * # Safety
 * `grid` must be a live handle from `biharm_grid_new`.
 */
uintptr_t biharm_interior_len(const struct BiharmGrid *grid);

/**
 * Solve one manufactured case on a grid. When `out_values` is non-null it
 * receives the interior solution in lexicographic order (`out_len` must be
 * `biharm_interior_len(grid)`).
 *
 * # Safety
 * `grid` must be live; `case_name`/`scheme` must be NUL-terminated strings;
 * `out_values`, when non-null, must point to `out_len` writable doubles;
 * `stats`, when non-null, must point to a writable stats record.
 */
enum BiharmStatus biharm_solve_case(const struct BiharmGrid *grid,
                                    const char *case_name,
                                    const char *scheme,
                                    double tol,
                                    uintptr_t maxit,
                                    double *out_values,
                                    uintptr_t out_len,
                                    struct BiharmSolveStats *stats);

/**
 * Run a convergence study and return the report serialized as JSON
 * (`format` 0) or CSV (`format` 1). Free the result with
 * `biharm_string_free`.
 *
 * # Safety
 * String arguments must be NUL-terminated; `m_list` must point to
 * `m_count` readable values; `out` must be a writable pointer slot.
 */
enum BiharmStatus biharm_study(uintptr_t dim,
                               const char *case_name,
                               const char *scheme,
                               const int64_t *m_list,
                               uintptr_t m_count,
                               double tol,
                               int format,
                               char **out);

/**
 * Run the identity probe suite; returns the worst residual-to-threshold
 * ratio through `worst` (at most 1.0 means every probe passed).
 *
 * # Safety
 * `worst`, when non-null, must point to a writable double.
 */
enum BiharmStatus biharm_verify(uintptr_t dim, int64_t m, uint64_t seed, double *worst);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void biharm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIHARM_H */
