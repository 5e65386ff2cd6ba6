/* C interface to the perclab fractal percolation laboratory. */

#ifndef PERCLAB_H
#define PERCLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum PerclabStatus {
  PerclabStatus_Ok = 0,
  PerclabStatus_InvalidArgument = 1,
  PerclabStatus_NullPointer = 2,
  /**
   * honest negative result (no certificate, empty shadow)
   */
  PerclabStatus_NotFound = 3,
  PerclabStatus_ResourceExceeded = 4,
  PerclabStatus_DomainError = 5,
} PerclabStatus;

/**
 * Opaque retention-probability matrix.
 */
typedef struct PerclabMatrix PerclabMatrix;

/**
 * Opaque sampled realization.
 */
typedef struct PerclabTree PerclabTree;

/**
 * Certificate data in plain C layout.
 */
typedef struct PerclabCertificate {
  double alpha;
  double i1_lo;
  double i1_hi;
  double i2_lo;
  double i2_hi;
  uint32_t r;
  double min_value;
  double margin;
} PerclabCertificate;

/**
 * Static version string; do not free.
 */
const char *perclab_version(void);

/**
 * Creates a uniform M x M matrix. On success writes a handle to `out`.
 */
enum PerclabStatus perclab_matrix_new_uniform(uint32_t m, double p, struct PerclabMatrix **out);

/**
 * Creates a matrix from `m * m` row-major entries.
 *
 * # Safety
 * `entries` must point to at least `len` readable doubles.
 */
enum PerclabStatus perclab_matrix_new(uint32_t m,
                                      const double *entries,
                                      uintptr_t len,
                                      struct PerclabMatrix **out);

/**
 * # Safety
 * `matrix` must come from a `perclab_matrix_new*` call and not be freed twice.
 */
void perclab_matrix_free(struct PerclabMatrix *matrix);

/**
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum PerclabStatus perclab_matrix_sum_total(const struct PerclabMatrix *matrix, double *out);

/**
 * Smallest fixed point of the offspring generating function.
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum PerclabStatus perclab_extinction_probability(const struct PerclabMatrix *matrix,
                                                  double tol,
                                                  double *out);

/**
 * `log(sum p) / log M`; fails outside the supercritical regime.
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum PerclabStatus perclab_theoretical_dimension(const struct PerclabMatrix *matrix, double *out);

/**
 * Samples a realization to `depth` with the given seed.
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum PerclabStatus perclab_tree_sample(const struct PerclabMatrix *matrix,
                                       uint32_t depth,
                                       uint64_t seed,
                                       struct PerclabTree **out);

/**
 * # Safety
 * `tree` must come from `perclab_tree_sample` and not be freed twice.
 */
void perclab_tree_free(struct PerclabTree *tree);

/**
 * Number of retained squares at level `n`.
 *
 * # Safety
 * `tree` must be a live handle; `out` must be writable.
 */
enum PerclabStatus perclab_tree_level_count(const struct PerclabTree *tree,
                                            uint32_t n,
                                            uint64_t *out);

/**
 * Whether the deepest sampled level is nonempty.
 *
 * # Safety
 * `tree` must be a live handle; `out` must be writable.
 */
enum PerclabStatus perclab_tree_survives(const struct PerclabTree *tree, bool *out);

/**
 * Longest interval of the level-`n` shadow in direction `alpha`; `NotFound`
 * when the shadow is empty.
 *
 * # Safety
 * `tree` must be a live handle; `out_lo` and `out_hi` must be writable.
 */
enum PerclabStatus perclab_longest_shadow(const struct PerclabTree *tree,
                                          uint32_t n,
                                          double alpha,
                                          double *out_lo,
                                          double *out_hi);

/**
 * Certifies the covering condition at one angle by exact sweep. `Ok` fills
 * the certificate; `NotFound` is the honest negative; `ResourceExceeded`
 * means the code budget stopped the search before `r_max`.
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum PerclabStatus perclab_certify(const struct PerclabMatrix *matrix,
                                   double alpha,
                                   uint32_t r_max,
                                   uint64_t budget,
                                   struct PerclabCertificate *out);

#endif /* PERCLAB_H */
