#ifndef OVERLAP_ENTANGLE_H
#define OVERLAP_ENTANGLE_H

/* Generated by cbindgen; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum OeStatus {
  OE_STATUS_OK = 0,
  OE_STATUS_NULL_POINTER = 1,
  OE_STATUS_INVALID_INPUT = 2,
  OE_STATUS_DIMENSION_MISMATCH = 3,
  OE_STATUS_GRAM_NOT_PSD = 4,
  OE_STATUS_POSTSELECTION_IMPOSSIBLE = 5,
  OE_STATUS_UNSUPPORTED = 6,
  OE_STATUS_INVALID_DENSITY_MATRIX = 7,
  OE_STATUS_PANIC = 99,
} OeStatus;

typedef enum OeVerdict {
  OE_VERDICT_GENUINE_GHZ_WITNESSED = 0,
  OE_VERDICT_GENUINE_W_WITNESSED = 1,
  OE_VERDICT_WITNESS_INCONCLUSIVE = 2,
} OeVerdict;

/**
 * Opaque normalized density matrix.
 */
typedef struct OeDensity OeDensity;

/**
 * Opaque Gram matrix of the particles' internal states.
 */
typedef struct OeGram OeGram;

/**
 * Opaque linear transformation (amplitudes and spin assignments).
 */
typedef struct OeSpec OeSpec;

typedef struct OeClassification {
  double fidelity_ghz;
  double fidelity_w_max;
  /**
   * Radians, wrapped to (-pi, pi].
   */
  double phi1;
  double phi2;
  bool ghz_witness_passed;
  bool w_witness_passed;
  double offdiag_norm;
  enum OeVerdict verdict;
} OeClassification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *oe_version(void);

/**
 * Message for the most recent failure on this thread, or NULL.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *oe_last_error_message(void);

/**
 * Balanced GHZ transformation (every amplitude 1/sqrt 2).
 */
enum OeStatus oe_spec_ghz_balanced(struct OeSpec **out);

/**
 * GHZ transformation from six amplitudes ordered
 * alpha1, alpha2, beta2, beta3, gamma1, gamma3.
 *
 * # Safety
 * `re` must point to 6 doubles; `im` is NULL or points to 6 doubles.
 */
enum OeStatus oe_spec_ghz(const double *re, const double *im, struct OeSpec **out);

/**
 * W transformation from a 3x3 row-major tritter matrix.
 *
 * # Safety
 * `re` must point to 9 doubles; `im` is NULL or points to 9 doubles.
 */
enum OeStatus oe_spec_w(const double *re, const double *im, struct OeSpec **out);

/**
 * W transformation through the balanced all-positive tritter.
 */
enum OeStatus oe_spec_w_balanced(struct OeSpec **out);

/**
 * Arbitrary transformation of `particles` particles onto `modes` detectors.
 * `spins` holds one entry per amplitude: 0 down, 1 up, -1 unused
 * (required exactly where the amplitude is zero).
 *
 * # Safety
 * `re` and `spins` must point to `particles * modes` elements; `im` is NULL
 * or the same length.
 */
enum OeStatus oe_spec_custom(size_t particles,
                             size_t modes,
                             const double *re,
                             const double *im,
                             const int8_t *spins,
                             struct OeSpec **out);

/**
 * # Safety
 * The handle is NULL (yields 0) or live.
 */
size_t oe_spec_num_particles(const struct OeSpec *spec);

/**
 * # Safety
 * The handle is NULL (yields 0) or live.
 */
size_t oe_spec_num_modes(const struct OeSpec *spec);

/**
 * # Safety
 * `spec` is NULL or a handle from an `oe_spec_*` constructor not yet freed.
 */
void oe_spec_free(struct OeSpec *spec);

/**
 * Gram matrix from an n x n row-major buffer.
 *
 * # Safety
 * `re` must point to `n * n` doubles; `im` is NULL or the same length.
 */
enum OeStatus oe_gram_new(size_t n, const double *re, const double *im, struct OeGram **out);

/**
 * Gram matrix with every off-diagonal entry equal to `g`.
 */
enum OeStatus oe_gram_uniform(size_t n, double g, struct OeGram **out);

/**
 * Gram matrix from path delays under the Gaussian coherence model.
 *
 * # Safety
 * `delays` must point to `n` doubles.
 */
enum OeStatus oe_gram_from_delays(size_t n,
                                  const double *delays,
                                  double coherence_length,
                                  struct OeGram **out);

/**
 * # Safety
 * `gram` is NULL or a handle from an `oe_gram_*` constructor not yet freed.
 */
void oe_gram_free(struct OeGram *gram);

/**
 * Postselected, distinguishability-traced state. `p_success` may be NULL.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum OeStatus oe_simulate(const struct OeSpec *spec,
                          const struct OeGram *gram,
                          struct OeDensity **out,
                          double *p_success);

/**
 * Density matrix from a dim x dim row-major buffer; validated.
 *
 * # Safety
 * `re` must point to `dim * dim` doubles; `im` is NULL or the same length.
 */
enum OeStatus oe_density_new(size_t dim,
                             const double *re,
                             const double *im,
                             struct OeDensity **out);

/**
 * # Safety
 * The handle is NULL (yields 0) or live.
 */
size_t oe_density_num_qubits(const struct OeDensity *rho);

/**
 * # Safety
 * The handle is NULL (yields 0) or live.
 */
size_t oe_density_dim(const struct OeDensity *rho);

/**
 * Copies the entries row-major into caller buffers of `len = dim * dim`.
 *
 * # Safety
 * `re` and `im` must each be writable for `len` doubles.
 */
enum OeStatus oe_density_entries(const struct OeDensity *rho, double *re, double *im, size_t len);

/**
 * # Safety
 * `rho` is NULL or a handle from `oe_simulate`/`oe_density_new` not yet freed.
 */
void oe_density_free(struct OeDensity *rho);

/**
 * Fidelity with the GHZ state on the same number of qubits.
 *
 * # Safety
 * `rho` must be live; `out` writable.
 */
enum OeStatus oe_fidelity_ghz(const struct OeDensity *rho, double *out);

/**
 * Fidelity with the three-qubit W state carrying phases `phi1`, `phi2` (radians).
 *
 * # Safety
 * `rho` must be live; `out` writable.
 */
enum OeStatus oe_fidelity_w(const struct OeDensity *rho, double phi1, double phi2, double *out);

/**
 * Uhlmann fidelity between two density matrices.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum OeStatus oe_fidelity_mixed(const struct OeDensity *a, const struct OeDensity *b, double *out);

/**
 * Maximizes W fidelity over the two relative phases.
 *
 * # Safety
 * `rho` must be live; all out-pointers writable.
 */
enum OeStatus oe_optimize_w_phases(const struct OeDensity *rho,
                                   double *phi1,
                                   double *phi2,
                                   double *fidelity);

/**
 * Witness classification of a three-qubit state. `margin` is added to both bounds.
 *
 * # Safety
 * `rho` must be live; `out` writable.
 */
enum OeStatus oe_classify(const struct OeDensity *rho, double margin, struct OeClassification *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OVERLAP_ENTANGLE_H */
