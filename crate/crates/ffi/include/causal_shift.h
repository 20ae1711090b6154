#ifndef CAUSAL_SHIFT_H
#define CAUSAL_SHIFT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Resonance weight 1/u (rate denominator power 5).
 */
#define CS_WEIGHT_INVERSE_U 0

/**
 * Unit resonance weight (rate denominator power 4).
 */
#define CS_WEIGHT_UNITY 1

/**
 * Status code of every call.
 */
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_COMPUTATION_FAILED = 3,
  CS_STATUS_PANIC = 4,
} CsStatus;

/**
 * Opaque atom handle.
 */
typedef struct CsAtom CsAtom;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *cs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cs_version(void);

/**
 * Creates an atom from SI parameters (kg, rad/s, C m, s) with CODATA 2018
 * constants.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum CsStatus cs_atom_new(double m_g,
                          double omega_eg,
                          double d_eg,
                          double t_g,
                          struct CsAtom **out);

/**
 * Creates the built-in hydrogen 1s-2p atom.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum CsStatus cs_atom_hydrogen(struct CsAtom **out);

/**
 * Releases an atom; null is ignored.
 *
 * # Safety
 * `atom` must come from `cs_atom_new` or `cs_atom_hydrogen` and not be
 * used afterwards.
 */
void cs_atom_free(struct CsAtom *atom);

/**
 * # Safety
 * `atom` must be a live handle and `out` writable.
 */
enum CsStatus cs_atom_delta_u(const struct CsAtom *atom, double *out);

/**
 * Leading-order decay rate, 1/s.
 *
 * # Safety
 * `atom` must be a live handle and `out` writable.
 */
enum CsStatus cs_gamma_leading(const struct CsAtom *atom, double *out);

/**
 * Decay rate with the recoil factors, 1/s.
 *
 * # Safety
 * `atom` must be a live handle and `out` writable.
 */
enum CsStatus cs_gamma_exact(const struct CsAtom *atom, int32_t weight_code, double *out);

/**
 * Final line shift, 1/s.
 *
 * # Safety
 * `atom` must be a live handle and `out` writable.
 */
enum CsStatus cs_delta_final(const struct CsAtom *atom, double *out);

/**
 * Signed ratio and magnitude of the final shift to the Lamb reference.
 *
 * # Safety
 * `atom` must be a live handle; both outputs writable.
 */
enum CsStatus cs_shift_ratio(const struct CsAtom *atom, double *signed_out, double *magnitude_out);

/**
 * Normalization constants zeroing the low-order threshold coefficients.
 *
 * # Safety
 * `atom` must be a live handle; outputs writable.
 */
enum CsStatus cs_solve_normalization(const struct CsAtom *atom,
                                     int32_t weight_code,
                                     double *c0,
                                     double *c1,
                                     double *c2);

/**
 * Z at the atom's t_g for given normalization constants.
 *
 * # Safety
 * `atom` must be a live handle; outputs writable.
 */
enum CsStatus cs_z_factor(const struct CsAtom *atom,
                          double c0,
                          double c1,
                          double c2,
                          int32_t weight_code,
                          double *re,
                          double *im);

/**
 * Symmetrized second-order term at dimensionless energy u, 1/m.
 *
 * # Safety
 * `atom` must be a live handle; outputs writable.
 */
enum CsStatus cs_t2_sym(const struct CsAtom *atom,
                        double u,
                        double c0,
                        double c1,
                        double c2,
                        double *re,
                        double *im);

/**
 * Numerical central retarded part of the unit-prefactor causal
 * distribution at u.
 *
 * # Safety
 * Outputs must be writable.
 */
enum CsStatus cs_retarded_part_central(double u, double *re, double *im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAUSAL_SHIFT_H */
