#ifndef FKTODA_H
#define FKTODA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum FktStatus {
  FKT_STATUS_OK = 0,
  FKT_STATUS_NULL_POINTER = 1,
  FKT_STATUS_INVALID_INPUT = 2,
  FKT_STATUS_CONFIG = 3,
  FKT_STATUS_BUFFER_TOO_SMALL = 4,
  FKT_STATUS_STRUCTURE_VIOLATION = 10,
  FKT_STATUS_TRUNCATION_TOO_SMALL = 11,
  FKT_STATUS_EIGENSOLVER_FAILURE = 12,
  FKT_STATUS_DEGREE_OVERFLOW = 13,
  FKT_STATUS_SINGULAR_NORMALIZATION = 14,
  FKT_STATUS_SERIES_NOT_CONVERGED = 15,
  FKT_STATUS_SINGULAR = 16,
  FKT_STATUS_QUASI_DEFINITE_VIOLATION = 17,
  FKT_STATUS_STEP_REJECTED = 18,
  FKT_STATUS_PANIC = 99,
} FktStatus;

/*
 Vector moment functional.
 */
typedef struct FktFunctional FktFunctional;

/*
 Lattice state at one time.
 */
typedef struct FktLattice FktLattice;

/*
 Sampled solution of the lattice flow.
 */
typedef struct FktTrajectory FktTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL terminated,
 truncated to `cap`) and returns the full message length in bytes, or 0
 when the last call succeeded.

 # Safety
 `buf` must be null or point to `cap` writable bytes.
 */
size_t fkt_last_error(char *buf, size_t cap);

/*
 All-zero lattice with `n_blocks` block rows.

 # Safety
 `out` must be a valid pointer.
 */
enum FktStatus fkt_lattice_zeros(size_t n_blocks, struct FktLattice **out);

/*
 Initial lattice described by a JSON run configuration (same format as the CLI).

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FktStatus fkt_lattice_from_config(const char *json, struct FktLattice **out);

/*
 # Safety
 `l` must be null or a handle not yet freed.
 */
void fkt_lattice_free(struct FktLattice *l);

/*
 Number of block rows, or 0 for a null handle.

 # Safety
 `l` must be null or a live handle.
 */
size_t fkt_lattice_n_blocks(const struct FktLattice *l);

/*
 Time stamp of the state, or NaN for a null handle.

 # Safety
 `l` must be null or a live handle.
 */
double fkt_lattice_time(const struct FktLattice *l);

/*
 Reads coefficient `name_n` (`name` one of 'a', 'b', 'c', 'd'; `n` 1-based).
 Indices outside the stored range read as zero.

 # Safety
 `l` must be a live handle and `out` must point to 2 doubles.
 */
enum FktStatus fkt_lattice_get(const struct FktLattice *l, char name, int64_t n, double *out);

/*
 Sets coefficient `name_n` to `re + i im`.

 # Safety
 `l` must be a live handle.
 */
enum FktStatus fkt_lattice_set(struct FktLattice *l, char name, size_t n, double re, double im);

/*
 Largest entry of `dJ/dt - [J, J_-]` over the interior rows.

 # Safety
 `l` must be a live handle and `out` a valid pointer.
 */
enum FktStatus fkt_lattice_commutator_residual(const struct FktLattice *l, double *out);

/*
 Eigenvalues of the truncated operator, interleaved, sorted by real then
 imaginary part. `*len` receives the count (2 N); the call fails with
 `BufferTooSmall` when `cap` (in complex values) is smaller.

 # Safety
 `l` must be a live handle, `out` must point to `2 * cap` doubles and `len` be valid.
 */
enum FktStatus fkt_lattice_spectrum(const struct FktLattice *l,
                                    double *out,
                                    size_t cap,
                                    size_t *len);

/*
 Corner block of the resolvent, `((zI - J)^{-1})_{00}`, from the finite section.

 # Safety
 `l` must be a live handle and `out` must point to 8 doubles.
 */
enum FktStatus fkt_lattice_weyl(const struct FktLattice *l, double re, double im, double *out);

/*
 Integrates the lattice with RK4 step `h` up to `t_end`, keeping every
 `record_every`-th step. `t_end` must be a whole number of recorded steps.

 # Safety
 `l` must be a live handle and `out` a valid pointer.
 */
enum FktStatus fkt_evolve(const struct FktLattice *l,
                          double h,
                          double t_end,
                          size_t record_every,
                          struct FktTrajectory **out);

/*
 # Safety
 `t` must be null or a handle not yet freed.
 */
void fkt_trajectory_free(struct FktTrajectory *t);

/*
 Number of recorded states, or 0 for a null handle.

 # Safety
 `t` must be null or a live handle.
 */
size_t fkt_trajectory_len(const struct FktTrajectory *t);

/*
 Copy of recorded state `index` as a new lattice handle.

 # Safety
 `t` must be a live handle and `out` a valid pointer.
 */
enum FktStatus fkt_trajectory_state(const struct FktTrajectory *t,
                                    size_t index,
                                    struct FktLattice **out);

/*
 Scalar moments `mu^1_k, mu^2_k` for `k <= n_max`, read off the lattice.

 # Safety
 `l` must be a live handle and `out` a valid pointer.
 */
enum FktStatus fkt_functional_from_lattice(const struct FktLattice *l,
                                           size_t n_max,
                                           struct FktFunctional **out);

/*
 # Safety
 `u` must be null or a handle not yet freed.
 */
void fkt_functional_free(struct FktFunctional *u);

/*
 Number of block moments stored, or 0 for a null handle.

 # Safety
 `u` must be null or a live handle.
 */
size_t fkt_functional_n_block_moments(const struct FktFunctional *u);

/*
 Block moment `U(x^{2j} P_0)`.

 # Safety
 `u` must be a live handle and `out` must point to 8 doubles.
 */
enum FktStatus fkt_functional_block_moment(const struct FktFunctional *u, size_t j, double *out);

/*
 Recurrence blocks `A_m, B_m, C_m` for `m <= m_max` recovered from a
 functional and the gauge coefficient `a_1`. `out` receives
 `24 * (m_max + 1)` doubles: for each order the blocks A, B, C.

 # Safety
 `u` must be a live handle and `out` must point to `24 * (m_max + 1)` doubles.
 */
enum FktStatus fkt_reconstruct(const struct FktFunctional *u,
                               double a1_re,
                               double a1_im,
                               size_t m_max,
                               double *out);

/*
 Runs the full verification for a JSON run configuration and returns the
 report as a JSON string, to be released with [`fkt_string_free`].

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FktStatus fkt_verify_json(const char *json, char **out);

/*
 # Safety
 `s` must be null or a string returned by this library and not yet freed.
 */
void fkt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FKTODA_H */
