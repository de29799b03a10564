#ifndef FSDE_H
#define FSDE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result code of every exported function.
typedef enum FsdeStatus {
  FSDE_STATUS_OK = 0,
  FSDE_STATUS_INVALID_ARGUMENT = 1,
  FSDE_STATUS_DOMAIN = 2,
  FSDE_STATUS_UNSUPPORTED = 3,
  FSDE_STATUS_INADMISSIBLE = 4,
  FSDE_STATUS_NUMERICAL = 5,
  FSDE_STATUS_RESOURCE = 6,
  FSDE_STATUS_DEGENERATE = 7,
  FSDE_STATUS_NULL_POINTER = 8,
  FSDE_STATUS_BUFFER_TOO_SMALL = 9,
  FSDE_STATUS_PANIC = 10,
} FsdeStatus;

// A validated drift.
typedef struct FsdeDrift FsdeDrift;

// Knots of a simulated path on a uniform grid.
typedef struct FsdePath FsdePath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a
// successful call. Valid until the next call into the library.
const char *fsde_last_error(void);

// Library version as a static NUL-terminated string.
const char *fsde_version(void);

// Creates a drift. `family` is one of `b1`, `b2`, `b1_plus_sin`,
// `b2_plus_sin`, `b1_plus_log`, `b2_plus_log`; `lambda` and `mu` are ignored
// by the unperturbed families.
//
// # Safety
// `family` must be a NUL-terminated string; `out_drift` must be writable.
enum FsdeStatus fsde_drift_new(const char *family,
                               double u,
                               double v,
                               double w,
                               double gamma,
                               double lambda,
                               double mu,
                               struct FsdeDrift **out_drift);

// Releases a drift; NULL is ignored.
//
// # Safety
// `drift` must come from `fsde_drift_new` and not be used afterwards.
void fsde_drift_free(struct FsdeDrift *drift);

// `b(x)`.
//
// # Safety
// `drift` must be a live handle and `out_value` writable.
enum FsdeStatus fsde_drift_eval(const struct FsdeDrift *drift, double x, double *out_value);

// `b'(x)`.
//
// # Safety
// `drift` must be a live handle and `out_value` writable.
enum FsdeStatus fsde_drift_eval_dot(const struct FsdeDrift *drift, double x, double *out_value);

// The zero of `b`.
//
// # Safety
// `drift` must be a live handle and `out_root` writable.
enum FsdeStatus fsde_drift_root(const struct FsdeDrift *drift, double *out_root);

// Contraction constant `K` and growth constant `R`.
//
// # Safety
// `drift` must be a live handle; both out-pointers writable.
enum FsdeStatus fsde_drift_constants(const struct FsdeDrift *drift, double *out_k, double *out_r);

// Writes 1 to `out_admissible` if the drift is admissible for Hölder
// exponent `alpha`, else 0. The reasons for rejection are available through
// `fsde_last_error` only when the status is not OK.
//
// # Safety
// `drift` must be a live handle and `out_admissible` writable.
enum FsdeStatus fsde_drift_check(const struct FsdeDrift *drift, double alpha, int *out_admissible);

// Samples fBm values `B(t_0..t_n)` on `[0, horizon]`; `out_values` must hold
// at least `n + 1` values.
//
// # Safety
// `out_values` must point to `len` writable doubles.
enum FsdeStatus fsde_sample_fbm(double hurst,
                                double horizon,
                                uintptr_t n,
                                uint64_t seed,
                                uint64_t rep,
                                double *out_values,
                                uintptr_t len);

// Solves the implicit scheme on `[0, horizon]` with `n` steps, driven by
// fBm replication `rep` of `seed` (the same draw as `fsde_sample_fbm`).
//
// # Safety
// `drift` must be a live handle and `out_path` writable.
enum FsdeStatus fsde_solve_path(const struct FsdeDrift *drift,
                                double sigma,
                                double x0,
                                double hurst,
                                double horizon,
                                uintptr_t n,
                                uint64_t seed,
                                uint64_t rep,
                                struct FsdePath **out_path);

// Solves the implicit scheme on caller-supplied driver increments; writes
// `count + 1` knots.
//
// # Safety
// `increments` must point to `count` doubles and `out_knots` to `len`
// writable doubles.
enum FsdeStatus fsde_solve_increments(const struct FsdeDrift *drift,
                                      double sigma,
                                      double x0,
                                      double dt,
                                      const double *increments,
                                      uintptr_t count,
                                      double *out_knots,
                                      uintptr_t len);

// Number of knots (`n + 1`) in a path; 0 for NULL.
//
// # Safety
// `path` must be NULL or a live handle.
uintptr_t fsde_path_len(const struct FsdePath *path);

// Copies the knots into `out_knots`.
//
// # Safety
// `path` must be a live handle and `out_knots` point to `len` writable doubles.
enum FsdeStatus fsde_path_copy(const struct FsdePath *path, double *out_knots, uintptr_t len);

// Releases a path; NULL is ignored.
//
// # Safety
// `path` must come from `fsde_solve_path` and not be used afterwards.
void fsde_path_free(struct FsdePath *path);

// Maps scheme knots `X_0..X_n` on `[0, horizon]` to the Langevin knots.
//
// # Safety
// `knots` must point to `count` doubles and `out_values` to `len` writable
// doubles.
enum FsdeStatus fsde_theta_discrete(const struct FsdeDrift *drift,
                                    const double *knots,
                                    uintptr_t count,
                                    double horizon,
                                    double *out_values,
                                    uintptr_t len);

// Hurst estimate of a series `W_0..W_n`.
//
// # Safety
// `values` must point to `count` doubles and `out_h` be writable.
enum FsdeStatus fsde_hurst_estimator(const double *values, uintptr_t count, double *out_h);

// Hurst and volatility estimates of a series `W_0..W_n` observed on
// `[0, horizon]`.
//
// # Safety
// `values` must point to `count` doubles; out-pointers writable.
enum FsdeStatus fsde_estimate(const double *values,
                              uintptr_t count,
                              double horizon,
                              double *out_h,
                              double *out_sigma);

// Volterra kernel `K_H(t, s)` representing fBm as an integral of Brownian motion.
//
// # Safety
// `out_value` must be writable.
enum FsdeStatus fsde_volterra_kernel(double t, double s, double hurst, double *out_value);

// Gauss hypergeometric function `2F1(a, b; c; z)` for `z <= 0`.
//
// # Safety
// `out_value` must be writable.
enum FsdeStatus fsde_gauss_2f1(double a, double b, double c, double z, double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FSDE_H */
