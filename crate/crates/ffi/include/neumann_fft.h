#ifndef NEUMANN_FFT_H
#define NEUMANN_FFT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NfCriterion {
  NF_CRITERION_DIV = 0,
  NF_CRITERION_DIFF = 1,
  NF_CRITERION_COEF = 2,
} NfCriterion;

typedef enum NfGreen {
  NF_GREEN_CONTINUOUS = 0,
  NF_GREEN_MUELLER = 1,
  NF_GREEN_WILLOT = 2,
} NfGreen;

typedef enum NfMicroKind {
  NF_MICRO_KIND_OBNOSOV = 0,
  NF_MICRO_KIND_CHECKERBOARD = 1,
  NF_MICRO_KIND_FOUR_DISKS = 2,
} NfMicroKind;

typedef enum NfScheme {
  NF_SCHEME_B = 0,
  NF_SCHEME_MS = 1,
  NF_SCHEME_EM = 2,
  // EM iterated on the polarization field (solve only).
  NF_SCHEME_EM_POLARIZATION = 3,
} NfScheme;

typedef enum NfSolveStatus {
  NF_SOLVE_STATUS_CONVERGED = 0,
  NF_SOLVE_STATUS_MAX_ITER = 1,
  NF_SOLVE_STATUS_DIVERGED = 2,
} NfSolveStatus;

// Result of every fallible call.
typedef enum NfStatus {
  NF_STATUS_OK = 0,
  NF_STATUS_NULL_POINTER = 1,
  NF_STATUS_INVALID_ARGUMENT = 2,
  // Contrast outside the scheme's or formula's domain.
  NF_STATUS_DOMAIN = 3,
  NF_STATUS_IO = 4,
  // Internal failure; the library state is unchanged.
  NF_STATUS_PANIC = 5,
} NfStatus;

// Opaque two-phase microstructure.
typedef struct NfMicro NfMicro;

// Opaque solve report.
typedef struct NfReport NfReport;

// One iteration of a solve.
typedef struct NfSolveRow {
  size_t k;
  double delta1;
  double delta2;
  double coef;
  double z_eff;
} NfSolveRow;

// Convergence rates; `r_em` is NaN when undefined (`z < 0`).
typedef struct NfRates {
  double r_b;
  double r_ms;
  double r_em;
} NfRates;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *nf_last_error(void);

// Generates a microstructure `kind` (an `NfMicroKind`) on an `n` x `n` grid.
//
// # Safety
// `out` must be valid for writing one pointer.
enum NfStatus nf_micro_generate(int32_t kind, size_t n, struct NfMicro **out);

// Loads a binary PGM raster; values >= 128 are phase 1.
//
// # Safety
// `path` must be a nul-terminated string, `out` valid for writing.
enum NfStatus nf_micro_load_pgm(const char *path, struct NfMicro **out);

// # Safety
// `micro` must come from this library; `path` must be nul-terminated.
enum NfStatus nf_micro_save_pgm(const struct NfMicro *micro, const char *path);

// Grid size and phase-1 volume fraction.
//
// # Safety
// `micro` must come from this library; outputs may be null to skip them.
enum NfStatus nf_micro_info(const struct NfMicro *micro,
                            size_t *n1,
                            size_t *n2,
                            double *volume_fraction);

// # Safety
// `micro` must come from this library or be null; it is invalid afterwards.
void nf_micro_free(struct NfMicro *micro);

// Numerically extracted `b_0..b_order` and `d_0..d_order`.
//
// # Safety
// `micro` must come from this library; `b_out` and `d_out` must each be
// null or hold `order + 1` doubles.
enum NfStatus nf_series_numerical(const struct NfMicro *micro,
                                  int32_t scheme,
                                  int32_t green,
                                  size_t order,
                                  double *b_out,
                                  double *d_out);

// Exact coefficients of the square-inclusion cell, rounded to double.
//
// # Safety
// `b_out` and `d_out` must each be null or hold `order + 1` doubles.
enum NfStatus nf_series_analytic(int32_t scheme, size_t order, double *b_out, double *d_out);

// `√((1 + 3z) / (3 + z))`; `NF_STATUS_DOMAIN` on the branch cut.
//
// # Safety
// `out` must be valid for writing.
enum NfStatus nf_obnosov_exact(double z, double *out);

// Runs a scheme with loading `e1`. A diverged run still returns
// `NF_STATUS_OK`; query [`nf_report_status`].
//
// # Safety
// `micro` must come from this library; `out` valid for writing.
enum NfStatus nf_solve(const struct NfMicro *micro,
                       int32_t scheme,
                       int32_t green,
                       double z,
                       int32_t criterion,
                       double tol,
                       size_t max_iter,
                       struct NfReport **out);

// # Safety
// `report` must come from this library; `len` and `status` may be null.
enum NfStatus nf_report_info(const struct NfReport *report,
                             size_t *len,
                             enum NfSolveStatus *status);

// Terminal status of a solve.
//
// # Safety
// As [`nf_report_info`].
enum NfStatus nf_report_status(const struct NfReport *report, enum NfSolveStatus *status);

// Row `index` (0-based) of a report.
//
// # Safety
// `report` must come from this library; `row` valid for writing.
enum NfStatus nf_report_row(const struct NfReport *report, size_t index, struct NfSolveRow *row);

// # Safety
// `report` must come from this library or be null; it is invalid afterwards.
void nf_report_free(struct NfReport *report);

// Rates `ρ/|t|` of the three schemes for singularities in `[-β, -1/β]`.
// `beta` may be `INFINITY`.
//
// # Safety
// `out` must be valid for writing.
enum NfStatus nf_rates(double beta, double z, struct NfRates *out);

// Contrast thresholds; `z1` and `z2` are NaN when `β < 3`.
//
// # Safety
// Outputs must be valid for writing.
enum NfStatus nf_regime_thresholds(double beta, double *z0, double *z1, double *z2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEUMANN_FFT_H */
