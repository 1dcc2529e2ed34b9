/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef LISCE_H
#define LISCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LisceStatus {
  LISCE_STATUS_OK = 0,
  LISCE_STATUS_INVALID_PARAMETER = 1,
  LISCE_STATUS_SINGULAR_MATRIX = 2,
  LISCE_STATUS_DIMENSION = 3,
  LISCE_STATUS_INCOMPLETE_DATA = 4,
  LISCE_STATUS_CONFIG = 5,
  LISCE_STATUS_IO = 6,
  LISCE_STATUS_NULL_POINTER = 7,
  LISCE_STATUS_INVALID_UTF8 = 8,
  LISCE_STATUS_OUT_OF_RANGE = 9,
  LISCE_STATUS_PANIC = 10,
} LisceStatus;

// Opaque experiment configuration.
typedef struct LisceExperiment LisceExperiment;

// Opaque experiment result.
typedef struct LisceReport LisceReport;

// Bounds for Re h, Im h and eta.
typedef struct LisceCrlb {
  double re_h;
  double im_h;
  double eta;
} LisceCrlb;

// Dual-ascent settings. `schedule` is 0 for constant steps and 1 for the
// 1/sqrt(t+1) schedule.
typedef struct LisceDualAscentConfig {
  double eps0;
  double tau0;
  size_t t_max;
  double tol;
  double lambda0;
  double delta0;
  double feas_tol;
  uint32_t schedule;
  double domain_margin;
  size_t max_backoffs;
} LisceDualAscentConfig;

typedef struct LisceComplex {
  double re;
  double im;
} LisceComplex;

// Estimator output. For least squares `iterations` is 0, `converged` is
// true and both multipliers are 0.
typedef struct LisceEstimate {
  struct LisceComplex h;
  struct LisceComplex eta;
  size_t iterations;
  bool converged;
  double lambda;
  double delta;
} LisceEstimate;

// Estimator codes: 0 = LS, 1 = DES. Component codes: 0 = Re h, 1 = Im h, 2 = eta.
typedef struct LisceRecord {
  double snr_db;
  uint32_t estimator;
  uint32_t component;
  double mse;
  double crlb;
  size_t trials;
  size_t nonconverged;
  uint64_t seed;
} LisceRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. The pointer
// stays valid until the next call into the library from the same thread.
const char *lisce_last_error(void);

// Library version as a static NUL-terminated string.
const char *lisce_version(void);

// Cramér–Rao bounds for pilot energies `energy1`, `energy2` and noise
// variance `sigma_w2`.
//
// # Safety
// `out` must point to writable memory for one `LisceCrlb`.
enum LisceStatus lisce_crlb(double energy1, double energy2, double sigma_w2, struct LisceCrlb *out);

// Writes the default dual-ascent settings.
//
// # Safety
// `out` must point to writable memory for one `LisceDualAscentConfig`.
enum LisceStatus lisce_dual_ascent_default(struct LisceDualAscentConfig *out);

// Least-squares estimate from `k1 + k2` observations.
//
// # Safety
// `pilots1` and `pilots2` must hold `k1` and `k2` values, `y` must hold
// `k1 + k2` values and `out` must be writable.
enum LisceStatus lisce_ls_estimate(const struct LisceComplex *pilots1,
                                   size_t k1,
                                   const struct LisceComplex *pilots2,
                                   size_t k2,
                                   const struct LisceComplex *y,
                                   struct LisceEstimate *out);

// Dual-ascent estimate. A null `config` selects the defaults.
//
// # Safety
// As for [`lisce_ls_estimate`]; `config` is either null or readable.
enum LisceStatus lisce_des_estimate(const struct LisceComplex *pilots1,
                                    size_t k1,
                                    const struct LisceComplex *pilots2,
                                    size_t k2,
                                    const struct LisceComplex *y,
                                    const struct LisceDualAscentConfig *config,
                                    struct LisceEstimate *out);

// New experiment with the reference settings.
struct LisceExperiment *lisce_experiment_new(void);

// Parses a `key = value` configuration text into a new experiment.
//
// # Safety
// `text` must be a NUL-terminated string and `out` writable.
enum LisceStatus lisce_experiment_from_config(const char *text, struct LisceExperiment **out);

// # Safety
// `exp` must be a live handle.
enum LisceStatus lisce_experiment_set_trials(struct LisceExperiment *exp, size_t trials);

// # Safety
// `exp` must be a live handle.
enum LisceStatus lisce_experiment_set_seed(struct LisceExperiment *exp, uint64_t seed);

// Worker threads for [`lisce_experiment_run`]; 0 uses every core.
//
// # Safety
// `exp` must be a live handle.
enum LisceStatus lisce_experiment_set_workers(struct LisceExperiment *exp, size_t workers);

// # Safety
// `exp` must be a live handle and `snr_db` must hold `len` values.
enum LisceStatus lisce_experiment_set_snr_db(struct LisceExperiment *exp,
                                             const double *snr_db,
                                             size_t len);

// Runs the sweep and returns a report handle through `out`.
//
// # Safety
// `exp` must be a live handle and `out` writable.
enum LisceStatus lisce_experiment_run(const struct LisceExperiment *exp, struct LisceReport **out);

// # Safety
// `exp` must be null or a handle not yet freed.
void lisce_experiment_free(struct LisceExperiment *exp);

// Number of records in a report; 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
size_t lisce_report_len(const struct LisceReport *report);

// Number of warnings attached to a report.
//
// # Safety
// `report` must be null or a live handle.
size_t lisce_report_warning_count(const struct LisceReport *report);

// # Safety
// `report` must be a live handle and `out` writable.
enum LisceStatus lisce_report_record(const struct LisceReport *report,
                                     size_t index,
                                     struct LisceRecord *out);

// # Safety
// `report` must be null or a handle not yet freed.
void lisce_report_free(struct LisceReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LISCE_H */
