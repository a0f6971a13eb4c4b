#ifndef CIRCUMNAV_H
#define CIRCUMNAV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define CIRCUMNAV_MODE_BLF_STATE 0

#define CIRCUMNAV_MODE_BLF_RANGE_ONLY 1

#define CIRCUMNAV_MODE_BASELINE 2

typedef enum CircumnavStatus {
  CIRCUMNAV_STATUS_OK = 0,
  CIRCUMNAV_STATUS_INVALID_ARGUMENT = 1,
  CIRCUMNAV_STATUS_GEOMETRY = 2,
  CIRCUMNAV_STATUS_DELTA_BOUND = 3,
  CIRCUMNAV_STATUS_BARRIER_BREACH = 5,
  CIRCUMNAV_STATUS_NULL_POINTER = 10,
  CIRCUMNAV_STATUS_OUTSIDE_ADMISSIBLE_SET = 11,
  CIRCUMNAV_STATUS_PANIC = 99,
} CircumnavStatus;

/**
 * Design constants; create with [`circumnav_design_new`].
 */
typedef struct CircumnavDesign CircumnavDesign;

/**
 * A finished simulation; create with [`circumnav_simulate`].
 */
typedef struct CircumnavRun CircumnavRun;

typedef struct CircumnavConstants {
  double k;
  double beta;
  double delta_bound;
  double delta;
  double kappa;
  double speed;
  double min_safe_bearing;
} CircumnavConstants;

typedef struct CircumnavLinearization {
  double a11;
  double a12;
  double a21;
  double a22;
  double eig_re[2];
  double eig_im[2];
  bool underdamped;
} CircumnavLinearization;

typedef struct CircumnavWheelCommand {
  double v_right;
  double v_left;
  bool saturated;
} CircumnavWheelCommand;

typedef struct CircumnavSimOptions {
  double x;
  double y;
  /**
   * Bearing relative to the line of sight (rad).
   */
  double theta0;
  double target_x;
  double target_y;
  /**
   * One of the `CIRCUMNAV_MODE_*` constants.
   */
  int32_t mode;
  double dt;
  double t_final;
  size_t record_stride;
  bool allow_outside_theta;
  double initial_range_rate;
} CircumnavSimOptions;

/**
 * Absent values (`convergence_time`, `eta`, `w`) are NaN.
 */
typedef struct CircumnavSummary {
  size_t entry_count;
  double min_range;
  double min_range_time;
  bool safety_violated;
  bool converged;
  double convergence_time;
  double final_omega;
  double max_abs_omega;
  bool audit_passed;
} CircumnavSummary;

typedef struct CircumnavSample {
  double t;
  double x;
  double y;
  double psi;
  double r;
  double theta;
  double omega;
  double eta;
  double w;
  bool inside_ca;
} CircumnavSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Validates the radii and builds the design. A non-positive `delta` selects
 * 0.9 of its admissible bound.
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
enum CircumnavStatus circumnav_design_new(double r_d,
                                          double r_a,
                                          double r_s,
                                          double speed,
                                          double delta,
                                          double kappa,
                                          struct CircumnavDesign **out);

/**
 * # Safety
 * `design` must be null or a handle from [`circumnav_design_new`] not yet freed.
 */
void circumnav_design_free(struct CircumnavDesign *design);

/**
 * # Safety
 * `design` must be a live handle; `out` valid for writes.
 */
enum CircumnavStatus circumnav_design_constants(const struct CircumnavDesign *design,
                                                struct CircumnavConstants *out);

/**
 * `η(r, θ)` for `r ≥ r_a`.
 *
 * # Safety
 * `design` must be a live handle; `out` valid for writes.
 */
enum CircumnavStatus circumnav_eta(const struct CircumnavDesign *design,
                                   double r,
                                   double theta,
                                   double *out);

/**
 * `W(η)`; fails with `BARRIER_BREACH` when `|η| ≥ δ`.
 *
 * # Safety
 * `design` must be a live handle; `out` valid for writes.
 */
enum CircumnavStatus circumnav_blf_value(const struct CircumnavDesign *design,
                                         double eta,
                                         double *out);

/**
 * Turn rate from range and bearing.
 *
 * # Safety
 * `design` must be a live handle; `out` valid for writes.
 */
enum CircumnavStatus circumnav_omega(const struct CircumnavDesign *design,
                                     double r,
                                     double theta,
                                     double *out);

/**
 * Turn rate from range and range rate.
 *
 * # Safety
 * `design` must be a live handle; `out` valid for writes.
 */
enum CircumnavStatus circumnav_omega_from_range(const struct CircumnavDesign *design,
                                                double r,
                                                double rdot,
                                                double *out);

/**
 * # Safety
 * `design` must be a live handle; `out` valid for writes.
 */
enum CircumnavStatus circumnav_linearize(const struct CircumnavDesign *design,
                                         struct CircumnavLinearization *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum CircumnavStatus circumnav_wheel_speeds(double speed,
                                            double omega,
                                            double d_w,
                                            double v_wheel_max,
                                            struct CircumnavWheelCommand *out);

/**
 * Defaults: reference start (1, 0.8) at 38°, target at the origin, full
 * barrier controller, 1 ms step, 120 s, every 10th step recorded.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CircumnavStatus circumnav_sim_options_default(struct CircumnavSimOptions *out);

/**
 * Simulates and audits one run.
 *
 * # Safety
 * `design` must be a live handle, `options` readable, `out` valid for writes.
 */
enum CircumnavStatus circumnav_simulate(const struct CircumnavDesign *design,
                                        const struct CircumnavSimOptions *options,
                                        struct CircumnavRun **out);

/**
 * # Safety
 * `run` must be null or a handle from [`circumnav_simulate`] not yet freed.
 */
void circumnav_run_free(struct CircumnavRun *run);

/**
 * # Safety
 * `run` must be a live handle; `out` valid for writes.
 */
enum CircumnavStatus circumnav_run_summary(const struct CircumnavRun *run,
                                           struct CircumnavSummary *out);

/**
 * Number of recorded samples; 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t circumnav_run_sample_count(const struct CircumnavRun *run);

/**
 * Copies up to `capacity` samples into `out` and stores the count in `written`.
 *
 * # Safety
 * `run` must be a live handle, `out` valid for `capacity` elements, and
 * `written` valid for writes.
 */
enum CircumnavStatus circumnav_run_samples(const struct CircumnavRun *run,
                                           struct CircumnavSample *out,
                                           size_t capacity,
                                           size_t *written);

/**
 * Message of the last failed call on this thread, or null. Release with
 * [`circumnav_string_free`].
 */
char *circumnav_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void circumnav_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIRCUMNAV_H */
