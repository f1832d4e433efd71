#ifndef CVTEL_H
#define CVTEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CvtelStatus {
  CVTEL_STATUS_OK = 0,
  CVTEL_STATUS_NULL_POINTER = 1,
  CVTEL_STATUS_INVALID_PARAMETER = 2,
  CVTEL_STATUS_DEAD_MODE = 3,
  CVTEL_STATUS_SAME_MODE = 4,
  CVTEL_STATUS_DUPLICATE_SIGNAL = 5,
  CVTEL_STATUS_FOREIGN_RECORD = 6,
  CVTEL_STATUS_TARGETS_NOT_ELIMINABLE = 7,
  CVTEL_STATUS_LEFTOVER_RECORD = 8,
  CVTEL_STATUS_MISSING_VARIANCE = 9,
  CVTEL_STATUS_CONSTRUCTION_MISMATCH = 10,
  CVTEL_STATUS_NO_ROOT = 11,
  CVTEL_STATUS_PANIC = 12,
} CvtelStatus;

typedef enum CvtelOrientation {
  /**
   * `y` squeezed, `x` antisqueezed.
   */
  CVTEL_ORIENTATION_Y_SQUEEZED = 0,
  CVTEL_ORIENTATION_X_SQUEEZED = 1,
} CvtelOrientation;

typedef enum CvtelQuadrature {
  CVTEL_QUADRATURE_X = 0,
  CVTEL_QUADRATURE_Y = 1,
} CvtelQuadrature;

typedef enum CvtelProtocolKind {
  CVTEL_PROTOCOL_KIND_BS = 0,
  CVTEL_PROTOCOL_KIND_CZCZ = 1,
  CVTEL_PROTOCOL_KIND_HYBRID = 2,
  CVTEL_PROTOCOL_KIND_CZCZ_OPTICAL = 3,
  CVTEL_PROTOCOL_KIND_HYBRID_OPTICAL = 4,
} CvtelProtocolKind;

/**
 * Opaque protocol report.
 */
typedef struct CvtelReport CvtelReport;

/**
 * Opaque circuit state.
 */
typedef struct CvtelState CvtelState;

/**
 * The vacuum quadrature `quadrature` introduced with mode `mode`.
 */
typedef struct CvtelVacuumSymbol {
  size_t mode;
  enum CvtelQuadrature quadrature;
} CvtelVacuumSymbol;

/**
 * Protocol parameters; fields a protocol does not use are ignored.
 */
typedef struct CvtelProtocolParams {
  enum CvtelProtocolKind kind;
  double r;
  double g1;
  double g2;
  double theta1;
  double theta2;
  double reflectivity;
} CvtelProtocolParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *cvtel_last_error_message(void);

/**
 * Static version string.
 */
const char *cvtel_version(void);

struct CvtelState *cvtel_state_new(void);

/**
 * # Safety
 * `state` must come from [`cvtel_state_new`] and not be used afterwards. NULL is a no-op.
 */
void cvtel_state_free(struct CvtelState *state);

/**
 * # Safety
 * `state` must be a live handle and `out_mode` writable.
 */
enum CvtelStatus cvtel_state_add_squeezed(struct CvtelState *state,
                                          double r,
                                          enum CvtelOrientation orientation,
                                          size_t *out_mode);

/**
 * # Safety
 * `state` must be a live handle and `out_mode` writable.
 */
enum CvtelStatus cvtel_state_add_signal(struct CvtelState *state, size_t *out_mode);

/**
 * # Safety
 * `state` must be a live handle.
 */
enum CvtelStatus cvtel_state_phase_rotation(struct CvtelState *state, size_t mode, double theta);

/**
 * # Safety
 * `state` must be a live handle.
 */
enum CvtelStatus cvtel_state_beamsplitter(struct CvtelState *state,
                                          size_t i,
                                          size_t j,
                                          double reflectivity);

/**
 * # Safety
 * `state` must be a live handle.
 */
enum CvtelStatus cvtel_state_cz(struct CvtelState *state, size_t i, size_t j, double weight);

/**
 * Closed-form optical CZ with reflectivity `reflectivity` and ancilla squeezing `r`.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum CvtelStatus cvtel_state_optical_cz(struct CvtelState *state,
                                        size_t i,
                                        size_t j,
                                        double reflectivity,
                                        double r);

/**
 * # Safety
 * `state` must be a live handle and `out_record` writable.
 */
enum CvtelStatus cvtel_state_homodyne(struct CvtelState *state,
                                      size_t mode,
                                      double theta,
                                      size_t *out_record);

/**
 * Solves and applies the feedforward that removes `targets` from `out_mode`, using the
 * records not yet consumed.
 *
 * # Safety
 * `state` must be a live handle; `targets` must point to `n_targets` elements (may be
 * NULL when `n_targets` is 0).
 */
enum CvtelStatus cvtel_state_feedforward(struct CvtelState *state,
                                         size_t out_mode,
                                         const struct CvtelVacuumSymbol *targets,
                                         size_t n_targets);

/**
 * Displaces one quadrature of `mode` by `gain` times record `record`.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum CvtelStatus cvtel_state_displace(struct CvtelState *state,
                                      size_t mode,
                                      enum CvtelQuadrature quadrature,
                                      double gain,
                                      size_t record);

/**
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum CvtelStatus cvtel_state_check_symplectic(const struct CvtelState *state, bool *out);

/**
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum CvtelStatus cvtel_state_num_live_modes(const struct CvtelState *state, size_t *out);

/**
 * Reads a report off `out_mode`, with MSEs in units of `e^{-2r} V0`.
 *
 * # Safety
 * `state` must be a live handle and `out_report` writable.
 */
enum CvtelStatus cvtel_state_report(const struct CvtelState *state,
                                    size_t out_mode,
                                    double r,
                                    struct CvtelReport **out_report);

/**
 * Runs one teleportation protocol.
 *
 * # Safety
 * `params` must be readable and `out_report` writable.
 */
enum CvtelStatus cvtel_protocol_run(const struct CvtelProtocolParams *params,
                                    struct CvtelReport **out_report);

/**
 * # Safety
 * `report` must come from this library and not be used afterwards. NULL is a no-op.
 */
void cvtel_report_free(struct CvtelReport *report);

/**
 * # Safety
 * `report` must be live; `mse_x` and `mse_y` writable.
 */
enum CvtelStatus cvtel_report_mse(const struct CvtelReport *report, double *mse_x, double *mse_y);

/**
 * Writes the gain matrix row-major: `x_out/x_in, x_out/y_in, y_out/x_in, y_out/y_in`.
 *
 * # Safety
 * `report` must be live; `out4` must have room for 4 doubles.
 */
enum CvtelStatus cvtel_report_signal_gain(const struct CvtelReport *report, double *out4);

/**
 * # Safety
 * `report` must be live and `out` writable.
 */
enum CvtelStatus cvtel_report_is_teleportation(const struct CvtelReport *report, bool *out);

/**
 * # Safety
 * `report` must be live and `out` writable.
 */
enum CvtelStatus cvtel_report_num_noise_terms(const struct CvtelReport *report, size_t *out);

/**
 * Coefficient and quadrature of noise term `index`. The symbol name is copied into `name`
 * (NUL-terminated, truncated to `name_len`) when `name` is not NULL.
 *
 * # Safety
 * `report` must be live; output pointers writable; `name` must have `name_len` bytes.
 */
enum CvtelStatus cvtel_report_noise_term(const struct CvtelReport *report,
                                         size_t index,
                                         enum CvtelQuadrature *out_quadrature,
                                         double *out_coefficient,
                                         char *name,
                                         size_t name_len);

/**
 * Smallest optical CZ reflectivity at which the optical CZ–CZ worst-quadrature error
 * reaches `threshold`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CvtelStatus cvtel_crossover_r(double threshold, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CVTEL_H */
