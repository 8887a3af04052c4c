#ifndef IRLINK_H
#define IRLINK_H

/* Generated by cbindgen from irlink-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Serialized frame size in bytes (280 bits).
 */
#define IRLINK_FRAME_BYTES 35

/**
 * Payload capacity of one frame in bytes.
 */
#define IRLINK_PAYLOAD_BYTES 32

/**
 * Modulation scheme selector.
 */
typedef enum IrlinkScheme {
  IRLINK_SCHEME_OOK = 0,
  IRLINK_SCHEME_BFSK = 1,
  IRLINK_SCHEME_ASK = 2,
} IrlinkScheme;

/**
 * Result of every fallible call.
 */
typedef enum IrlinkStatus {
  IRLINK_STATUS_OK = 0,
  /**
   * A pointer argument was null.
   */
  IRLINK_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of its documented domain.
   */
  IRLINK_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Payload exceeds one frame.
   */
  IRLINK_STATUS_PAYLOAD_TOO_LONG = 3,
  /**
   * Frame preamble did not match.
   */
  IRLINK_STATUS_SYNC_ERROR = 4,
  /**
   * Frame checksum did not match.
   */
  IRLINK_STATUS_INTEGRITY_ERROR = 5,
} IrlinkStatus;

/**
 * An encoded transmitter program; opaque to callers.
 */
typedef struct IrlinkTimeline IrlinkTimeline;

/**
 * Line-of-sight link parameters; see the library documentation for units.
 */
typedef struct IrlinkLinkParams {
  double half_power_semiangle_deg;
  double irradiance_angle_deg;
  double detector_axial_angle_deg;
  double loss_factor;
  double lens_radius_m;
  double responsivity_a_per_w;
  double noise_sigma_a;
  double tx_power_w;
  double distance_m;
} IrlinkLinkParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * CRC-16 over `len` bytes of `data`, written to `out`.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` to a writable u16.
 */
enum IrlinkStatus irlink_crc16(const uint8_t *data, size_t len, uint16_t *out);

/**
 * Frames up to 32 payload bytes (zero-padded) into the 35-byte wire form.
 *
 * # Safety
 * `payload` must point to `payload_len` readable bytes; `out` must point to
 * `IRLINK_FRAME_BYTES` writable bytes.
 */
enum IrlinkStatus irlink_frame_encode(const uint8_t *payload, size_t payload_len, uint8_t *out);

/**
 * Parses a 35-byte frame, writing the 32 payload bytes on success.
 * Sync and integrity failures are distinct statuses.
 *
 * # Safety
 * `frame` must point to `IRLINK_FRAME_BYTES` readable bytes and
 * `out_payload` to `IRLINK_PAYLOAD_BYTES` writable bytes.
 */
enum IrlinkStatus irlink_frame_decode(const uint8_t *frame, uint8_t *out_payload);

/**
 * Lambertian order for a half-power semiangle in degrees.
 *
 * # Safety
 * `out` must point to a writable f64.
 */
enum IrlinkStatus irlink_lambertian_order(double half_power_semiangle_deg, double *out);

/**
 * Maximum sustainable bit rate for a scheme given the LED transition time
 * and the receiving camera frame rate.
 *
 * # Safety
 * `out` must point to a writable f64.
 */
enum IrlinkStatus irlink_max_bit_rate(enum IrlinkScheme scheme,
                                      double transition_ms,
                                      double receiver_fps,
                                      double *out);

/**
 * Maximum line-of-sight distance meeting the detection threshold.
 *
 * # Safety
 * `params` must point to a readable parameter struct and `out` to a
 * writable f64.
 */
enum IrlinkStatus irlink_max_distance_los(const struct IrlinkLinkParams *params, double *out);

/**
 * Frames and encodes `len` bytes at a nominal bit rate, returning an opaque
 * timeline handle through `out`. Free it with [`irlink_timeline_free`].
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` to a writable pointer
 * slot.
 */
enum IrlinkStatus irlink_timeline_encode(enum IrlinkScheme scheme,
                                         double rate_bps,
                                         size_t n_levels,
                                         const uint8_t *data,
                                         size_t len,
                                         struct IrlinkTimeline **out);

/**
 * Number of segments in a timeline; 0 for a null handle.
 *
 * # Safety
 * `timeline` must be null or a live handle from [`irlink_timeline_encode`].
 */
size_t irlink_timeline_len(const struct IrlinkTimeline *timeline);

/**
 * Reads one segment of a timeline.
 *
 * # Safety
 * `timeline` must be a live handle; `out_level` and `out_duration_ms` must
 * be writable.
 */
enum IrlinkStatus irlink_timeline_segment(const struct IrlinkTimeline *timeline,
                                          size_t index,
                                          size_t *out_level,
                                          double *out_duration_ms);

/**
 * Releases a timeline handle; null is a no-op.
 *
 * # Safety
 * `timeline` must be null or a handle not yet freed.
 */
void irlink_timeline_free(struct IrlinkTimeline *timeline);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IRLINK_H */
