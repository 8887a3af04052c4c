//! C ABI for the irlink toolkit: framing, rate caps and the optical link
//! budget, callable from any language with C linkage.
//!
//! Conventions: every fallible call returns an [`IrlinkStatus`] and writes
//! results through out-pointers; heap objects are opaque handles released
//! by their matching `_free` function. The generated header lives in
//! `include/irlink.h`.

// Validations use the `!(x > 0.0)` form on floats deliberately: unlike
// `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use irlink::bitframe::{
    build_frame, crc16_value, parse_frame, BitframeError, Bitstream, FRAME_BITS, PAYLOAD_BYTES,
};
use irlink::modem::{self, SchemeKind, SchemeParams};
use irlink::optics::{lambertian_order, max_distance_los, OpticalLinkParams};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrlinkStatus {
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// An argument was out of its documented domain.
    InvalidArgument = 2,
    /// Payload exceeds one frame.
    PayloadTooLong = 3,
    /// Frame preamble did not match.
    SyncError = 4,
    /// Frame checksum did not match.
    IntegrityError = 5,
}

/// Modulation scheme selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrlinkScheme {
    Ook = 0,
    Bfsk = 1,
    Ask = 2,
}

impl IrlinkScheme {
    fn kind(self) -> SchemeKind {
        match self {
            IrlinkScheme::Ook => SchemeKind::Ook,
            IrlinkScheme::Bfsk => SchemeKind::Bfsk,
            IrlinkScheme::Ask => SchemeKind::Ask,
        }
    }
}

/// Line-of-sight link parameters; see the library documentation for units.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IrlinkLinkParams {
    pub half_power_semiangle_deg: f64,
    pub irradiance_angle_deg: f64,
    pub detector_axial_angle_deg: f64,
    pub loss_factor: f64,
    pub lens_radius_m: f64,
    pub responsivity_a_per_w: f64,
    pub noise_sigma_a: f64,
    pub tx_power_w: f64,
    pub distance_m: f64,
}

impl IrlinkLinkParams {
    fn to_params(self) -> OpticalLinkParams {
        OpticalLinkParams {
            half_power_semiangle_deg: self.half_power_semiangle_deg,
            irradiance_angle_deg: self.irradiance_angle_deg,
            detector_axial_angle_deg: self.detector_axial_angle_deg,
            loss_factor: self.loss_factor,
            lens_radius_m: self.lens_radius_m,
            responsivity_a_per_w: self.responsivity_a_per_w,
            noise_sigma_a: self.noise_sigma_a,
            tx_power_w: self.tx_power_w,
            distance_m: self.distance_m,
        }
    }
}

/// Serialized frame size in bytes (280 bits).
pub const IRLINK_FRAME_BYTES: usize = 35;

/// Payload capacity of one frame in bytes.
pub const IRLINK_PAYLOAD_BYTES: usize = 32;

const _: () = assert!(IRLINK_FRAME_BYTES == FRAME_BITS / 8);
const _: () = assert!(IRLINK_PAYLOAD_BYTES == PAYLOAD_BYTES);

/// An encoded transmitter program; opaque to callers.
pub struct IrlinkTimeline {
    inner: modem::SignalTimeline,
}

/// CRC-16 over `len` bytes of `data`, written to `out`.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` to a writable u16.
#[no_mangle]
pub unsafe extern "C" fn irlink_crc16(
    data: *const u8,
    len: usize,
    out: *mut u16,
) -> IrlinkStatus {
    if (data.is_null() && len > 0) || out.is_null() {
        return IrlinkStatus::NullPointer;
    }
    let bytes = if len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(data, len)
    };
    match crc16_value(&Bitstream::from_bytes(bytes)) {
        Ok(value) => {
            *out = value;
            IrlinkStatus::Ok
        }
        Err(_) => IrlinkStatus::InvalidArgument,
    }
}

/// Frames up to 32 payload bytes (zero-padded) into the 35-byte wire form.
///
/// # Safety
/// `payload` must point to `payload_len` readable bytes; `out` must point to
/// `IRLINK_FRAME_BYTES` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn irlink_frame_encode(
    payload: *const u8,
    payload_len: usize,
    out: *mut u8,
) -> IrlinkStatus {
    if (payload.is_null() && payload_len > 0) || out.is_null() {
        return IrlinkStatus::NullPointer;
    }
    if payload_len > PAYLOAD_BYTES {
        return IrlinkStatus::PayloadTooLong;
    }
    let bytes = if payload_len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(payload, payload_len)
    };
    let frame = match build_frame(&Bitstream::from_bytes(bytes)) {
        Ok(frame) => frame,
        Err(_) => return IrlinkStatus::InvalidArgument,
    };
    let wire = irlink::bitframe::serialize_frame(&frame)
        .to_bytes()
        .expect("frame is byte-aligned");
    std::ptr::copy_nonoverlapping(wire.as_ptr(), out, IRLINK_FRAME_BYTES);
    IrlinkStatus::Ok
}

/// Parses a 35-byte frame, writing the 32 payload bytes on success.
/// Sync and integrity failures are distinct statuses.
///
/// # Safety
/// `frame` must point to `IRLINK_FRAME_BYTES` readable bytes and
/// `out_payload` to `IRLINK_PAYLOAD_BYTES` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn irlink_frame_decode(
    frame: *const u8,
    out_payload: *mut u8,
) -> IrlinkStatus {
    if frame.is_null() || out_payload.is_null() {
        return IrlinkStatus::NullPointer;
    }
    let bytes = std::slice::from_raw_parts(frame, IRLINK_FRAME_BYTES);
    match parse_frame(&Bitstream::from_bytes(bytes)) {
        Ok(frame) => {
            let payload = frame.payload.to_bytes().expect("payload is byte-aligned");
            std::ptr::copy_nonoverlapping(payload.as_ptr(), out_payload, PAYLOAD_BYTES);
            IrlinkStatus::Ok
        }
        Err(BitframeError::Sync) => IrlinkStatus::SyncError,
        Err(BitframeError::Integrity { .. }) => IrlinkStatus::IntegrityError,
        Err(_) => IrlinkStatus::InvalidArgument,
    }
}

/// Lambertian order for a half-power semiangle in degrees.
///
/// # Safety
/// `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn irlink_lambertian_order(
    half_power_semiangle_deg: f64,
    out: *mut f64,
) -> IrlinkStatus {
    if out.is_null() {
        return IrlinkStatus::NullPointer;
    }
    match lambertian_order(half_power_semiangle_deg) {
        Ok(order) => {
            *out = order;
            IrlinkStatus::Ok
        }
        Err(_) => IrlinkStatus::InvalidArgument,
    }
}

/// Maximum sustainable bit rate for a scheme given the LED transition time
/// and the receiving camera frame rate.
///
/// # Safety
/// `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn irlink_max_bit_rate(
    scheme: IrlinkScheme,
    transition_ms: f64,
    receiver_fps: f64,
    out: *mut f64,
) -> IrlinkStatus {
    if out.is_null() {
        return IrlinkStatus::NullPointer;
    }
    if !(transition_ms > 0.0) || !(receiver_fps > 0.0) {
        return IrlinkStatus::InvalidArgument;
    }
    let params = match SchemeParams::for_rate(scheme.kind(), 10.0, 5) {
        Ok(p) => p,
        Err(_) => return IrlinkStatus::InvalidArgument,
    };
    *out = modem::max_bit_rate(&params, transition_ms, receiver_fps);
    IrlinkStatus::Ok
}

/// Maximum line-of-sight distance meeting the detection threshold.
///
/// # Safety
/// `params` must point to a readable parameter struct and `out` to a
/// writable f64.
#[no_mangle]
pub unsafe extern "C" fn irlink_max_distance_los(
    params: *const IrlinkLinkParams,
    out: *mut f64,
) -> IrlinkStatus {
    if params.is_null() || out.is_null() {
        return IrlinkStatus::NullPointer;
    }
    let params = &*params;
    match max_distance_los(&params.to_params()) {
        Ok(d) => {
            *out = d;
            IrlinkStatus::Ok
        }
        Err(_) => IrlinkStatus::InvalidArgument,
    }
}

/// Frames and encodes `len` bytes at a nominal bit rate, returning an opaque
/// timeline handle through `out`. Free it with [`irlink_timeline_free`].
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` to a writable pointer
/// slot.
#[no_mangle]
pub unsafe extern "C" fn irlink_timeline_encode(
    scheme: IrlinkScheme,
    rate_bps: f64,
    n_levels: usize,
    data: *const u8,
    len: usize,
    out: *mut *mut IrlinkTimeline,
) -> IrlinkStatus {
    if (data.is_null() && len > 0) || out.is_null() {
        return IrlinkStatus::NullPointer;
    }
    let bytes = if len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(data, len)
    };
    let params = match SchemeParams::for_rate(scheme.kind(), rate_bps, n_levels) {
        Ok(p) => p,
        Err(_) => return IrlinkStatus::InvalidArgument,
    };
    let mut bits = Bitstream::new();
    for frame in irlink::bitframe::fragment(bytes) {
        bits.extend(&irlink::bitframe::serialize_frame(&frame));
    }
    let timeline = match modem::encode(&bits, &params) {
        Ok(tl) => tl,
        Err(_) => return IrlinkStatus::InvalidArgument,
    };
    *out = Box::into_raw(Box::new(IrlinkTimeline { inner: timeline }));
    IrlinkStatus::Ok
}

/// Number of segments in a timeline; 0 for a null handle.
///
/// # Safety
/// `timeline` must be null or a live handle from [`irlink_timeline_encode`].
#[no_mangle]
pub unsafe extern "C" fn irlink_timeline_len(timeline: *const IrlinkTimeline) -> usize {
    if timeline.is_null() {
        return 0;
    }
    let timeline = &*timeline;
    timeline.inner.len()
}

/// Reads one segment of a timeline.
///
/// # Safety
/// `timeline` must be a live handle; `out_level` and `out_duration_ms` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn irlink_timeline_segment(
    timeline: *const IrlinkTimeline,
    index: usize,
    out_level: *mut usize,
    out_duration_ms: *mut f64,
) -> IrlinkStatus {
    if timeline.is_null() || out_level.is_null() || out_duration_ms.is_null() {
        return IrlinkStatus::NullPointer;
    }
    let timeline = &*timeline;
    match timeline.inner.segments.get(index) {
        Some(segment) => {
            *out_level = segment.level;
            *out_duration_ms = segment.duration_ms;
            IrlinkStatus::Ok
        }
        None => IrlinkStatus::InvalidArgument,
    }
}

/// Releases a timeline handle; null is a no-op.
///
/// # Safety
/// `timeline` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn irlink_timeline_free(timeline: *mut IrlinkTimeline) {
    if !timeline.is_null() {
        drop(Box::from_raw(timeline));
    }
}
