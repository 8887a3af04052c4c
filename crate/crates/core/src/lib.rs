//! Simulation and analysis toolkit for data links between intensity-steered
//! IR LEDs and video cameras: bit framing, modulation, the optical channel
//! in both direct and reflected geometry, camera-side decoding, and an
//! emulated network camera with its transmitter client.

// Validations use the `!(x > 0.0)` form on floats deliberately: unlike
// `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bitframe;
pub mod camsim;
pub mod channel;
pub mod cli;
pub mod modem;
pub mod optics;
pub mod vision;
