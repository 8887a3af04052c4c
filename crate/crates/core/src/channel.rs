//! Receiver-side channel simulation: turns a transmitter timeline into the
//! sampled, noisy, quantized brightness a camera would record.
//!
//! The LED controller model reflects measured hardware behavior: an accepted
//! level change ramps linearly over the transition time and the controller
//! ignores further change commands until the ramp completes. Driving the LED
//! faster than one change per transition period therefore loses commands,
//! which is what caps the usable symbol rate on the transmitter side.

use crate::modem::SignalTimeline;
use crate::optics::{received_power_los, OpticalLinkParams, OpticsError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("camera model invalid: {0}")]
    Camera(&'static str),
    #[error("level table invalid: {0}")]
    Levels(&'static str),
    #[error("timeline references level {level} but the table has {n} levels")]
    LevelOutOfRange { level: usize, n: usize },
    #[error("blob region invalid: {0}")]
    Geometry(&'static str),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error("frame stream: {0}")]
    Stream(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How a frame sample integrates light over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExposureModel {
    /// Sample the waveform at the frame timestamp.
    #[default]
    Instantaneous,
    /// Average the waveform over the whole frame period.
    FrameAverage,
}

/// Receiving camera characteristics.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub fps: f64,
    pub quantization_bits: u32,
    pub width: usize,
    pub height: usize,
    pub exposure: ExposureModel,
}

impl CameraModel {
    pub fn new(fps: f64) -> Self {
        Self {
            fps,
            quantization_bits: 8,
            width: 64,
            height: 48,
            exposure: ExposureModel::Instantaneous,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.fps > 0.0) {
            return Err(ChannelError::Camera("fps must be positive"));
        }
        if !(1..=16).contains(&self.quantization_bits) {
            return Err(ChannelError::Camera("quantization bits must be in [1, 16]"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(ChannelError::Camera("frame size must be non-zero"));
        }
        Ok(())
    }

    pub fn frame_period_ms(&self) -> f64 {
        1000.0 / self.fps
    }
}

/// LED intensity transition behavior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionModel {
    pub transition_ms: f64,
}

impl Default for TransitionModel {
    fn default() -> Self {
        Self { transition_ms: 50.0 }
    }
}

/// Relative emitted power per intensity level, non-decreasing, top level 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTable {
    relative: Vec<f64>,
}

impl LevelTable {
    /// Evenly spaced levels from dark to full power.
    pub fn linear(n_levels: usize) -> Result<Self, ChannelError> {
        if n_levels < 2 {
            return Err(ChannelError::Levels("need at least two levels"));
        }
        let top = (n_levels - 1) as f64;
        Ok(Self {
            relative: (0..n_levels).map(|i| i as f64 / top).collect(),
        })
    }

    pub fn from_relative(relative: Vec<f64>) -> Result<Self, ChannelError> {
        if relative.len() < 2 {
            return Err(ChannelError::Levels("need at least two levels"));
        }
        if relative.windows(2).any(|w| w[1] < w[0]) {
            return Err(ChannelError::Levels("relative powers must be non-decreasing"));
        }
        if relative.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
            return Err(ChannelError::Levels("relative powers must be in [0, 1]"));
        }
        Ok(Self { relative })
    }

    pub fn n_levels(&self) -> usize {
        self.relative.len()
    }

    pub fn relative_power(&self, level: usize) -> Result<f64, ChannelError> {
        self.relative
            .get(level)
            .copied()
            .ok_or(ChannelError::LevelOutOfRange { level, n: self.relative.len() })
    }
}

/// One brightness sample of the recorded signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t_ms: f64,
    pub value: f64,
}

/// Per-frame brightness series at the camera frame rate, normalized to [0, 1].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntensityTrace {
    pub fps: f64,
    pub samples: Vec<TraceSample>,
}

impl IntensityTrace {
    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Random square-wave interference mixed into the recorded trace.
#[derive(Debug, Clone, PartialEq)]
pub struct JammerParams {
    pub enabled: bool,
    pub blink_rate_hz: f64,
    pub amplitude: f64,
    pub seed: u64,
}

/// Piecewise-linear LED waveform with controller lockout.
struct LedWaveform {
    initial: f64,
    // (start_ms, from, to); ramps are disjoint and sorted by start.
    ramps: Vec<(f64, f64, f64)>,
    transition_ms: f64,
}

impl LedWaveform {
    fn build(
        timeline: &SignalTimeline,
        levels: &LevelTable,
        tm: &TransitionModel,
    ) -> Result<Self, ChannelError> {
        let mut ramps = Vec::new();
        let initial = levels.relative_power(timeline.segments[0].level)?;
        let mut target = initial;
        let mut busy_until = f64::NEG_INFINITY;
        let mut t = timeline.segments[0].duration_ms;
        for segment in &timeline.segments[1..] {
            let value = levels.relative_power(segment.level)?;
            if value != target && t >= busy_until - 1e-9 {
                ramps.push((t, target, value));
                busy_until = t + tm.transition_ms;
                target = value;
            }
            // A command landing mid-transition is ignored by the controller.
            t += segment.duration_ms;
        }
        Ok(Self { initial, ramps, transition_ms: tm.transition_ms })
    }

    fn value_at(&self, t_ms: f64) -> f64 {
        // Ramps are sparse; binary search for the last one started.
        let idx = self.ramps.partition_point(|&(start, _, _)| start <= t_ms);
        if idx == 0 {
            return self.initial;
        }
        let (start, from, to) = self.ramps[idx - 1];
        if self.transition_ms <= 0.0 || t_ms >= start + self.transition_ms {
            to
        } else {
            from + (to - from) * (t_ms - start) / self.transition_ms
        }
    }

    fn mean_over(&self, t0_ms: f64, t1_ms: f64, steps: usize) -> f64 {
        let dt = (t1_ms - t0_ms) / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            acc += self.value_at(t0_ms + (i as f64 + 0.5) * dt);
        }
        acc / steps as f64
    }
}

/// Noise standard deviation in normalized brightness units: the same scale
/// factor that maps the full-power photocurrent to 1.0 is applied to sigma_n,
/// so the current-domain SNR carries over unchanged.
pub fn normalized_noise_sigma(link: &OpticalLinkParams) -> Result<f64, ChannelError> {
    if link.noise_sigma_a == 0.0 {
        return Ok(0.0);
    }
    let full_power_current = link.responsivity_a_per_w * received_power_los(link)?;
    Ok(link.noise_sigma_a / full_power_current)
}

fn quantize(value: f64, bits: u32) -> f64 {
    let steps = ((1u32 << bits) - 1) as f64;
    (value.clamp(0.0, 1.0) * steps).round() / steps
}

/// Number of frame samples falling inside a duration, endpoint excluded.
fn sample_count(duration_ms: f64, frame_period_ms: f64) -> usize {
    if duration_ms <= 0.0 {
        return 0;
    }
    let guard = duration_ms - 1e-6 * frame_period_ms;
    (guard / frame_period_ms).floor() as usize + 1
}

/// True when the timeline is too short for even one full frame period.
pub fn undersampled(timeline: &SignalTimeline, cam: &CameraModel) -> bool {
    timeline.total_duration_ms() < cam.frame_period_ms()
}

/// Renders the brightness trace a camera records for `timeline`.
///
/// The waveform is scaled by the line-of-sight link budget and responsivity,
/// normalized so the top level maps to 1.0, disturbed by Gaussian noise of
/// the (equally normalized) receiver sigma, sampled at the frame rate and
/// quantized. Identical inputs and seed give identical traces.
pub fn render_trace(
    timeline: &SignalTimeline,
    cam: &CameraModel,
    levels: &LevelTable,
    link: &OpticalLinkParams,
    tm: &TransitionModel,
    seed: u64,
) -> Result<IntensityTrace, ChannelError> {
    cam.validate()?;
    if timeline.is_empty() {
        return Err(ChannelError::Geometry("timeline is empty"));
    }
    let sigma = normalized_noise_sigma(link)?;
    let waveform = LedWaveform::build(timeline, levels, tm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let frame_period = cam.frame_period_ms();
    let n = sample_count(timeline.total_duration_ms(), frame_period);
    let mut samples = Vec::with_capacity(n);
    for m in 0..n {
        let t_ms = m as f64 * frame_period;
        let clean = match cam.exposure {
            ExposureModel::Instantaneous => waveform.value_at(t_ms),
            ExposureModel::FrameAverage => waveform.mean_over(t_ms, t_ms + frame_period, 16),
        };
        let noisy = if sigma > 0.0 {
            clean + sigma * normal.sample(&mut rng)
        } else {
            clean
        };
        samples.push(TraceSample { t_ms, value: quantize(noisy, cam.quantization_bits) });
    }
    Ok(IntensityTrace { fps: cam.fps, samples })
}

/// Rectangular pixel region, in frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlobSpec {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl BlobSpec {
    pub fn centered(cam: &CameraModel, width: usize, height: usize) -> Self {
        Self {
            x: cam.width.saturating_sub(width) / 2,
            y: cam.height.saturating_sub(height) / 2,
            width,
            height,
        }
    }
}

/// Static scene the LED blob is rendered into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundModel {
    pub level: f64,
    pub pixel_noise_std: f64,
}

impl Default for BackgroundModel {
    fn default() -> Self {
        // Mid-gray scene with mild sensor noise.
        Self { level: 0.45, pixel_noise_std: 0.02 }
    }
}

/// A rendered grayscale video clip, plus its on-disk / on-wire format.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoFrameStream {
    pub fps: f64,
    pub width: usize,
    pub height: usize,
    pub frames: Vec<Vec<u8>>,
}

/// Renders full frames: blob pixels follow the rendered trace, everything
/// else sits at the background level, with independent pixel noise on top.
#[allow(clippy::too_many_arguments)]
pub fn render_frames(
    timeline: &SignalTimeline,
    cam: &CameraModel,
    blob: &BlobSpec,
    levels: &LevelTable,
    link: &OpticalLinkParams,
    tm: &TransitionModel,
    background: &BackgroundModel,
    seed: u64,
) -> Result<VideoFrameStream, ChannelError> {
    cam.validate()?;
    if blob.width == 0 || blob.height == 0 {
        return Err(ChannelError::Geometry("blob region is empty"));
    }
    if blob.x + blob.width > cam.width || blob.y + blob.height > cam.height {
        return Err(ChannelError::Geometry("blob region exceeds frame bounds"));
    }
    let trace = render_trace(timeline, cam, levels, link, tm, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut frames = Vec::with_capacity(trace.len());
    for sample in &trace.samples {
        let mut frame = vec![0u8; cam.width * cam.height];
        for y in 0..cam.height {
            for x in 0..cam.width {
                let in_blob = x >= blob.x
                    && x < blob.x + blob.width
                    && y >= blob.y
                    && y < blob.y + blob.height;
                let base = if in_blob { sample.value } else { background.level };
                let noisy = base + background.pixel_noise_std * normal.sample(&mut rng);
                frame[y * cam.width + x] = (noisy.clamp(0.0, 1.0) * 255.0).round() as u8;
            }
        }
        frames.push(frame);
    }
    Ok(VideoFrameStream { fps: cam.fps, width: cam.width, height: cam.height, frames })
}

/// Mixes a seeded random square wave into the trace, clipping to [0, 1].
pub fn apply_jammer(trace: &IntensityTrace, j: &JammerParams) -> IntensityTrace {
    if !j.enabled || j.amplitude == 0.0 || trace.is_empty() {
        return trace.clone();
    }
    let interval_ms = 1000.0 / j.blink_rate_hz;
    let last_t = trace.samples.last().expect("non-empty").t_ms;
    let n_intervals = (last_t / interval_ms).floor() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(j.seed);
    let pattern: Vec<bool> = (0..n_intervals).map(|_| rand::Rng::gen_bool(&mut rng, 0.5)).collect();
    let samples = trace
        .samples
        .iter()
        .map(|s| {
            let idx = ((s.t_ms / interval_ms).floor() as usize).min(n_intervals - 1);
            let jam = if pattern[idx] { j.amplitude } else { 0.0 };
            TraceSample { t_ms: s.t_ms, value: (s.value + jam).clamp(0.0, 1.0) }
        })
        .collect();
    IntensityTrace { fps: trace.fps, samples }
}

// ---------------------------------------------------------------------------
// Frame stream serialization: a manifest plus raw 8-bit grayscale frames.
// ---------------------------------------------------------------------------

impl VideoFrameStream {
    fn manifest(&self) -> String {
        format!(
            "fps={}\nwidth={}\nheight={}\nframes={}\n",
            self.fps,
            self.width,
            self.height,
            self.frames.len()
        )
    }

    fn parse_manifest(text: &str) -> Result<(f64, usize, usize, usize), ChannelError> {
        let mut fps = None;
        let mut width = None;
        let mut height = None;
        let mut frames = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ChannelError::Stream(format!("bad manifest line '{line}'")))?;
            match key {
                "fps" => fps = value.parse().ok(),
                "width" => width = value.parse().ok(),
                "height" => height = value.parse().ok(),
                "frames" => frames = value.parse().ok(),
                other => return Err(ChannelError::Stream(format!("unknown manifest key '{other}'"))),
            }
        }
        match (fps, width, height, frames) {
            (Some(f), Some(w), Some(h), Some(n)) => Ok((f, w, h, n)),
            _ => Err(ChannelError::Stream("manifest missing fields".into())),
        }
    }

    /// Writes `manifest.txt` plus one raw grayscale file per frame.
    pub fn write_dir(&self, dir: &Path) -> Result<(), ChannelError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("manifest.txt"), self.manifest())?;
        for (i, frame) in self.frames.iter().enumerate() {
            std::fs::write(dir.join(format!("frame_{i:06}.raw")), frame)?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self, ChannelError> {
        let manifest = std::fs::read_to_string(dir.join("manifest.txt"))?;
        let (fps, width, height, n) = Self::parse_manifest(&manifest)?;
        let mut frames = Vec::with_capacity(n);
        for i in 0..n {
            let frame = std::fs::read(dir.join(format!("frame_{i:06}.raw")))?;
            if frame.len() != width * height {
                return Err(ChannelError::Stream(format!(
                    "frame {i} has {} bytes, expected {}",
                    frame.len(),
                    width * height
                )));
            }
            frames.push(frame);
        }
        Ok(Self { fps, width, height, frames })
    }

    /// Single-stream form: manifest, blank line, then raw frames back to back.
    pub fn write_stream<W: Write>(&self, mut w: W) -> Result<(), ChannelError> {
        w.write_all(self.manifest().as_bytes())?;
        w.write_all(b"\n")?;
        for frame in &self.frames {
            w.write_all(frame)?;
        }
        Ok(())
    }

    pub fn read_stream<R: Read>(mut r: R) -> Result<Self, ChannelError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let split = bytes
            .windows(2)
            .position(|w| w == b"\n\n")
            .ok_or_else(|| ChannelError::Stream("missing manifest terminator".into()))?;
        let manifest = std::str::from_utf8(&bytes[..split + 1])
            .map_err(|_| ChannelError::Stream("manifest is not UTF-8".into()))?;
        let (fps, width, height, n) = Self::parse_manifest(manifest)?;
        let mut offset = split + 2;
        let frame_len = width * height;
        let mut frames = Vec::with_capacity(n);
        for i in 0..n {
            if offset + frame_len > bytes.len() {
                return Err(ChannelError::Stream(format!("truncated at frame {i}")));
            }
            frames.push(bytes[offset..offset + frame_len].to_vec());
            offset += frame_len;
        }
        Ok(Self { fps, width, height, frames })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitframe::Bitstream;
    use crate::modem::{encode_ook, SchemeParams};

    fn link() -> OpticalLinkParams {
        OpticalLinkParams::reference()
    }

    fn quiet_link() -> OpticalLinkParams {
        let mut l = link();
        l.noise_sigma_a = 0.0;
        l
    }

    fn constant_timeline(level: usize, ms: f64) -> SignalTimeline {
        let mut tl = SignalTimeline::new();
        tl.push(level, ms);
        tl
    }

    #[test]
    fn constant_level_gives_constant_trace() {
        let cam = CameraModel::new(30.0);
        let levels = LevelTable::linear(5).unwrap();
        let trace = render_trace(
            &constant_timeline(2, 1000.0),
            &cam,
            &levels,
            &quiet_link(),
            &TransitionModel::default(),
            7,
        )
        .unwrap();
        assert_eq!(trace.len(), 30);
        for s in &trace.samples {
            assert!((s.value - 0.5).abs() <= 1.0 / 255.0);
        }
    }

    #[test]
    fn symbol_period_spans_two_frames_at_thirty_fps() {
        let scheme = SchemeParams::for_rate(crate::modem::SchemeKind::Ook, 15.0, 2).unwrap();
        let bits = Bitstream::from_bits(&[1, 0, 1, 0, 1, 0, 1, 0]).unwrap();
        let tl = encode_ook(&bits, &scheme).unwrap();
        let cam = CameraModel::new(30.0);
        let trace = render_trace(
            &tl,
            &cam,
            &LevelTable::linear(2).unwrap(),
            &quiet_link(),
            &TransitionModel::default(),
            7,
        )
        .unwrap();
        assert!(trace.len() >= 2 * bits.len());
    }

    #[test]
    fn identical_seed_identical_trace() {
        let cam = CameraModel::new(60.0);
        let levels = LevelTable::linear(2).unwrap();
        let tl = constant_timeline(1, 500.0);
        // Noise large enough to be visible through 8-bit quantization.
        let mut l = link();
        l.noise_sigma_a = 1e-6;
        let a = render_trace(&tl, &cam, &levels, &l, &TransitionModel::default(), 42).unwrap();
        let b = render_trace(&tl, &cam, &levels, &l, &TransitionModel::default(), 42).unwrap();
        assert_eq!(a, b);
        let c = render_trace(&tl, &cam, &levels, &l, &TransitionModel::default(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn transition_ramps_linearly() {
        let mut tl = SignalTimeline::new();
        tl.push(0, 100.0);
        tl.push(1, 100.0);
        let cam = CameraModel {
            quantization_bits: 16,
            ..CameraModel::new(1000.0)
        };
        let trace = render_trace(
            &tl,
            &cam,
            &LevelTable::linear(2).unwrap(),
            &quiet_link(),
            &TransitionModel::default(),
            1,
        )
        .unwrap();
        let v = |ms: usize| trace.samples[ms].value;
        assert_eq!(v(99), 0.0);
        assert!((v(125) - 0.5).abs() < 0.02);
        assert!((v(150) - 1.0).abs() < 1e-4);
        assert!((v(110) - 0.2).abs() < 0.02);
    }

    #[test]
    fn commands_during_transition_are_dropped() {
        // Alternating 25 ms segments command changes twice as fast as the
        // 50 ms transition allows; the mid-ramp reversal must be lost.
        let mut tl = SignalTimeline::new();
        for i in 0..8 {
            tl.push(i % 2, 25.0);
        }
        let cam = CameraModel {
            quantization_bits: 16,
            ..CameraModel::new(1000.0)
        };
        let trace = render_trace(
            &tl,
            &cam,
            &LevelTable::linear(2).unwrap(),
            &quiet_link(),
            &TransitionModel::default(),
            1,
        )
        .unwrap();
        // Ramp up [25, 75]; the command at t=50 is ignored, and the one at
        // t=75 is a no-op because the level is already reached.
        assert!((trace.samples[74].value - 1.0).abs() < 0.03);
        assert!((trace.samples[99].value - 1.0).abs() < 1e-9);
        // The command at t=100 is the next accepted change, ramping down
        // over [100, 150]; the reversal at t=125 is lost again.
        assert!((trace.samples[110].value - 0.8).abs() < 0.03);
        assert!(trace.samples[149].value < 0.05);
    }

    #[test]
    fn undersampled_flag_for_short_timelines() {
        let cam = CameraModel::new(30.0);
        assert!(undersampled(&constant_timeline(1, 10.0), &cam));
        assert!(!undersampled(&constant_timeline(1, 100.0), &cam));
        let trace = render_trace(
            &constant_timeline(1, 10.0),
            &cam,
            &LevelTable::linear(2).unwrap(),
            &quiet_link(),
            &TransitionModel::default(),
            1,
        )
        .unwrap();
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn energy_ordering_survives_noise() {
        let cam = CameraModel::new(60.0);
        let levels = LevelTable::linear(5).unwrap();
        //

        let mut l = link();
        // Separation between adjacent levels is 0.25 normalized; keep
        // sigma well under a sixth of that.
        l.noise_sigma_a = 2e-9;
        for seed in 0..5u64 {
            let mut means = Vec::new();
            for level in 0..5 {
                let trace = render_trace(
                    &constant_timeline(level, 1000.0),
                    &cam,
                    &levels,
                    &l,
                    &TransitionModel::default(),
                    seed,
                )
                .unwrap();
                let mean: f64 = trace.values().iter().sum::<f64>() / trace.len() as f64;
                means.push(mean);
            }
            for pair in means.windows(2) {
                assert!(pair[1] > pair[0], "means must increase with level: {means:?}");
            }
        }
    }

    #[test]
    fn frames_follow_trace_in_blob_region() {
        let cam = CameraModel::new(30.0);
        let levels = LevelTable::linear(5).unwrap();
        // Mid-range level so pixel noise is not clipped at either end.
        let tl = constant_timeline(2, 1000.0);
        let blob = BlobSpec { x: 10, y: 10, width: 12, height: 12 };
        let stream = render_frames(
            &tl,
            &cam,
            &blob,
            &levels,
            &quiet_link(),
            &TransitionModel::default(),
            &BackgroundModel::default(),
            9,
        )
        .unwrap();
        assert_eq!(stream.frames.len(), 30);
        let trace = render_trace(&tl, &cam, &levels, &quiet_link(), &TransitionModel::default(), 9)
            .unwrap();
        for (frame, sample) in stream.frames.iter().zip(&trace.samples) {
            let mut acc = 0.0;
            for y in blob.y..blob.y + blob.height {
                for x in blob.x..blob.x + blob.width {
                    acc += frame[y * cam.width + x] as f64 / 255.0;
                }
            }
            let mean = acc / (blob.width * blob.height) as f64;
            let tolerance = 1.0 / 255.0 + 3.0 * 0.02 / ((blob.width * blob.height) as f64).sqrt();
            assert!((mean - sample.value).abs() < tolerance);
        }
    }

    #[test]
    fn blob_geometry_is_validated() {
        let cam = CameraModel::new(30.0);
        let levels = LevelTable::linear(2).unwrap();
        let tl = constant_timeline(1, 100.0);
        let zero = BlobSpec { x: 0, y: 0, width: 0, height: 0 };
        assert!(matches!(
            render_frames(&tl, &cam, &zero, &levels, &quiet_link(), &TransitionModel::default(), &BackgroundModel::default(), 1),
            Err(ChannelError::Geometry(_))
        ));
        let oob = BlobSpec { x: 60, y: 40, width: 10, height: 10 };
        assert!(matches!(
            render_frames(&tl, &cam, &oob, &levels, &quiet_link(), &TransitionModel::default(), &BackgroundModel::default(), 1),
            Err(ChannelError::Geometry(_))
        ));
    }

    #[test]
    fn jammer_zero_amplitude_is_identity() {
        let cam = CameraModel::new(30.0);
        let trace = render_trace(
            &constant_timeline(1, 500.0),
            &cam,
            &LevelTable::linear(2).unwrap(),
            &link(),
            &TransitionModel::default(),
            3,
        )
        .unwrap();
        let j = JammerParams { enabled: true, blink_rate_hz: 10.0, amplitude: 0.0, seed: 1 };
        assert_eq!(apply_jammer(&trace, &j), trace);
    }

    #[test]
    fn jammer_is_reproducible_and_clipped() {
        let cam = CameraModel::new(60.0);
        // Dark trace so the additive jam is not absorbed by clipping.
        let trace = render_trace(
            &constant_timeline(0, 1000.0),
            &cam,
            &LevelTable::linear(2).unwrap(),
            &link(),
            &TransitionModel::default(),
            3,
        )
        .unwrap();
        let j = JammerParams { enabled: true, blink_rate_hz: 7.0, amplitude: 0.6, seed: 99 };
        let a = apply_jammer(&trace, &j);
        let b = apply_jammer(&trace, &j);
        assert_eq!(a, b);
        assert_ne!(a, trace);
        assert!(a.samples.iter().all(|s| (0.0..=1.0).contains(&s.value)));
    }

    #[test]
    fn frame_stream_dir_and_stream_roundtrip() {
        let cam = CameraModel::new(30.0);
        let stream = render_frames(
            &constant_timeline(1, 200.0),
            &cam,
            &BlobSpec::centered(&cam, 8, 8),
            &LevelTable::linear(2).unwrap(),
            &quiet_link(),
            &TransitionModel::default(),
            &BackgroundModel::default(),
            5,
        )
        .unwrap();

        let dir = tempfile::tempdir().unwrap();
        stream.write_dir(dir.path()).unwrap();
        assert_eq!(VideoFrameStream::read_dir(dir.path()).unwrap(), stream);

        let mut bytes = Vec::new();
        stream.write_stream(&mut bytes).unwrap();
        assert_eq!(VideoFrameStream::read_stream(&bytes[..]).unwrap(), stream);
    }
}
