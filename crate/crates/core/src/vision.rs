//! Receiver pipeline: find the LED in a video stream, extract its per-frame
//! brightness, calibrate decision thresholds, demodulate symbols and
//! reassemble framed payloads.
//!
//! Symbol decisions favor samples taken after the LED transition has
//! settled; at rates where a symbol is all ramp, the sample closest to the
//! symbol end carries the achieved level. Frame synchronization is done by
//! scanning the demodulated bit sequence for the alternating preamble, so
//! whole-symbol misalignment at the head of a recording is harmless.

use crate::bitframe::{parse_frame, BitframeError, Bitstream, FRAME_BITS, PREAMBLE};
use crate::channel::{IntensityTrace, TraceSample, VideoFrameStream};
use crate::modem::{SchemeKind, SchemeParams, DURATION_TOLERANCE};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum VisionError {
    #[error("region of interest invalid: {0}")]
    Geometry(&'static str),
    #[error("no region with temporal variance above {floor}")]
    NotFound { floor: f64 },
    #[error("calibration failed: {0}")]
    Calibration(&'static str),
    #[error("{samples_per_symbol:.2} samples per symbol, need at least 2")]
    Undersampled { samples_per_symbol: f64 },
    #[error("bit streams differ in length: {sent} vs {received}")]
    LengthMismatch { sent: usize, received: usize },
}

/// Rectangular pixel region within frame bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionOfInterest {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

/// Receiver-side decision parameters recovered from (or configured for) a
/// recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// Estimated brightness per transmitted level, ascending.
    pub level_values: Vec<f64>,
    /// Decision boundaries between adjacent levels, ascending.
    pub thresholds: Vec<f64>,
    /// Symbol period estimated from preamble edge spacing, 0 when unknown.
    pub symbol_period_ms: f64,
    /// LED transition time assumed when picking settled samples.
    pub settle_ms: f64,
    /// Half-width of the ambiguity band around each threshold.
    pub erasure_guard: f64,
}

/// Tunables for the full decode pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeConfig {
    pub settle_ms: f64,
    pub erasure_guard: f64,
    /// Minimum per-pixel temporal variance for LED localization.
    pub variance_floor: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self { settle_ms: 50.0, erasure_guard: 0.02, variance_floor: 0.004 }
    }
}

/// Outcome of decoding one recording.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecodeReport {
    /// Recovered 256-bit payloads, in arrival order.
    pub payloads: Vec<Bitstream>,
    pub frames_ok: usize,
    pub frames_crc_failed: usize,
    pub frames_sync_failed: usize,
    pub erasures: usize,
    /// Bit error rate against a reference transmission, when one is given.
    pub ber: Option<f64>,
}

impl DecodeReport {
    /// Line-oriented plain-text form with a stable field order.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "frames_ok={}\nframes_crc_failed={}\nframes_sync_failed={}\nerasures={}\n",
            self.frames_ok, self.frames_crc_failed, self.frames_sync_failed, self.erasures
        );
        for payload in &self.payloads {
            let bytes = payload.to_bytes().expect("payloads are byte-aligned");
            out.push_str("payload=");
            for b in bytes {
                out.push_str(&format!("{b:02x}"));
            }
            out.push('\n');
        }
        if let Some(ber) = self.ber {
            out.push_str(&format!("ber={ber:.6}\n"));
        }
        out
    }
}

/// Mean brightness of the region per frame, normalized to [0, 1].
pub fn extract_intensity(
    frames: &VideoFrameStream,
    roi: &RegionOfInterest,
) -> Result<IntensityTrace, VisionError> {
    if roi.width == 0 || roi.height == 0 {
        return Err(VisionError::Geometry("region is empty"));
    }
    if roi.x + roi.width > frames.width || roi.y + roi.height > frames.height {
        return Err(VisionError::Geometry("region exceeds frame bounds"));
    }
    let period_ms = 1000.0 / frames.fps;
    let scale = 1.0 / (roi.width * roi.height) as f64 / 255.0;
    let samples = frames
        .frames
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let mut acc = 0.0;
            for y in roi.y..roi.y + roi.height {
                for x in roi.x..roi.x + roi.width {
                    acc += frame[y * frames.width + x] as f64;
                }
            }
            TraceSample { t_ms: i as f64 * period_ms, value: acc * scale }
        })
        .collect();
    Ok(IntensityTrace { fps: frames.fps, samples })
}

/// Finds the LED as the connected pixel region with the highest summed
/// temporal brightness variance. Ties break toward the top-left region.
pub fn locate_led(
    frames: &VideoFrameStream,
    variance_floor: f64,
) -> Result<RegionOfInterest, VisionError> {
    if frames.frames.is_empty() {
        return Err(VisionError::NotFound { floor: variance_floor });
    }
    let n = frames.frames.len() as f64;
    let pixels = frames.width * frames.height;
    let mut mean = vec![0.0f64; pixels];
    for frame in &frames.frames {
        for (m, &p) in mean.iter_mut().zip(frame.iter()) {
            *m += p as f64 / 255.0;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut variance = vec![0.0f64; pixels];
    for frame in &frames.frames {
        for ((v, &m), &p) in variance.iter_mut().zip(mean.iter()).zip(frame.iter()) {
            let d = p as f64 / 255.0 - m;
            *v += d * d;
        }
    }
    for v in &mut variance {
        *v /= n;
    }

    // Connected components (4-neighborhood) over above-floor pixels.
    let mut visited = vec![false; pixels];
    let mut best: Option<(f64, usize, usize, RegionOfInterest)> = None;
    for start in 0..pixels {
        if visited[start] || variance[start] < variance_floor {
            continue;
        }
        let mut stack = vec![start];
        visited[start] = true;
        let (mut min_x, mut min_y, mut max_x, mut max_y) = (usize::MAX, usize::MAX, 0, 0);
        let mut total = 0.0;
        while let Some(idx) = stack.pop() {
            let x = idx % frames.width;
            let y = idx / frames.width;
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
            total += variance[idx];
            let mut consider = |nx: usize, ny: usize| {
                let nidx = ny * frames.width + nx;
                if !visited[nidx] && variance[nidx] >= variance_floor {
                    visited[nidx] = true;
                    stack.push(nidx);
                }
            };
            if x > 0 {
                consider(x - 1, y);
            }
            if x + 1 < frames.width {
                consider(x + 1, y);
            }
            if y > 0 {
                consider(x, y - 1);
            }
            if y + 1 < frames.height {
                consider(x, y + 1);
            }
        }
        let roi = RegionOfInterest {
            x: min_x,
            y: min_y,
            width: max_x - min_x + 1,
            height: max_y - min_y + 1,
        };
        let candidate = (total, min_y, min_x, roi);
        let better = match &best {
            None => true,
            Some((t, y, x, _)) => {
                candidate.0 > *t || (candidate.0 == *t && (min_y, min_x) < (*y, *x))
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    best.map(|(_, _, _, roi)| roi)
        .ok_or(VisionError::NotFound { floor: variance_floor })
}

/// Median gap between classification changes, scanned over the head of the
/// trace; returns 0 when fewer than two edges exist.
fn estimate_symbol_period(trace: &IntensityTrace, thresholds: &[f64]) -> f64 {
    let rank = |v: f64| thresholds.iter().filter(|&&t| v > t).count();
    let mut edges = Vec::new();
    let mut last = None;
    for s in &trace.samples {
        let r = rank(s.value);
        if let Some(prev) = last {
            if r != prev {
                edges.push(s.t_ms);
                if edges.len() >= 16 {
                    break;
                }
            }
        }
        last = Some(r);
    }
    if edges.len() < 2 {
        return 0.0;
    }
    let mut gaps: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite gaps"));
    gaps[gaps.len() / 2]
}

/// Estimates per-level brightness and decision thresholds from a trace.
///
/// Two levels use the temporal mean of the sampled signal as the threshold;
/// more levels are clustered (k-means over sample values) with thresholds at
/// adjacent cluster midpoints. Fails when levels are not separable.
pub fn estimate_thresholds(
    trace: &IntensityTrace,
    n_levels: usize,
) -> Result<Calibration, VisionError> {
    estimate_thresholds_with(trace, n_levels, &DecodeConfig::default())
}

pub fn estimate_thresholds_with(
    trace: &IntensityTrace,
    n_levels: usize,
    config: &DecodeConfig,
) -> Result<Calibration, VisionError> {
    if n_levels < 2 {
        return Err(VisionError::Calibration("need at least two levels"));
    }
    if trace.len() < 2 * n_levels {
        return Err(VisionError::Calibration("trace too short to calibrate"));
    }
    let values: Vec<f64> = trace.values();

    let (level_values, thresholds) = if n_levels == 2 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let low: Vec<f64> = values.iter().copied().filter(|&v| v <= mean).collect();
        let high: Vec<f64> = values.iter().copied().filter(|&v| v > mean).collect();
        if low.is_empty() || high.is_empty() {
            return Err(VisionError::Calibration("levels are indistinguishable"));
        }
        let lo = low.iter().sum::<f64>() / low.len() as f64;
        let hi = high.iter().sum::<f64>() / high.len() as f64;
        let spread = |xs: &[f64], c: f64| {
            (xs.iter().map(|x| (x - c) * (x - c)).sum::<f64>() / xs.len() as f64).sqrt()
        };
        let noise = spread(&low, lo).max(spread(&high, hi));
        if hi - lo <= 2.0 * noise {
            return Err(VisionError::Calibration("levels are indistinguishable"));
        }
        (vec![lo, hi], vec![mean])
    } else {
        // Samples taken mid-transition lie between levels and would smear
        // the clusters. Settled samples are weak local extrema of the
        // sequence (plateaus, or the turning points between back-to-back
        // ramps), while ramp interiors are strictly monotone; keep only the
        // extrema when there are enough of them.
        let mut extrema = Vec::new();
        for i in 1..values.len().saturating_sub(1) {
            let (prev, v, next) = (values[i - 1], values[i], values[i + 1]);
            if (v >= prev && v >= next) || (v <= prev && v <= next) {
                extrema.push(v);
            }
        }
        if extrema.len() >= 4 * n_levels {
            kmeans_levels(&extrema, n_levels)?
        } else {
            kmeans_levels(&values, n_levels)?
        }
    };

    let symbol_period_ms = estimate_symbol_period(trace, &thresholds);
    Ok(Calibration {
        level_values,
        thresholds,
        symbol_period_ms,
        settle_ms: config.settle_ms,
        erasure_guard: config.erasure_guard,
    })
}

fn kmeans_levels(values: &[f64], k: usize) -> Result<(Vec<f64>, Vec<f64>), VisionError> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    sorted.dedup();
    if sorted.len() < k {
        return Err(VisionError::Calibration("fewer distinct values than levels"));
    }
    // Quantile initialization over distinct values keeps the outcome
    // deterministic without seeding.
    let mut centers: Vec<f64> = (0..k)
        .map(|i| sorted[((i as f64 + 0.5) / k as f64 * sorted.len() as f64) as usize])
        .collect();
    let mut assignment = vec![0usize; values.len()];
    for _ in 0..64 {
        let mut changed = false;
        for (i, &v) in values.iter().enumerate() {
            let nearest = centers
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - v).abs().partial_cmp(&(b.1 - v).abs()).expect("finite")
                })
                .map(|(idx, _)| idx)
                .expect("k >= 2");
            if assignment[i] != nearest {
                assignment[i] = nearest;
                changed = true;
            }
        }
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (i, &v) in values.iter().enumerate() {
            sums[assignment[i]] += v;
            counts[assignment[i]] += 1;
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Restart a starved cluster at the sample farthest from its
                // current center; deterministic (first maximizer wins).
                let (mut far_idx, mut far_dist) = (0usize, -1.0);
                for (i, &v) in values.iter().enumerate() {
                    let d = (v - centers[assignment[i]]).abs();
                    if d > far_dist {
                        far_dist = d;
                        far_idx = i;
                    }
                }
                centers[c] = values[far_idx];
                assignment[far_idx] = c;
                changed = true;
            } else {
                centers[c] = sums[c] / counts[c] as f64;
            }
        }
        if !changed {
            break;
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centers[a].partial_cmp(&centers[b]).expect("finite"));
    let level_values: Vec<f64> = order.iter().map(|&c| centers[c]).collect();

    let mut spreads = vec![0.0f64; k];
    let mut counts = vec![0usize; k];
    for (i, &v) in values.iter().enumerate() {
        let d = v - centers[assignment[i]];
        spreads[assignment[i]] += d * d;
        counts[assignment[i]] += 1;
    }
    let max_spread = (0..k)
        .map(|c| (spreads[c] / counts[c] as f64).sqrt())
        .fold(0.0f64, f64::max);
    let min_gap = level_values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if min_gap <= 2.0 * max_spread {
        return Err(VisionError::Calibration("levels are indistinguishable"));
    }
    let thresholds = level_values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    Ok((level_values, thresholds))
}

/// Demodulated bits plus the number of symbols skipped as ambiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct DemodOutput {
    pub bits: Bitstream,
    pub erasures: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Classified {
    Rank(usize),
    Erased,
}

fn classify(value: f64, cal: &Calibration) -> Classified {
    for &t in &cal.thresholds {
        if (value - t).abs() <= cal.erasure_guard {
            return Classified::Erased;
        }
    }
    Classified::Rank(cal.thresholds.iter().filter(|&&t| value > t).count())
}

/// Inverse of the modulation mappings over a sampled trace.
///
/// Uniform-grid schemes (on-off keying with equal durations, amplitude
/// keying) are decided per symbol window by majority vote over settled
/// samples, falling back to the sample nearest the window end when the
/// whole window is ramp. Duration-keyed schemes are decided from run
/// lengths between separator levels.
pub fn demodulate(
    trace: &IntensityTrace,
    cal: &Calibration,
    scheme: &SchemeParams,
) -> Result<DemodOutput, VisionError> {
    let used = scheme.used_levels();
    if cal.level_values.len() != used.len() {
        return Err(VisionError::Calibration("calibration does not match scheme levels"));
    }
    let spp = trace.fps * scheme.min_segment_ms() / 1000.0;
    if spp + 1e-9 < 2.0 {
        return Err(VisionError::Undersampled { samples_per_symbol: spp });
    }
    if trace.is_empty() {
        return Ok(DemodOutput { bits: Bitstream::new(), erasures: 0 });
    }
    match scheme.kind {
        SchemeKind::Ook if scheme.t_on_ms == scheme.t_off_ms => {
            decode_grid(trace, cal, scheme, &used)
        }
        SchemeKind::Ask => decode_grid(trace, cal, scheme, &used),
        SchemeKind::Ook => decode_runs(trace, cal, scheme, &used),
        SchemeKind::Bfsk => decode_runs(trace, cal, scheme, &used),
    }
}

/// Symbol decision for grid schemes: majority over settled samples, else the
/// last sample of the window, which sits closest to the achieved level.
fn decide_window(
    window: &[TraceSample],
    settle_end_ms: f64,
    cal: &Calibration,
) -> Classified {
    let settled: Vec<Classified> = window
        .iter()
        .filter(|s| s.t_ms > settle_end_ms)
        .map(|s| classify(s.value, cal))
        .collect();
    let votes: Vec<usize> = settled
        .iter()
        .filter_map(|c| match c {
            Classified::Rank(r) => Some(*r),
            Classified::Erased => None,
        })
        .collect();
    if !votes.is_empty() {
        let mut counts = std::collections::HashMap::new();
        for &v in &votes {
            *counts.entry(v).or_insert(0usize) += 1;
        }
        let max = counts.values().copied().max().expect("non-empty");
        let winners: Vec<usize> = counts
            .iter()
            .filter(|(_, &c)| c == max)
            .map(|(&r, _)| r)
            .collect();
        if winners.len() == 1 {
            return Classified::Rank(winners[0]);
        }
        // Tie: the latest settled vote is the most reliable.
        for c in settled.iter().rev() {
            if let Classified::Rank(r) = c {
                if winners.contains(r) {
                    return Classified::Rank(*r);
                }
            }
        }
    }
    match window.last() {
        Some(s) => classify(s.value, cal),
        None => Classified::Erased,
    }
}

fn decode_grid(
    trace: &IntensityTrace,
    cal: &Calibration,
    scheme: &SchemeParams,
    used: &[usize],
) -> Result<DemodOutput, VisionError> {
    // Repeating window pattern: (duration, carries data).
    let pattern: Vec<(f64, bool)> = match scheme.kind {
        SchemeKind::Ook => vec![(scheme.t_on_ms, true)],
        SchemeKind::Ask => vec![(scheme.t_on_ms, true), (scheme.t_d_ms, false)],
        SchemeKind::Bfsk => unreachable!("duration keying uses run decoding"),
    };
    let t_last = trace.samples.last().expect("non-empty trace").t_ms;
    let eps = 1e-6 * 1000.0 / trace.fps;

    let mut bits = Bitstream::new();
    let mut erasures = 0usize;
    let mut start_ms = 0.0;
    let mut pattern_idx = 0;
    let mut sample_idx = 0;
    while start_ms + eps < t_last {
        let (duration, is_data) = pattern[pattern_idx];
        let end_ms = start_ms + duration;
        // Samples with start < t <= end (epsilon-tolerant at both edges).
        while sample_idx < trace.samples.len()
            && trace.samples[sample_idx].t_ms <= start_ms + eps
        {
            sample_idx += 1;
        }
        let mut end_idx = sample_idx;
        while end_idx < trace.samples.len() && trace.samples[end_idx].t_ms <= end_ms + eps {
            end_idx += 1;
        }
        if is_data {
            let window = &trace.samples[sample_idx..end_idx];
            if window.is_empty() {
                break;
            }
            match decide_window(window, start_ms + cal.settle_ms, cal) {
                Classified::Rank(rank) => {
                    let level = used[rank];
                    match scheme.kind {
                        SchemeKind::Ook => {
                            if level == scheme.level_a {
                                bits.push(0);
                            } else {
                                bits.push(1);
                            }
                        }
                        SchemeKind::Ask => {
                            if level != scheme.separator {
                                let group = scheme
                                    .amplitude_map
                                    .iter()
                                    .position(|&l| l == level)
                                    .expect("used level");
                                bits.push((group >> 1) as u8);
                                bits.push((group & 1) as u8);
                            }
                            // A data window decided as separator is dropped;
                            // the framing layer catches the damage.
                        }
                        SchemeKind::Bfsk => unreachable!(),
                    }
                }
                Classified::Erased => erasures += 1,
            }
        }
        sample_idx = end_idx.saturating_sub(1);
        start_ms = end_ms;
        pattern_idx = (pattern_idx + 1) % pattern.len();
    }
    Ok(DemodOutput { bits, erasures })
}

fn decode_runs(
    trace: &IntensityTrace,
    cal: &Calibration,
    scheme: &SchemeParams,
    used: &[usize],
) -> Result<DemodOutput, VisionError> {
    let frame_ms = 1000.0 / trace.fps;
    // Runs of identical classification; erased samples extend the current run.
    let mut runs: Vec<(usize, usize)> = Vec::new(); // (rank, sample count)
    for s in &trace.samples {
        match classify(s.value, cal) {
            Classified::Rank(r) => match runs.last_mut() {
                Some((rank, count)) if *rank == r => *count += 1,
                _ => runs.push((r, 1)),
            },
            Classified::Erased => {
                if let Some((_, count)) = runs.last_mut() {
                    *count += 1;
                }
            }
        }
    }

    let (data_level, separator_level) = match scheme.kind {
        SchemeKind::Bfsk => (scheme.level_a, scheme.level_b),
        // Unequal-duration on-off keying: both levels carry data.
        SchemeKind::Ook => (usize::MAX, usize::MAX),
        SchemeKind::Ask => unreachable!("amplitude keying uses grid decoding"),
    };

    let mut bits = Bitstream::new();
    let mut erasures = 0usize;
    let tolerance = |nominal: f64| DURATION_TOLERANCE * nominal + frame_ms;
    for &(rank, count) in &runs {
        let level = used[rank];
        let duration = count as f64 * frame_ms;
        match scheme.kind {
            SchemeKind::Bfsk => {
                if level == separator_level {
                    continue;
                }
                if level != data_level {
                    erasures += 1;
                    continue;
                }
                let d_off = (duration - scheme.t_off_ms).abs();
                let d_on = (duration - scheme.t_on_ms).abs();
                if d_off <= d_on && d_off <= tolerance(scheme.t_off_ms) {
                    bits.push(0);
                } else if d_on < d_off && d_on <= tolerance(scheme.t_on_ms) {
                    bits.push(1);
                } else {
                    erasures += 1;
                }
            }
            SchemeKind::Ook => {
                let (bit, nominal) = if level == scheme.level_a {
                    (0u8, scheme.t_off_ms)
                } else {
                    (1u8, scheme.t_on_ms)
                };
                // Repeated symbols merge into one run; recover the count.
                let n = (duration / nominal).round() as usize;
                for _ in 0..n {
                    bits.push(bit);
                }
            }
            SchemeKind::Ask => unreachable!(),
        }
    }
    Ok(DemodOutput { bits, erasures })
}

/// Scans a demodulated bit sequence for framed packets.
pub fn scan_frames(bits: &Bitstream) -> DecodeReport {
    let mut report = DecodeReport::default();
    let raw = bits.bits();
    let mut i = 0;
    let mut skipped = 0usize;
    while i + FRAME_BITS <= raw.len() {
        if raw[i..i + 8] == PREAMBLE {
            let window = Bitstream::from_bits(&raw[i..i + FRAME_BITS]).expect("bits are 0/1");
            match parse_frame(&window) {
                Ok(frame) => {
                    report.frames_ok += 1;
                    report.payloads.push(frame.payload);
                }
                Err(BitframeError::Integrity { .. }) => report.frames_crc_failed += 1,
                Err(_) => report.frames_sync_failed += 1,
            }
            // Consume the whole window either way to stay symbol-aligned.
            i += FRAME_BITS;
        } else {
            i += 1;
            skipped += 1;
        }
    }
    report.frames_sync_failed += skipped / FRAME_BITS;
    report
}

/// Demodulates a trace and reassembles frames in one step.
pub fn decode_trace(
    trace: &IntensityTrace,
    scheme: &SchemeParams,
    config: &DecodeConfig,
) -> Result<DecodeReport, VisionError> {
    let cal = estimate_thresholds_with(trace, scheme.used_levels().len(), config)?;
    let demod = demodulate(trace, &cal, scheme)?;
    let mut report = scan_frames(&demod.bits);
    report.erasures = demod.erasures;
    Ok(report)
}

/// Full receiver: locate the LED, extract its brightness, calibrate,
/// demodulate and reassemble frames. Component failures (no LED, no
/// calibration, undersampled) yield an empty or partial report rather than
/// an error.
pub fn decode_stream(frames: &VideoFrameStream, scheme: &SchemeParams) -> DecodeReport {
    decode_stream_with(frames, scheme, &DecodeConfig::default())
}

pub fn decode_stream_with(
    frames: &VideoFrameStream,
    scheme: &SchemeParams,
    config: &DecodeConfig,
) -> DecodeReport {
    let roi = match locate_led(frames, config.variance_floor) {
        Ok(roi) => roi,
        Err(_) => return DecodeReport::default(),
    };
    let trace = match extract_intensity(frames, &roi) {
        Ok(trace) => trace,
        Err(_) => return DecodeReport::default(),
    };
    decode_trace(&trace, scheme, config).unwrap_or_default()
}

/// Fraction of differing bits between two equal-length streams.
pub fn measure_ber(sent: &Bitstream, received: &Bitstream) -> Result<f64, VisionError> {
    if sent.len() != received.len() {
        return Err(VisionError::LengthMismatch { sent: sent.len(), received: received.len() });
    }
    if sent.is_empty() {
        return Ok(0.0);
    }
    let errors = sent
        .bits()
        .iter()
        .zip(received.bits())
        .filter(|(a, b)| a != b)
        .count();
    Ok(errors as f64 / sent.len() as f64)
}
