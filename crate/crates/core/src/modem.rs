//! Modulation schemes: map bitstreams to LED-level timelines and back.
//!
//! Three schemes are supported: on-off keying (one level per bit), duration
//! keying with a separator level between bits, and four-level amplitude
//! keying with a separator level between symbols. Rate caps combine the LED
//! transition-time limit on the transmitter side with the frame-rate limit
//! on the receiving camera.

use crate::bitframe::{Bitstream, FRAME_BITS};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModemError {
    #[error("operation requires {expected:?} parameters, got {got:?}")]
    WrongScheme { expected: SchemeKind, got: SchemeKind },
    #[error("amplitude keying needs an even bit count, got {0}")]
    OddBitCount(usize),
    #[error("segment {segment}: level {level} is not used by this scheme")]
    UnknownLevel { segment: usize, level: usize },
    #[error("segment {segment}: duration {duration_ms} ms matches no symbol within ±25%")]
    Timing { segment: usize, duration_ms: f64 },
    #[error("invalid scheme parameters: {0}")]
    InvalidParams(&'static str),
    #[error("stream of {0} bits is not a whole number of {FRAME_BITS}-bit frames")]
    FrameAlignment(usize),
    #[error("channel count must be at least 1")]
    NoChannels,
    #[error("channel streams are inconsistent with round-robin order")]
    IncompleteStreams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Ook,
    Bfsk,
    Ask,
}

impl SchemeKind {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            SchemeKind::Ook | SchemeKind::Bfsk => 1,
            SchemeKind::Ask => 2,
        }
    }

    /// Size of the data symbol alphabet (separator levels excluded).
    pub fn alphabet_size(self) -> usize {
        match self {
            SchemeKind::Ook | SchemeKind::Bfsk => 2,
            SchemeKind::Ask => 4,
        }
    }
}

/// Timing and level assignment for one modulation scheme.
///
/// Levels are indices into the transmitter's intensity table; higher index
/// means higher emitted power.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub kind: SchemeKind,
    pub t_on_ms: f64,
    pub t_off_ms: f64,
    pub t_d_ms: f64,
    /// OOK zero level; BFSK data level.
    pub level_a: usize,
    /// OOK one level; BFSK separator level.
    pub level_b: usize,
    /// ASK level per 2-bit group, indexed by the group value (00..11).
    pub amplitude_map: [usize; 4],
    /// ASK separator level, distinct from every mapped level.
    pub separator: usize,
}

/// Relative tolerance used when matching segment durations to symbols.
pub const DURATION_TOLERANCE: f64 = 0.25;

impl SchemeParams {
    pub fn ook(t_on_ms: f64, t_off_ms: f64, level_a: usize, level_b: usize) -> Result<Self, ModemError> {
        if !(t_on_ms > 0.0 && t_off_ms > 0.0) {
            return Err(ModemError::InvalidParams("durations must be positive"));
        }
        if level_a == level_b {
            return Err(ModemError::InvalidParams("OOK levels must differ"));
        }
        Ok(Self {
            kind: SchemeKind::Ook,
            t_on_ms,
            t_off_ms,
            t_d_ms: 0.0,
            level_a,
            level_b,
            amplitude_map: [0; 4],
            separator: 0,
        })
    }

    pub fn bfsk(
        t_on_ms: f64,
        t_off_ms: f64,
        t_d_ms: f64,
        level_a: usize,
        level_b: usize,
    ) -> Result<Self, ModemError> {
        if !(t_on_ms > 0.0 && t_off_ms > 0.0 && t_d_ms > 0.0) {
            return Err(ModemError::InvalidParams("durations must be positive"));
        }
        if level_a == level_b {
            return Err(ModemError::InvalidParams("BFSK data and separator levels must differ"));
        }
        // Both bit values share one level, so their durations must stay
        // apart after the ±25% matching bands are applied.
        let (lo, hi) = if t_off_ms < t_on_ms { (t_off_ms, t_on_ms) } else { (t_on_ms, t_off_ms) };
        if lo * (1.0 + DURATION_TOLERANCE) >= hi * (1.0 - DURATION_TOLERANCE) {
            return Err(ModemError::InvalidParams(
                "BFSK bit durations are too close to distinguish",
            ));
        }
        Ok(Self {
            kind: SchemeKind::Bfsk,
            t_on_ms,
            t_off_ms,
            t_d_ms,
            level_a,
            level_b,
            amplitude_map: [0; 4],
            separator: 0,
        })
    }

    pub fn ask(
        t_on_ms: f64,
        t_d_ms: f64,
        amplitude_map: [usize; 4],
        separator: usize,
    ) -> Result<Self, ModemError> {
        if !(t_on_ms > 0.0 && t_d_ms > 0.0) {
            return Err(ModemError::InvalidParams("durations must be positive"));
        }
        for (i, &level) in amplitude_map.iter().enumerate() {
            if level == separator {
                return Err(ModemError::InvalidParams("separator level reused for data"));
            }
            if amplitude_map[..i].contains(&level) {
                return Err(ModemError::InvalidParams("amplitude map must be injective"));
            }
        }
        Ok(Self {
            kind: SchemeKind::Ask,
            t_on_ms,
            t_off_ms: t_on_ms,
            t_d_ms,
            level_a: 0,
            level_b: 0,
            amplitude_map,
            separator,
        })
    }

    /// Canonical parameters for a nominal bit rate, given `n_levels`
    /// transmitter intensities. The rate counts data symbols only; separator
    /// segments extend wall time but carry no bits.
    pub fn for_rate(kind: SchemeKind, rate_bps: f64, n_levels: usize) -> Result<Self, ModemError> {
        if !(rate_bps > 0.0) {
            return Err(ModemError::InvalidParams("rate must be positive"));
        }
        if n_levels < 2 {
            return Err(ModemError::InvalidParams("at least two levels required"));
        }
        let base_ms = 1000.0 * kind.bits_per_symbol() as f64 / rate_bps;
        match kind {
            SchemeKind::Ook => Self::ook(base_ms, base_ms, 0, n_levels - 1),
            SchemeKind::Bfsk => Self::bfsk(2.0 * base_ms, base_ms, base_ms, n_levels - 1, 0),
            SchemeKind::Ask => {
                if n_levels < 5 {
                    return Err(ModemError::InvalidParams(
                        "amplitude keying needs five levels (four data + separator)",
                    ));
                }
                Self::ask(base_ms, base_ms, [1, 2, 3, 4], 0)
            }
        }
    }

    /// Highest level index this scheme can command.
    pub fn max_level(&self) -> usize {
        match self.kind {
            SchemeKind::Ook | SchemeKind::Bfsk => self.level_a.max(self.level_b),
            SchemeKind::Ask => {
                let m = *self.amplitude_map.iter().max().expect("non-empty map");
                m.max(self.separator)
            }
        }
    }

    /// Every level index the scheme uses, data and separator alike.
    pub fn used_levels(&self) -> Vec<usize> {
        let mut levels = match self.kind {
            SchemeKind::Ook | SchemeKind::Bfsk => vec![self.level_a, self.level_b],
            SchemeKind::Ask => {
                let mut v = self.amplitude_map.to_vec();
                v.push(self.separator);
                v
            }
        };
        levels.sort_unstable();
        levels.dedup();
        levels
    }

    /// Duration of the shortest segment the scheme emits.
    pub fn min_segment_ms(&self) -> f64 {
        match self.kind {
            SchemeKind::Ook => self.t_on_ms.min(self.t_off_ms),
            SchemeKind::Bfsk => self.t_on_ms.min(self.t_off_ms).min(self.t_d_ms),
            SchemeKind::Ask => self.t_on_ms.min(self.t_d_ms),
        }
    }
}

/// One transmitter step: hold `level` for `duration_ms`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub level: usize,
    pub duration_ms: f64,
}

/// The transmitter's physical program: an ordered list of level holds.
/// Adjacent segments may share a level; they are kept distinct so the
/// symbol clock survives round trips.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignalTimeline {
    pub segments: Vec<Segment>,
}

impl SignalTimeline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, level: usize, duration_ms: f64) {
        self.segments.push(Segment { level, duration_ms });
    }

    pub fn total_duration_ms(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_ms).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    /// Plain-text form, one `level,duration_ms` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.segments {
            out.push_str(&format!("{},{}\n", s.level, format_ms(s.duration_ms)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ModemError> {
        let mut tl = SignalTimeline::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (level, dur) = line
                .split_once(',')
                .ok_or(ModemError::InvalidParams("timeline line is not level,duration"))?;
            let level: usize = level
                .trim()
                .parse()
                .map_err(|_| ModemError::InvalidParams("bad level in timeline"))?;
            let duration_ms: f64 = dur
                .trim()
                .parse()
                .map_err(|_| ModemError::InvalidParams("bad duration in timeline"))?;
            if !(duration_ms > 0.0) {
                return Err(ModemError::InvalidParams("durations must be positive"));
            }
            tl.push(level, duration_ms);
        }
        Ok(tl)
    }
}

fn format_ms(ms: f64) -> String {
    if (ms - ms.round()).abs() < 1e-9 {
        format!("{}", ms.round() as i64)
    } else {
        format!("{ms:.3}")
    }
}

fn expect_kind(p: &SchemeParams, expected: SchemeKind) -> Result<(), ModemError> {
    if p.kind != expected {
        return Err(ModemError::WrongScheme { expected, got: p.kind });
    }
    Ok(())
}

/// On-off keying: bit 0 holds `level_a` for `t_off_ms`, bit 1 holds
/// `level_b` for `t_on_ms`.
pub fn encode_ook(bits: &Bitstream, p: &SchemeParams) -> Result<SignalTimeline, ModemError> {
    expect_kind(p, SchemeKind::Ook)?;
    let mut tl = SignalTimeline::new();
    for &bit in bits.bits() {
        if bit == 0 {
            tl.push(p.level_a, p.t_off_ms);
        } else {
            tl.push(p.level_b, p.t_on_ms);
        }
    }
    Ok(tl)
}

/// Duration keying: both bit values hold `level_a` (for `t_off_ms` or
/// `t_on_ms`), with a `level_b` separator inserted between consecutive bits.
pub fn encode_bfsk(bits: &Bitstream, p: &SchemeParams) -> Result<SignalTimeline, ModemError> {
    expect_kind(p, SchemeKind::Bfsk)?;
    let mut tl = SignalTimeline::new();
    for (i, &bit) in bits.bits().iter().enumerate() {
        if i > 0 {
            tl.push(p.level_b, p.t_d_ms);
        }
        tl.push(p.level_a, if bit == 0 { p.t_off_ms } else { p.t_on_ms });
    }
    Ok(tl)
}

/// Amplitude keying: each 2-bit group holds its mapped level for `t_on_ms`,
/// with the separator level inserted between consecutive symbols.
pub fn encode_ask(bits: &Bitstream, p: &SchemeParams) -> Result<SignalTimeline, ModemError> {
    expect_kind(p, SchemeKind::Ask)?;
    if !bits.len().is_multiple_of(2) {
        return Err(ModemError::OddBitCount(bits.len()));
    }
    let mut tl = SignalTimeline::new();
    for (i, pair) in bits.bits().chunks(2).enumerate() {
        if i > 0 {
            tl.push(p.separator, p.t_d_ms);
        }
        let group = (pair[0] << 1 | pair[1]) as usize;
        tl.push(p.amplitude_map[group], p.t_on_ms);
    }
    Ok(tl)
}

/// Encodes with whichever scheme `p` describes.
pub fn encode(bits: &Bitstream, p: &SchemeParams) -> Result<SignalTimeline, ModemError> {
    match p.kind {
        SchemeKind::Ook => encode_ook(bits, p),
        SchemeKind::Bfsk => encode_bfsk(bits, p),
        SchemeKind::Ask => encode_ask(bits, p),
    }
}

fn duration_matches(duration_ms: f64, nominal_ms: f64) -> bool {
    (duration_ms - nominal_ms).abs() <= DURATION_TOLERANCE * nominal_ms
}

/// Appends the post-data hold a transmitter leaves on the LED so the
/// receiver gets settled samples for the final symbol: duration keying
/// parks on its separator level, the other schemes keep the last level.
pub fn append_tail_hold(timeline: &mut SignalTimeline, p: &SchemeParams, tail_ms: f64) {
    if timeline.is_empty() || tail_ms <= 0.0 {
        return;
    }
    match p.kind {
        SchemeKind::Bfsk => timeline.push(p.level_b, tail_ms.max(p.t_d_ms)),
        _ => {
            let last = timeline.segments.last().expect("non-empty").level;
            timeline.push(last, tail_ms);
        }
    }
}

/// Exact inverse of the matching encoder over a clean, unsampled timeline.
/// Separator segments are consumed silently; durations must match their
/// nominal symbol within ±25%.
pub fn decode_symbols(tl: &SignalTimeline, p: &SchemeParams) -> Result<Bitstream, ModemError> {
    let mut bits = Bitstream::new();
    for (segment, s) in tl.segments.iter().enumerate() {
        match p.kind {
            SchemeKind::Ook => {
                let (bit, nominal) = if s.level == p.level_a {
                    (0, p.t_off_ms)
                } else if s.level == p.level_b {
                    (1, p.t_on_ms)
                } else {
                    return Err(ModemError::UnknownLevel { segment, level: s.level });
                };
                if !duration_matches(s.duration_ms, nominal) {
                    return Err(ModemError::Timing { segment, duration_ms: s.duration_ms });
                }
                bits.push(bit);
            }
            SchemeKind::Bfsk => {
                if s.level == p.level_b {
                    if !duration_matches(s.duration_ms, p.t_d_ms) {
                        return Err(ModemError::Timing { segment, duration_ms: s.duration_ms });
                    }
                } else if s.level == p.level_a {
                    if duration_matches(s.duration_ms, p.t_off_ms) {
                        bits.push(0);
                    } else if duration_matches(s.duration_ms, p.t_on_ms) {
                        bits.push(1);
                    } else {
                        return Err(ModemError::Timing { segment, duration_ms: s.duration_ms });
                    }
                } else {
                    return Err(ModemError::UnknownLevel { segment, level: s.level });
                }
            }
            SchemeKind::Ask => {
                if s.level == p.separator {
                    if !duration_matches(s.duration_ms, p.t_d_ms) {
                        return Err(ModemError::Timing { segment, duration_ms: s.duration_ms });
                    }
                } else if let Some(group) = p.amplitude_map.iter().position(|&l| l == s.level) {
                    if !duration_matches(s.duration_ms, p.t_on_ms) {
                        return Err(ModemError::Timing { segment, duration_ms: s.duration_ms });
                    }
                    bits.push((group >> 1) as u8);
                    bits.push((group & 1) as u8);
                } else {
                    return Err(ModemError::UnknownLevel { segment, level: s.level });
                }
            }
        }
    }
    Ok(bits)
}

/// Maximum sustainable bit rate: the lower of the transmitter cap set by the
/// LED transition time and the receiver cap set by the camera frame rate
/// (two frames per symbol minimum), both scaled by bits per symbol.
pub fn max_bit_rate(p: &SchemeParams, transition_ms: f64, receiver_fps: f64) -> f64 {
    let info = (p.kind.alphabet_size() as f64).log2();
    let tx_cap = 1000.0 / transition_ms * info;
    let rx_cap = receiver_fps / 2.0 * info;
    tx_cap.min(rx_cap)
}

/// Splits a whole number of serialized frames round-robin over `k` channels.
pub fn multiplex(data: &Bitstream, k: usize) -> Result<Vec<Bitstream>, ModemError> {
    if k == 0 {
        return Err(ModemError::NoChannels);
    }
    if !data.len().is_multiple_of(FRAME_BITS) {
        return Err(ModemError::FrameAlignment(data.len()));
    }
    let mut streams = vec![Bitstream::new(); k];
    for (i, frame) in data.bits().chunks(FRAME_BITS).enumerate() {
        let target = &mut streams[i % k];
        for &bit in frame {
            target.push(bit);
        }
    }
    Ok(streams)
}

/// Inverse of [`multiplex`]: interleaves per-channel frame streams back into
/// one stream, checking that frame counts fit the round-robin pattern.
pub fn demultiplex(streams: &[Bitstream]) -> Result<Bitstream, ModemError> {
    if streams.is_empty() {
        return Err(ModemError::NoChannels);
    }
    let mut counts = Vec::with_capacity(streams.len());
    for s in streams {
        if !s.len().is_multiple_of(FRAME_BITS) {
            return Err(ModemError::FrameAlignment(s.len()));
        }
        counts.push(s.len() / FRAME_BITS);
    }
    let total: usize = counts.iter().sum();
    for (i, &count) in counts.iter().enumerate() {
        let expected = total / streams.len() + usize::from(i < total % streams.len());
        if count != expected {
            return Err(ModemError::IncompleteStreams);
        }
    }
    let mut out = Bitstream::new();
    for frame_idx in 0..total {
        let stream = &streams[frame_idx % streams.len()];
        let offset = frame_idx / streams.len() * FRAME_BITS;
        for &bit in &stream.bits()[offset..offset + FRAME_BITS] {
            out.push(bit);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitframe;
    use proptest::prelude::*;

    fn ook2() -> SchemeParams {
        SchemeParams::ook(50.0, 50.0, 0, 1).unwrap()
    }

    fn bfsk2() -> SchemeParams {
        SchemeParams::bfsk(100.0, 50.0, 50.0, 1, 0).unwrap()
    }

    fn ask5() -> SchemeParams {
        SchemeParams::ask(50.0, 50.0, [1, 2, 3, 4], 0).unwrap()
    }

    fn bits(v: &[u8]) -> Bitstream {
        Bitstream::from_bits(v).unwrap()
    }

    #[test]
    fn ook_maps_bits_to_levels() {
        let tl = encode_ook(&bits(&[1, 0]), &ook2()).unwrap();
        assert_eq!(
            tl.segments,
            vec![
                Segment { level: 1, duration_ms: 50.0 },
                Segment { level: 0, duration_ms: 50.0 },
            ]
        );
    }

    #[test]
    fn ook_empty_and_repeated() {
        assert!(encode_ook(&Bitstream::new(), &ook2()).unwrap().is_empty());
        let tl = encode_ook(&bits(&[1, 1]), &ook2()).unwrap();
        assert_eq!(tl.len(), 2);
        assert_eq!(tl.total_duration_ms(), 100.0);
    }

    #[test]
    fn bfsk_inserts_separators_between_bits() {
        let p = bfsk2();
        let tl = encode_bfsk(&bits(&[0, 1]), &p).unwrap();
        assert_eq!(
            tl.segments,
            vec![
                Segment { level: 1, duration_ms: 50.0 },
                Segment { level: 0, duration_ms: 50.0 },
                Segment { level: 1, duration_ms: 100.0 },
            ]
        );
        assert_eq!(encode_bfsk(&bits(&[0]), &p).unwrap().len(), 1);
        // Worked out by hand from the per-bit rule: bit,sep,bit,sep,bit.
        let tl = encode_bfsk(&bits(&[1, 1, 1]), &p).unwrap();
        assert_eq!(tl.len(), 5);
        assert_eq!(tl.segments[0].level, 1);
        assert_eq!(tl.segments[1].level, 0);
        assert_eq!(tl.segments[1].duration_ms, 50.0);
        assert_eq!(tl.segments[2].duration_ms, 100.0);
    }

    #[test]
    fn ask_maps_bit_pairs_and_separates_symbols() {
        let p = ask5();
        let tl = encode_ask(&bits(&[0, 0]), &p).unwrap();
        assert_eq!(tl.segments, vec![Segment { level: 1, duration_ms: 50.0 }]);
        let tl = encode_ask(&bits(&[1, 1]), &p).unwrap();
        assert_eq!(tl.segments, vec![Segment { level: 4, duration_ms: 50.0 }]);
        let tl = encode_ask(&bits(&[0, 0, 1, 1]), &p).unwrap();
        assert_eq!(
            tl.segments,
            vec![
                Segment { level: 1, duration_ms: 50.0 },
                Segment { level: 0, duration_ms: 50.0 },
                Segment { level: 4, duration_ms: 50.0 },
            ]
        );
    }

    #[test]
    fn ask_rejects_odd_bit_count() {
        assert_eq!(
            encode_ask(&bits(&[1, 0, 1]), &ask5()),
            Err(ModemError::OddBitCount(3))
        );
    }

    #[test]
    fn encode_checks_scheme_kind() {
        assert!(matches!(
            encode_ook(&bits(&[1]), &ask5()),
            Err(ModemError::WrongScheme { .. })
        ));
    }

    #[test]
    fn decode_rejects_unknown_level() {
        let mut tl = encode_ook(&bits(&[1, 0]), &ook2()).unwrap();
        tl.push(3, 50.0);
        assert_eq!(
            decode_symbols(&tl, &ook2()),
            Err(ModemError::UnknownLevel { segment: 2, level: 3 })
        );
    }

    #[test]
    fn decode_rejects_out_of_tolerance_duration() {
        let mut tl = SignalTimeline::new();
        tl.push(1, 90.0); // nominal 50 ms, 80% off
        assert!(matches!(
            decode_symbols(&tl, &ook2()),
            Err(ModemError::Timing { segment: 0, .. })
        ));
    }

    #[test]
    fn decode_tolerates_quarter_duration_jitter() {
        let mut tl = SignalTimeline::new();
        tl.push(1, 60.0);
        tl.push(0, 41.0);
        assert_eq!(decode_symbols(&tl, &ook2()).unwrap(), bits(&[1, 0]));
    }

    #[test]
    fn total_duration_matches_closed_form() {
        let data = bits(&[1, 0, 1, 1, 0]);
        let ones = 3.0;
        let zeros = 2.0;
        let p = SchemeParams::ook(70.0, 30.0, 0, 1).unwrap();
        let tl = encode_ook(&data, &p).unwrap();
        assert!((tl.total_duration_ms() - (ones * 70.0 + zeros * 30.0)).abs() < 1e-9);

        let p = bfsk2();
        let tl = encode_bfsk(&data, &p).unwrap();
        let expected = ones * p.t_on_ms + zeros * p.t_off_ms + 4.0 * p.t_d_ms;
        assert!((tl.total_duration_ms() - expected).abs() < 1e-9);

        let p = ask5();
        let tl = encode_ask(&bits(&[0, 0, 1, 1, 1, 0]), &p).unwrap();
        let expected = 3.0 * p.t_on_ms + 2.0 * p.t_d_ms;
        assert!((tl.total_duration_ms() - expected).abs() < 1e-9);
    }

    #[test]
    fn rate_caps_match_reference_points() {
        let ook = ook2();
        assert_eq!(max_bit_rate(&ook, 50.0, 60.0), 20.0);
        assert_eq!(max_bit_rate(&ook, 50.0, 30.0), 15.0);
        let ask = ask5();
        assert_eq!(max_bit_rate(&ask, 50.0, 240.0), 40.0);
        assert_eq!(max_bit_rate(&ask, 50.0, 30.0), 30.0);
    }

    #[test]
    fn rate_cap_monotonicity() {
        let p = ook2();
        let mut last = 0.0;
        for fps in [10.0, 20.0, 30.0, 60.0, 120.0, 240.0] {
            let r = max_bit_rate(&p, 50.0, fps);
            assert!(r >= last, "rate must not decrease with fps");
            last = r;
        }
        let mut last = f64::INFINITY;
        for transition in [10.0, 25.0, 50.0, 100.0, 200.0] {
            let r = max_bit_rate(&p, transition, 1e6);
            assert!(r <= last, "rate must not increase with transition time");
            last = r;
        }
    }

    #[test]
    fn ask_doubles_ook_rate_at_equal_symbol_rate() {
        let ook = ook2();
        let ask = ask5();
        for (transition, fps) in [(50.0, 60.0), (20.0, 240.0), (100.0, 30.0)] {
            let r_ook = max_bit_rate(&ook, transition, fps);
            let r_ask = max_bit_rate(&ask, transition, fps);
            assert!((r_ask - 2.0 * r_ook).abs() < 1e-12);
        }
    }

    #[test]
    fn timeline_text_roundtrip() {
        let tl = encode_bfsk(&bits(&[1, 0, 1]), &bfsk2()).unwrap();
        let text = tl.to_text();
        assert_eq!(SignalTimeline::from_text(&text).unwrap(), tl);
        assert!(text.lines().next().unwrap().ends_with(",100"));
    }

    #[test]
    fn multiplex_identity_for_single_channel() {
        let mut data = Bitstream::new();
        for frame in bitframe::fragment(&[0xC3; 64]) {
            data.extend(&bitframe::serialize_frame(&frame));
        }
        let streams = multiplex(&data, 1).unwrap();
        assert_eq!(streams.len(), 1);
        assert_eq!(streams[0], data);
        assert_eq!(demultiplex(&streams).unwrap(), data);
    }

    #[test]
    fn multiplex_round_robin_preserves_order() {
        let mut data = Bitstream::new();
        let frames = bitframe::fragment(&(0u8..128).collect::<Vec<_>>());
        assert_eq!(frames.len(), 4);
        for frame in &frames {
            data.extend(&bitframe::serialize_frame(frame));
        }
        let streams = multiplex(&data, 2).unwrap();
        assert_eq!(streams[0].len(), 2 * FRAME_BITS);
        assert_eq!(streams[1].len(), 2 * FRAME_BITS);
        assert_eq!(demultiplex(&streams).unwrap(), data);
    }

    #[test]
    fn demultiplex_rejects_missing_frames() {
        let mut data = Bitstream::new();
        for frame in bitframe::fragment(&[1u8; 96]) {
            data.extend(&bitframe::serialize_frame(&frame));
        }
        let mut streams = multiplex(&data, 2).unwrap();
        streams[0] = Bitstream::new();
        assert_eq!(demultiplex(&streams), Err(ModemError::IncompleteStreams));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10000))]

        #[test]
        fn ook_roundtrip(data in proptest::collection::vec(0u8..=1, 0..256)) {
            let b = bits(&data);
            let tl = encode_ook(&b, &ook2()).unwrap();
            prop_assert_eq!(decode_symbols(&tl, &ook2()).unwrap(), b);
        }

        #[test]
        fn bfsk_roundtrip(data in proptest::collection::vec(0u8..=1, 0..256)) {
            let b = bits(&data);
            let tl = encode_bfsk(&b, &bfsk2()).unwrap();
            prop_assert_eq!(decode_symbols(&tl, &bfsk2()).unwrap(), b);
        }

        #[test]
        fn ask_roundtrip(data in proptest::collection::vec(0u8..=1, 0..256)) {
            let mut data = data;
            if data.len() % 2 == 1 {
                data.pop();
            }
            let b = bits(&data);
            let tl = encode_ask(&b, &ask5()).unwrap();
            prop_assert_eq!(decode_symbols(&tl, &ask5()).unwrap(), b);
        }

        #[test]
        fn multiplex_roundtrip(frames in 0usize..12, k in 1usize..9, seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let payload: Vec<u8> = (0..frames * 32).map(|_| rng.gen()).collect();
            let mut data = Bitstream::new();
            for frame in bitframe::fragment(&payload) {
                data.extend(&bitframe::serialize_frame(&frame));
            }
            let streams = multiplex(&data, k).unwrap();
            prop_assert_eq!(streams.len(), k);
            prop_assert_eq!(demultiplex(&streams).unwrap(), data);
        }
    }
}
