//! Command implementations behind the `irlink` binary: file encoding, rate
//! sweeps, link-budget tables, stream decoding, and the camera emulator
//! with its transmitter. Everything stochastic takes an explicit seed so
//! runs are reproducible, and outputs are plain text or CSV.

use crate::bitframe::{fragment, serialize_frame, Bitstream, PAYLOAD_BITS};
use crate::camsim::{
    client_transmit, CameraConfig, CameraServer, CamsimError, Clock, TransmitOptions,
};
use crate::channel::{
    render_trace, BackgroundModel, BlobSpec, CameraModel, ChannelError, IntensityTrace,
    JammerParams, LevelTable, TransitionModel, VideoFrameStream,
};
use crate::modem::{
    append_tail_hold, encode, ModemError, SchemeKind, SchemeParams, SignalTimeline,
};
use crate::optics::{
    distance_sweep, max_distance_los, parse_link_params, received_power_los,
    received_power_nlos_converged, NlosGeometry, OpticalLinkParams,
    OpticsError,
};
use crate::vision::{decode_stream_with, measure_ber, DecodeConfig, DecodeReport, VisionError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Vision(#[from] VisionError),
    #[error(transparent)]
    Camsim(#[from] CamsimError),
}

impl CliError {
    /// Documented process exit codes: 1 domain/validation, 2 usage (also
    /// used by argument parsing), 3 I/O, 4 network.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) | CliError::Channel(ChannelError::Io(_)) => 3,
            CliError::Camsim(CamsimError::Io(_)) | CliError::Camsim(CamsimError::Http(_)) => 4,
            _ => 1,
        }
    }
}

/// Scheme selection shared by the commands.
#[derive(Debug, Clone, Copy)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub rate_bps: f64,
    pub n_levels: usize,
}

impl SchemeSpec {
    pub fn to_params(self) -> Result<SchemeParams, CliError> {
        Ok(SchemeParams::for_rate(self.kind, self.rate_bps, self.n_levels)?)
    }
}

pub fn parse_scheme_kind(name: &str) -> Result<SchemeKind, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "ook" => Ok(SchemeKind::Ook),
        "bfsk" => Ok(SchemeKind::Bfsk),
        "ask" => Ok(SchemeKind::Ask),
        other => Err(CliError::Usage(format!(
            "unknown scheme '{other}', expected ook, bfsk or ask"
        ))),
    }
}

/// Parses `start:stop:count` into an inclusive linear range.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("sweep '{spec}' is not start:stop:count")));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad sweep start in '{spec}'")))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad sweep stop in '{spec}'")))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad sweep count in '{spec}'")))?;
    if count == 0 {
        return Err(CliError::Usage("sweep count must be positive".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn format_number(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 {
        format!("{}", x.round() as i64)
    } else {
        format!("{x:.3}")
    }
}

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

/// Frames and encodes a file into a plain-text timeline.
pub fn cmd_encode(input: &Path, scheme: SchemeSpec, output: &Path) -> Result<String, CliError> {
    let data = std::fs::read(input)?;
    let params = scheme.to_params()?;
    let mut bits = Bitstream::new();
    let frames = fragment(&data);
    for frame in &frames {
        bits.extend(&serialize_frame(frame));
    }
    let timeline = encode(&bits, &params)?;
    std::fs::write(output, timeline.to_text())?;
    Ok(format!(
        "frames={} segments={} duration_ms={}\n",
        frames.len(),
        timeline.len(),
        format_number(timeline.total_duration_ms())
    ))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub kind: SchemeKind,
    pub n_levels: usize,
    pub fps: f64,
    pub transition_ms: f64,
    pub rates_bps: Vec<f64>,
    pub seed: u64,
    /// Receiver noise in normalized brightness units.
    pub sigma_norm: f64,
    /// Payload frames transmitted per sweep point.
    pub frames_per_point: usize,
    pub jammer: Option<(f64, f64)>, // (blink rate hz, amplitude)
}

impl SimulateConfig {
    pub fn new(kind: SchemeKind, fps: f64, seed: u64) -> Self {
        Self {
            kind,
            n_levels: 5,
            fps,
            transition_ms: 50.0,
            rates_bps: (1..=50).map(|r| r as f64).collect(),
            seed,
            sigma_norm: 0.0,
            frames_per_point: 3,
            jammer: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    /// `rate_bps,ber,frames_ok` rows, one per sweep point.
    pub csv: String,
    pub max_zero_ber_rate: Option<f64>,
}

/// Builds a link whose receiver noise equals `sigma_norm` of the top level.
pub fn link_with_normalized_noise(sigma_norm: f64) -> OpticalLinkParams {
    let mut link = OpticalLinkParams::reference();
    link.noise_sigma_a = 0.0;
    if sigma_norm > 0.0 {
        let full = link.responsivity_a_per_w
            * received_power_los(&link).expect("reference link is valid");
        link.noise_sigma_a = sigma_norm * full;
    }
    link
}

fn derive_seed(base: u64, index: u64) -> u64 {
    // Splitmix-style spread keeps per-point streams independent.
    base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn seeded_payload(seed: u64, frames: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xDA7A));
    (0..frames * PAYLOAD_BITS / 8).map(|_| rng.gen()).collect()
}

/// Bit error rate between sent frame payloads and the recovered ones,
/// pairing frames by position; missing frames count fully wrong.
fn payload_ber(sent: &[Bitstream], recovered: &[Bitstream]) -> f64 {
    if sent.is_empty() {
        return 0.0;
    }
    let mut errors = 0usize;
    for (i, reference) in sent.iter().enumerate() {
        match recovered.get(i) {
            Some(got) => {
                errors += reference
                    .bits()
                    .iter()
                    .zip(got.bits())
                    .filter(|(a, b)| a != b)
                    .count();
            }
            None => errors += reference.len(),
        }
    }
    errors += recovered.len().saturating_sub(sent.len()) * PAYLOAD_BITS;
    (errors as f64 / (sent.len() * PAYLOAD_BITS) as f64).min(1.0)
}

/// One full encode -> channel -> decode pass at a given rate.
pub fn simulate_rate(cfg: &SimulateConfig, rate_bps: f64, point: u64) -> Result<(f64, usize), CliError> {
    let scheme = SchemeParams::for_rate(cfg.kind, rate_bps, cfg.n_levels)?;
    let data = seeded_payload(cfg.seed, cfg.frames_per_point);
    let frames = fragment(&data);
    let sent: Vec<Bitstream> = frames.iter().map(|f| f.payload.clone()).collect();
    let mut bits = Bitstream::new();
    for frame in &frames {
        bits.extend(&serialize_frame(frame));
    }
    let mut timeline = encode(&bits, &scheme)?;
    append_tail_hold(&mut timeline, &scheme, 2.5 * 1000.0 / cfg.fps + 1.0);

    let cam = CameraModel::new(cfg.fps);
    let levels = LevelTable::linear(cfg.n_levels)?;
    let link = link_with_normalized_noise(cfg.sigma_norm);
    let tm = TransitionModel { transition_ms: cfg.transition_ms };
    let trace = render_trace(&timeline, &cam, &levels, &link, &tm, derive_seed(cfg.seed, point))?;
    let trace = match cfg.jammer {
        Some((blink_rate_hz, amplitude)) => crate::channel::apply_jammer(
            &trace,
            &JammerParams {
                enabled: true,
                blink_rate_hz,
                amplitude,
                seed: derive_seed(cfg.seed, point ^ 0x4A44),
            },
        ),
        None => trace,
    };
    let report = decode_trace_quietly(&trace, &scheme);
    Ok((payload_ber(&sent, &report.payloads), report.frames_ok))
}

fn decode_trace_quietly(trace: &IntensityTrace, scheme: &SchemeParams) -> DecodeReport {
    crate::vision::decode_trace(trace, scheme, &DecodeConfig::default()).unwrap_or_default()
}

/// Sweeps rates and reports BER per point plus the highest zero-BER rate.
pub fn cmd_simulate(cfg: &SimulateConfig) -> Result<SimulateOutcome, CliError> {
    let mut csv = String::from("rate_bps,ber,frames_ok\n");
    let mut max_zero = None;
    for (index, &rate) in cfg.rates_bps.iter().enumerate() {
        let (ber, frames_ok) = simulate_rate(cfg, rate, index as u64)?;
        csv.push_str(&format!("{},{ber:.6},{frames_ok}\n", format_number(rate)));
        if ber == 0.0 && max_zero.is_none_or(|m| rate > m) {
            max_zero = Some(rate);
        }
    }
    Ok(SimulateOutcome { csv, max_zero_ber_rate: max_zero })
}

// ---------------------------------------------------------------------------
// linkbudget
// ---------------------------------------------------------------------------

pub fn load_link_params(path: Option<&Path>) -> Result<OpticalLinkParams, CliError> {
    match path {
        Some(p) => Ok(parse_link_params(&std::fs::read_to_string(p)?)?),
        None => Ok(OpticalLinkParams::reference()),
    }
}

/// Line-of-sight distance table over the two link angles.
pub fn cmd_linkbudget_los(
    params: &OpticalLinkParams,
    phi_sweep: &[f64],
    varphi_sweep: &[f64],
) -> Result<String, CliError> {
    let phis = if phi_sweep.is_empty() {
        vec![params.irradiance_angle_deg]
    } else {
        phi_sweep.to_vec()
    };
    let varphis = if varphi_sweep.is_empty() {
        vec![params.detector_axial_angle_deg]
    } else {
        varphi_sweep.to_vec()
    };
    let mut csv = String::from("phi_deg,varphi_deg,d_max_m\n");
    for point in distance_sweep(params, &phis, &varphis)? {
        csv.push_str(&format!(
            "{},{},{:.3}\n",
            format_number(point.irradiance_angle_deg),
            format_number(point.detector_axial_angle_deg),
            point.max_distance_m
        ));
    }
    Ok(csv)
}

/// Diffuse-reflection received power for one geometry, with the quadrature
/// refined until convergence.
pub fn cmd_linkbudget_nlos(
    params: &OpticalLinkParams,
    geometry: &NlosGeometry,
) -> Result<String, CliError> {
    let converged = received_power_nlos_converged(params, geometry)?;
    let mut csv = String::from("d1_m,d2_m,alpha_deg,beta_deg,rho,power_w,grid,rel_change\n");
    csv.push_str(&format!(
        "{},{},{},{},{},{:.6e},{},{:.6}\n",
        format_number(geometry.d1_m),
        format_number(geometry.d2_m),
        format_number(geometry.incidence_angle_deg),
        format_number(geometry.reflection_angle_deg),
        format_number(geometry.reflectance),
        converged.power_w,
        converged.grid,
        converged.rel_change
    ));
    Ok(csv)
}

/// Summary line for the default (single-point) budget.
pub fn linkbudget_summary(params: &OpticalLinkParams) -> Result<String, CliError> {
    let d = max_distance_los(params)?;
    Ok(format!("d_max_m={d:.3}\n"))
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

/// Decodes a recorded frame directory and renders the report as text.
pub fn cmd_decode(
    frames_dir: &Path,
    scheme: SchemeSpec,
    expect: Option<&Path>,
) -> Result<String, CliError> {
    let stream = VideoFrameStream::read_dir(frames_dir)?;
    let params = scheme.to_params()?;
    let mut report = decode_stream_with(&stream, &params, &DecodeConfig::default());
    if let Some(reference) = expect {
        let data = std::fs::read(reference)?;
        let sent: Vec<Bitstream> =
            fragment(&data).iter().map(|f| f.payload.clone()).collect();
        let mut sent_bits = Bitstream::new();
        for p in &sent {
            sent_bits.extend(p);
        }
        let mut got_bits = Bitstream::new();
        for (i, p) in report.payloads.iter().enumerate() {
            if i < sent.len() {
                got_bits.extend(p);
            }
        }
        // Pad missing frames with complemented bits so they count as errors.
        while got_bits.len() < sent_bits.len() {
            got_bits.push(1 - sent_bits[got_bits.len()]);
        }
        report.ber = Some(measure_ber(&sent_bits, &got_bits)?);
    }
    Ok(report.to_text())
}

// ---------------------------------------------------------------------------
// serve / transmit
// ---------------------------------------------------------------------------

/// Flat key-value camera configuration, flag overrides applied by the caller.
pub fn parse_camera_config(text: &str) -> Result<CameraConfig, CliError> {
    let mut config = CameraConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| CliError::Usage(format!("config line {}: bad {what}", lineno + 1));
        match key {
            "listen" => config.listen = value.to_string(),
            "n_levels" => config.n_levels = value.parse().map_err(|_| bad("n_levels"))?,
            "auth" => config.auth = Some(value.to_string()),
            "fps" => config.fps = value.parse().map_err(|_| bad("fps"))?,
            "width" => config.width = value.parse().map_err(|_| bad("width"))?,
            "height" => config.height = value.parse().map_err(|_| bad("height"))?,
            "blob_x" => config.blob.x = value.parse().map_err(|_| bad("blob_x"))?,
            "blob_y" => config.blob.y = value.parse().map_err(|_| bad("blob_y"))?,
            "blob_width" => config.blob.width = value.parse().map_err(|_| bad("blob_width"))?,
            "blob_height" => config.blob.height = value.parse().map_err(|_| bad("blob_height"))?,
            "transition_ms" => {
                config.transition_ms = value.parse().map_err(|_| bad("transition_ms"))?
            }
            "render_seed" => config.render_seed = value.parse().map_err(|_| bad("render_seed"))?,
            "background_level" => {
                config.background = BackgroundModel {
                    level: value.parse().map_err(|_| bad("background_level"))?,
                    ..config.background
                }
            }
            other => return Err(CliError::Usage(format!("unknown config key '{other}'"))),
        }
    }
    Ok(config)
}

/// Starts the camera emulator and blocks forever.
pub fn cmd_serve(config: CameraConfig) -> Result<(), CliError> {
    let server = CameraServer::spawn(config, Clock::monotonic())?;
    println!("listening on {}", server.addr());
    loop {
        std::thread::park();
    }
}

/// Transmits a file to a running emulator and prints the timing summary.
pub fn cmd_transmit(
    addr: &str,
    scheme: SchemeSpec,
    file: &Path,
    auth: Option<String>,
    tail_ms: f64,
) -> Result<String, CliError> {
    let data = std::fs::read(file)?;
    let params = scheme.to_params()?;
    let mut opts = TransmitOptions::new(params);
    opts.auth = auth;
    opts.tail_ms = tail_ms;
    let summary = client_transmit(addr, &data, &opts)?;
    Ok(format!(
        "frames={} segments={} posts={} window_ms={:.3},{:.3} jitter_p99_ms={:.3} jitter_max_ms={:.3}\n",
        summary.frames,
        summary.segments,
        summary.posts,
        summary.start_ms,
        summary.end_ms,
        summary.jitter_p99_ms,
        summary.jitter_max_ms
    ))
}

/// Parses `x,y,w,h` into a blob rectangle.
pub fn parse_blob(spec: &str) -> Result<BlobSpec, CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!("blob '{spec}' is not x,y,w,h")));
    }
    let parse = |s: &str| -> Result<usize, CliError> {
        s.trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad blob component '{s}'")))
    };
    Ok(BlobSpec {
        x: parse(parts[0])?,
        y: parse(parts[1])?,
        width: parse(parts[2])?,
        height: parse(parts[3])?,
    })
}

/// Builds a timeline from a timeline text file (the `encode` output format).
pub fn load_timeline(path: &Path) -> Result<SignalTimeline, CliError> {
    Ok(SignalTimeline::from_text(&std::fs::read_to_string(path)?)?)
}
