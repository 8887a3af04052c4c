//! The emulated camera's HTTP service: IR LED control on the CGI path the
//! real firmware exposes, a state probe, and synthetic video for any
//! recorded window. State mutations are serialized behind one lock; reads
//! see atomic snapshots.

use super::clock::Clock;
use super::http::{read_request, write_response, HttpRequest};
use super::state::CameraState;
use super::CamsimError;
use crate::channel::{render_frames, BackgroundModel, BlobSpec, CameraModel, LevelTable, TransitionModel, VideoFrameStream};
use crate::modem::SignalTimeline;
use crate::optics::OpticalLinkParams;
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

/// The control path the camera firmware serves.
pub const IR_CONTROL_PATH: &str = "/command/ircf.cgi";

/// The form field carrying the requested IR strength.
pub const IR_FIELD: &str = "IRLedMaxStrength";

#[derive(Debug, Clone)]
pub struct CameraConfig {
    pub listen: String,
    pub n_levels: usize,
    /// `user:pass` enabling basic auth when set.
    pub auth: Option<String>,
    pub fps: f64,
    pub width: usize,
    pub height: usize,
    pub blob: BlobSpec,
    pub link: OpticalLinkParams,
    pub transition_ms: f64,
    pub background: BackgroundModel,
    pub render_seed: u64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        let mut link = OpticalLinkParams::reference();
        // Recorded video is effectively noiseless next to pixel noise.
        link.noise_sigma_a = 0.0;
        Self {
            listen: "127.0.0.1:0".to_string(),
            n_levels: 5,
            auth: None,
            fps: 60.0,
            width: 64,
            height: 48,
            blob: BlobSpec { x: 26, y: 18, width: 12, height: 12 },
            link,
            transition_ms: 50.0,
            background: BackgroundModel::default(),
            render_seed: 1,
        }
    }
}

pub struct CameraServer {
    addr: SocketAddr,
    state: Arc<Mutex<CameraState>>,
    shutdown: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
}

impl CameraServer {
    /// Binds and starts serving; `clock` timestamps accepted level changes.
    pub fn spawn(config: CameraConfig, clock: Clock) -> Result<Self, CamsimError> {
        if config.n_levels < 2 {
            return Err(CamsimError::Config("camera needs at least two levels".into()));
        }
        let listener = TcpListener::bind(&config.listen)?;
        let addr = listener.local_addr()?;
        let state = Arc::new(Mutex::new(CameraState::new(config.n_levels, clock.now_ms())));
        let shutdown = Arc::new(AtomicBool::new(false));

        let accept_state = Arc::clone(&state);
        let accept_shutdown = Arc::clone(&shutdown);
        let accept_thread = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if accept_shutdown.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                // A stalled client must not pin a handler thread forever.
                let _ = stream.set_read_timeout(Some(std::time::Duration::from_secs(10)));
                let state = Arc::clone(&accept_state);
                let config = config.clone();
                let clock = clock.clone();
                std::thread::spawn(move || {
                    let mut stream = stream;
                    let _ = handle_connection(&mut stream, &state, &config, &clock);
                });
            }
        });

        Ok(Self { addr, state, shutdown, accept_thread: Some(accept_thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn current_level(&self) -> usize {
        self.state.lock().expect("state lock").level()
    }

    pub fn export_timeline(&self, from_ms: f64, to_ms: f64) -> SignalTimeline {
        self.state.lock().expect("state lock").export_timeline(from_ms, to_ms)
    }

    pub fn shutdown(mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Nudge the accept loop awake.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.accept_thread.take() {
            let _ = handle.join();
        }
    }
}

fn authorized(request: &HttpRequest, config: &CameraConfig) -> bool {
    match &config.auth {
        None => true,
        Some(cred) => {
            let expected = format!("Basic {}", BASE64.encode(cred));
            request.header("authorization") == Some(expected.as_str())
        }
    }
}

fn handle_connection(
    stream: &mut TcpStream,
    state: &Mutex<CameraState>,
    config: &CameraConfig,
    clock: &Clock,
) -> std::io::Result<()> {
    let request = match read_request(stream) {
        Ok(r) => r,
        Err(_) => return write_response(stream, 400, "Bad Request", "text/plain", b"bad request"),
    };
    if !authorized(&request, config) {
        return write_response(stream, 401, "Unauthorized", "text/plain", b"unauthorized");
    }
    match (request.method.as_str(), request.path.as_str()) {
        ("POST", IR_CONTROL_PATH) => {
            let now_ms = clock.now_ms();
            match parse_ir_body(&request.body) {
                Some(level) => {
                    let result = state.lock().expect("state lock").set_level(level, now_ms);
                    match result {
                        Ok(()) => write_response(stream, 200, "OK", "text/plain", b"ok"),
                        Err(_) => write_response(
                            stream,
                            400,
                            "Bad Request",
                            "text/plain",
                            b"level out of range",
                        ),
                    }
                }
                None => write_response(stream, 400, "Bad Request", "text/plain", b"malformed body"),
            }
        }
        ("GET", "/state") => {
            let (level, levels) = {
                let s = state.lock().expect("state lock");
                (s.level(), s.n_levels())
            };
            let body = format!("level={level} levels={levels}");
            write_response(stream, 200, "OK", "text/plain", body.as_bytes())
        }
        ("GET", "/stream") => match parse_window(request.query.as_deref()) {
            Some((from_ms, to_ms)) => {
                let timeline = state.lock().expect("state lock").export_timeline(from_ms, to_ms);
                match render_window(&timeline, config) {
                    Ok(frames) => {
                        let mut body = Vec::new();
                        frames.write_stream(&mut body).expect("in-memory write");
                        write_response(stream, 200, "OK", "application/octet-stream", &body)
                    }
                    Err(e) => write_response(
                        stream,
                        500,
                        "Internal Server Error",
                        "text/plain",
                        e.to_string().as_bytes(),
                    ),
                }
            }
            None => write_response(stream, 400, "Bad Request", "text/plain", b"bad window"),
        },
        _ => write_response(stream, 404, "Not Found", "text/plain", b"not found"),
    }
}

/// Strict form parse: exactly `IRLedMaxStrength=<integer>`.
fn parse_ir_body(body: &[u8]) -> Option<usize> {
    let text = std::str::from_utf8(body).ok()?;
    let (field, value) = text.split_once('=')?;
    if field != IR_FIELD {
        return None;
    }
    value.parse().ok()
}

fn parse_window(query: Option<&str>) -> Option<(f64, f64)> {
    let query = query?;
    let spec = query
        .split('&')
        .find_map(|kv| kv.strip_prefix("window="))?;
    let (a, b) = spec.split_once(',')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

fn render_window(
    timeline: &SignalTimeline,
    config: &CameraConfig,
) -> Result<VideoFrameStream, CamsimError> {
    if timeline.is_empty() {
        return Ok(VideoFrameStream {
            fps: config.fps,
            width: config.width,
            height: config.height,
            frames: Vec::new(),
        });
    }
    let cam = CameraModel {
        fps: config.fps,
        quantization_bits: 8,
        width: config.width,
        height: config.height,
        exposure: Default::default(),
    };
    let levels = LevelTable::linear(config.n_levels)?;
    let stream = render_frames(
        timeline,
        &cam,
        &config.blob,
        &levels,
        &config.link,
        &TransitionModel { transition_ms: config.transition_ms },
        &config.background,
        config.render_seed,
    )?;
    Ok(stream)
}
