//! Networked camera emulation: an HTTP control endpoint for the IR LED
//! state, a synthetic video stream derived from the commanded level history,
//! and the transmitter client that drives it.

mod client;
mod clock;
mod http;
mod server;
mod state;

pub use client::{build_set_ir_request, client_transmit, TransmitOptions, TransmitSummary};
pub use clock::Clock;
pub use http::{read_response, HttpResponse};
pub use server::{CameraConfig, CameraServer};
pub use state::CameraState;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CamsimError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("http: {0}")]
    Http(String),
    #[error("level {level} out of range, camera has {n_levels} levels")]
    LevelOutOfRange { level: usize, n_levels: usize },
    #[error("pre-flight check failed: {0}")]
    PreFlight(String),
    #[error("transmission aborted at segment {segment}: {reason}")]
    Aborted { segment: usize, reason: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Modem(#[from] crate::modem::ModemError),
}

pub use client::{fetch_state, fetch_stream};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{SchemeKind, SchemeParams};
    use crate::vision::decode_stream;
    use std::io::Write;

    fn spawn_camera(auth: Option<&str>) -> (CameraServer, String, Clock) {
        let clock = Clock::virtual_clock();
        let config = CameraConfig { auth: auth.map(str::to_string), ..CameraConfig::default() };
        let server = CameraServer::spawn(config, clock.clone()).unwrap();
        let addr = server.addr().to_string();
        (server, addr, clock)
    }

    fn post_raw(addr: &str, request: &[u8]) -> HttpResponse {
        let mut stream = std::net::TcpStream::connect(addr).unwrap();
        stream.write_all(request).unwrap();
        read_response(&mut stream).unwrap()
    }

    #[test]
    fn fresh_camera_reports_level_zero() {
        let (server, addr, _clock) = spawn_camera(None);
        let (level, levels) = fetch_state(&addr, None).unwrap();
        assert_eq!((level, levels), (0, 5));
        server.shutdown();
    }

    #[test]
    fn set_ir_updates_state_and_history() {
        let (server, addr, clock) = spawn_camera(None);
        clock.sleep_until_ms(10.0);
        let ok = post_raw(&addr, &build_set_ir_request(&addr, 1, None));
        assert_eq!(ok.status, 200);
        assert_eq!(fetch_state(&addr, None).unwrap().0, 1);

        clock.sleep_until_ms(20.0);
        post_raw(&addr, &build_set_ir_request(&addr, 4, None));
        clock.sleep_until_ms(30.0);
        post_raw(&addr, &build_set_ir_request(&addr, 0, None));
        assert_eq!(fetch_state(&addr, None).unwrap().0, 0);
        let tl = server.export_timeline(0.0, 40.0);
        let levels: Vec<usize> = tl.segments.iter().map(|s| s.level).collect();
        assert_eq!(levels, vec![0, 1, 4, 0]);
        server.shutdown();
    }

    #[test]
    fn out_of_range_level_is_rejected_without_mutation() {
        let (server, addr, _clock) = spawn_camera(None);
        post_raw(&addr, &build_set_ir_request(&addr, 2, None));
        let bad = post_raw(&addr, &build_set_ir_request(&addr, 9, None));
        assert_eq!(bad.status, 400);
        assert_eq!(fetch_state(&addr, None).unwrap().0, 2);
        server.shutdown();
    }

    #[test]
    fn malformed_body_is_rejected() {
        let (server, addr, _clock) = spawn_camera(None);
        let request = b"POST /command/ircf.cgi HTTP/1.1\r\nHost: x\r\nContent-Length: 9\r\n\r\nIRLed=1&x";
        assert_eq!(post_raw(&addr, request).status, 400);
        assert_eq!(fetch_state(&addr, None).unwrap().0, 0);
        server.shutdown();
    }

    #[test]
    fn missing_auth_is_unauthorized() {
        let (server, addr, _clock) = spawn_camera(Some("cam:secret"));
        let denied = post_raw(&addr, &build_set_ir_request(&addr, 1, None));
        assert_eq!(denied.status, 401);
        let wrong = post_raw(&addr, &build_set_ir_request(&addr, 1, Some("cam:wrong")));
        assert_eq!(wrong.status, 401);
        let granted = post_raw(&addr, &build_set_ir_request(&addr, 1, Some("cam:secret")));
        assert_eq!(granted.status, 200);
        assert_eq!(fetch_state(&addr, Some("cam:secret")).unwrap().0, 1);
        server.shutdown();
    }

    #[test]
    fn preflight_rejects_scheme_beyond_camera_levels() {
        let clock = Clock::virtual_clock();
        let config = CameraConfig { n_levels: 2, ..CameraConfig::default() };
        let server = CameraServer::spawn(config, clock.clone()).unwrap();
        let addr = server.addr().to_string();
        let scheme = SchemeParams::for_rate(SchemeKind::Ask, 40.0, 5).unwrap();
        let mut opts = TransmitOptions::new(scheme);
        opts.clock = clock;
        let err = client_transmit(&addr, b"hi", &opts).unwrap_err();
        assert!(matches!(err, CamsimError::PreFlight(_)), "{err}");
        server.shutdown();
    }

    #[test]
    fn transmit_to_dead_address_fails() {
        let scheme = SchemeParams::for_rate(SchemeKind::Ook, 20.0, 2).unwrap();
        let opts = TransmitOptions::new(scheme);
        assert!(client_transmit("127.0.0.1:1", b"x", &opts).is_err());
    }

    #[test]
    fn transmit_record_decode_roundtrip() {
        let (server, addr, clock) = spawn_camera(None);
        let scheme = SchemeParams::for_rate(SchemeKind::Ook, 20.0, 5).unwrap();
        let mut opts = TransmitOptions::new(scheme.clone());
        opts.clock = clock.clone();
        let data: Vec<u8> = (0u8..32).collect();
        let summary = client_transmit(&addr, &data, &opts).unwrap();
        assert_eq!(summary.frames, 1);
        // One segment per bit plus the trailing hold.
        assert_eq!(summary.segments, 281);
        // Virtual clock: zero observable jitter.
        assert_eq!(summary.jitter_max_ms, 0.0);
        // 280 bits at 20 bit/s is a 14 s transmission, plus the 150 ms tail.
        let duration = summary.end_ms - summary.start_ms;
        assert!((duration - (280.0 * 50.0 + 150.0)).abs() < 1e-6, "duration {duration} ms");

        let frames = fetch_stream(&addr, summary.start_ms, summary.end_ms, None).unwrap();
        let report = decode_stream(&frames, &scheme);
        assert_eq!(report.frames_ok, 1);
        let recovered = report.payloads[0].to_bytes().unwrap();
        assert_eq!(recovered, data);
        server.shutdown();
    }

    #[test]
    fn stream_window_before_history_is_empty() {
        let clock = Clock::virtual_clock();
        clock.sleep_until_ms(1000.0);
        let server = CameraServer::spawn(CameraConfig::default(), clock.clone()).unwrap();
        let addr = server.addr().to_string();
        let frames = fetch_stream(&addr, 0.0, 500.0, None).unwrap();
        assert!(frames.frames.is_empty());
        server.shutdown();
    }

    #[test]
    fn concurrent_reads_see_consistent_state() {
        let (server, addr, _clock) = spawn_camera(None);
        let addr = std::sync::Arc::new(addr);
        let mut handles = Vec::new();
        for t in 0..4 {
            let addr = std::sync::Arc::clone(&addr);
            handles.push(std::thread::spawn(move || {
                for i in 0..20 {
                    if t == 0 {
                        post_raw(&addr, &build_set_ir_request(&addr, i % 5, None));
                    } else {
                        let (level, levels) = fetch_state(&addr, None).unwrap();
                        assert_eq!(levels, 5);
                        assert!(level < 5);
                    }
                }
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        server.shutdown();
    }
}
