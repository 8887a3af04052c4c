//! Transmitter client: frames a file, encodes it, and drives the camera's
//! IR control endpoint on an absolute-deadline schedule so timing errors do
//! not accumulate across segments.

use super::clock::Clock;
use super::http::{read_response, HttpResponse};
use super::server::{IR_CONTROL_PATH, IR_FIELD};
use super::CamsimError;
use crate::bitframe::{fragment, serialize_frame, Bitstream};
use crate::modem::{append_tail_hold, encode, SchemeParams};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use std::io::Write;
use std::net::TcpStream;

#[derive(Debug, Clone)]
pub struct TransmitOptions {
    pub scheme: SchemeParams,
    pub auth: Option<String>,
    pub clock: Clock,
    /// Hold appended after the data so the receiver can settle the final
    /// symbol; duration in milliseconds.
    pub tail_ms: f64,
}

impl TransmitOptions {
    pub fn new(scheme: SchemeParams) -> Self {
        Self { scheme, auth: None, clock: Clock::monotonic(), tail_ms: 150.0 }
    }
}

/// Result of one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitSummary {
    pub frames: usize,
    pub segments: usize,
    pub posts: usize,
    /// Transmission window on the shared clock, tail included.
    pub start_ms: f64,
    pub end_ms: f64,
    /// Deviation of actual send instants from their deadlines.
    pub jitter_max_ms: f64,
    pub jitter_p99_ms: f64,
}

/// Builds the IR control request byte-for-byte as the camera SDK emits it.
pub fn build_set_ir_request(host: &str, level: usize, auth: Option<&str>) -> Vec<u8> {
    let body = format!("{IR_FIELD}={level}");
    let mut head = format!("POST {IR_CONTROL_PATH} HTTP/1.1\r\nHost: {host}\r\nAccept: */*\r\n");
    if let Some(cred) = auth {
        head.push_str(&format!("Authorization: Basic {}\r\n", BASE64.encode(cred)));
    }
    head.push_str(&format!(
        "Referer: http://{host}/\r\nConnection: close\r\nContent-Length: {}\r\n\r\n",
        body.len()
    ));
    let mut request = head.into_bytes();
    request.extend_from_slice(body.as_bytes());
    request
}

fn roundtrip(addr: &str, request: &[u8]) -> Result<HttpResponse, CamsimError> {
    let mut stream = TcpStream::connect(addr)?;
    stream.write_all(request)?;
    stream.flush()?;
    Ok(read_response(&mut stream)?)
}

fn get(addr: &str, path: &str, auth: Option<&str>) -> Result<HttpResponse, CamsimError> {
    let mut head = format!("GET {path} HTTP/1.1\r\nHost: {addr}\r\nAccept: */*\r\n");
    if let Some(cred) = auth {
        head.push_str(&format!("Authorization: Basic {}\r\n", BASE64.encode(cred)));
    }
    head.push_str("Connection: close\r\n\r\n");
    roundtrip(addr, head.as_bytes())
}

/// Fetches the camera state endpoint: `(level, n_levels)`.
pub fn fetch_state(addr: &str, auth: Option<&str>) -> Result<(usize, usize), CamsimError> {
    let response = get(addr, "/state", auth)?;
    if response.status != 200 {
        return Err(CamsimError::Http(format!("/state returned {}", response.status)));
    }
    let text = response.body_text();
    let mut level = None;
    let mut levels = None;
    for token in text.split_whitespace() {
        if let Some(v) = token.strip_prefix("level=") {
            level = v.parse().ok();
        } else if let Some(v) = token.strip_prefix("levels=") {
            levels = v.parse().ok();
        }
    }
    match (level, levels) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(CamsimError::Http(format!("unparseable state body '{text}'"))),
    }
}

/// Fetches rendered video for a window of the camera's recording.
pub fn fetch_stream(
    addr: &str,
    from_ms: f64,
    to_ms: f64,
    auth: Option<&str>,
) -> Result<crate::channel::VideoFrameStream, CamsimError> {
    let response = get(addr, &format!("/stream?window={from_ms},{to_ms}"), auth)?;
    if response.status != 200 {
        return Err(CamsimError::Http(format!("/stream returned {}", response.status)));
    }
    Ok(crate::channel::VideoFrameStream::read_stream(&response.body[..])?)
}

/// Frames `data`, encodes it with the scheme, and plays the resulting
/// timeline against the camera's control endpoint. Level commands are
/// issued only when the level changes; each segment is scheduled on an
/// absolute deadline from the transmission start.
pub fn client_transmit(
    addr: &str,
    data: &[u8],
    opts: &TransmitOptions,
) -> Result<TransmitSummary, CamsimError> {
    let (_, n_levels) = fetch_state(addr, opts.auth.as_deref())?;
    let highest = opts.scheme.max_level();
    if highest >= n_levels {
        return Err(CamsimError::PreFlight(format!(
            "scheme needs level {highest} but camera has only {n_levels} levels"
        )));
    }

    let frames = fragment(data);
    let mut bits = Bitstream::new();
    for frame in &frames {
        bits.extend(&serialize_frame(frame));
    }
    let mut timeline = encode(&bits, &opts.scheme)?;
    append_tail_hold(&mut timeline, &opts.scheme, opts.tail_ms);

    let auth = opts.auth.as_deref();
    let start_ms = opts.clock.now_ms();
    let mut current_level: Option<usize> = None;
    let mut posts = 0usize;
    let mut offset_ms = 0.0;
    let mut jitters: Vec<f64> = Vec::with_capacity(timeline.len());
    for (index, segment) in timeline.segments.iter().enumerate() {
        let deadline = start_ms + offset_ms;
        opts.clock.sleep_until_ms(deadline);
        jitters.push((opts.clock.now_ms() - deadline).max(0.0));
        if current_level != Some(segment.level) {
            let request = build_set_ir_request(addr, segment.level, auth);
            let response = roundtrip(addr, &request).map_err(|e| CamsimError::Aborted {
                segment: index,
                reason: e.to_string(),
            })?;
            if response.status != 200 {
                return Err(CamsimError::Aborted {
                    segment: index,
                    reason: format!("camera answered {}", response.status),
                });
            }
            posts += 1;
            current_level = Some(segment.level);
        }
        offset_ms += segment.duration_ms;
    }
    opts.clock.sleep_until_ms(start_ms + offset_ms);
    let end_ms = opts.clock.now_ms();

    jitters.sort_by(|a, b| a.partial_cmp(b).expect("finite jitter"));
    let jitter_max_ms = jitters.last().copied().unwrap_or(0.0);
    let jitter_p99_ms = if jitters.is_empty() {
        0.0
    } else {
        jitters[((jitters.len() as f64 * 0.99) as usize).min(jitters.len() - 1)]
    };
    Ok(TransmitSummary {
        frames: frames.len(),
        segments: timeline.len(),
        posts,
        start_ms,
        end_ms,
        jitter_max_ms,
        jitter_p99_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_ir_request_is_byte_exact() {
        let request = build_set_ir_request("192.168.3.14", 1, Some("user:pass"));
        let expected = b"POST /command/ircf.cgi HTTP/1.1\r\n\
Host: 192.168.3.14\r\n\
Accept: */*\r\n\
Authorization: Basic dXNlcjpwYXNz\r\n\
Referer: http://192.168.3.14/\r\n\
Connection: close\r\n\
Content-Length: 18\r\n\
\r\n\
IRLedMaxStrength=1";
        assert_eq!(request, expected.to_vec());
    }

    #[test]
    fn set_ir_request_without_auth_omits_header() {
        let request = build_set_ir_request("127.0.0.1:8080", 4, None);
        let text = String::from_utf8(request).unwrap();
        assert!(text.starts_with("POST /command/ircf.cgi HTTP/1.1\r\n"));
        assert!(!text.contains("Authorization"));
        assert!(text.ends_with("\r\n\r\nIRLedMaxStrength=4"));
        // The body is the single form field, nothing else.
        let body = text.split("\r\n\r\n").nth(1).unwrap();
        assert_eq!(body, "IRLedMaxStrength=4");
        assert!(text.contains(&format!("Content-Length: {}\r\n", body.len())));
    }
}
