//! Real-clock timing fidelity: the client schedules each segment on an
//! absolute deadline from the transmission start, so scheduling error stays
//! bounded instead of accumulating.

use irlink::camsim::{CameraConfig, CameraServer, Clock, TransmitOptions};
use irlink::modem::{SchemeKind, SchemeParams};

#[test]
fn absolute_deadline_scheduling_keeps_jitter_bounded() {
    let clock = Clock::monotonic();
    let server = CameraServer::spawn(CameraConfig::default(), clock.clone()).unwrap();
    let addr = server.addr().to_string();

    // 10 ms segments stress the scheduler harder than the nominal 50 ms
    // grid while keeping the test short (one frame, 2.8 s wall time).
    let scheme = SchemeParams::for_rate(SchemeKind::Ook, 100.0, 2).unwrap();
    let mut opts = TransmitOptions::new(scheme);
    opts.clock = clock;
    let data: Vec<u8> = (0u8..32).collect();
    let summary = irlink::camsim::client_transmit(&addr, &data, &opts).unwrap();
    server.shutdown();

    assert_eq!(summary.segments, 281);
    assert!(
        summary.jitter_p99_ms < 10.0,
        "99th percentile scheduling error {} ms exceeds 10 ms",
        summary.jitter_p99_ms
    );
    // Wall time stays pinned to the schedule because deadlines are absolute.
    let nominal = 280.0 * 10.0 + opts.tail_ms;
    let elapsed = summary.end_ms - summary.start_ms;
    assert!(
        (elapsed - nominal).abs() < 50.0,
        "transmission took {elapsed} ms against a {nominal} ms schedule"
    );
}
