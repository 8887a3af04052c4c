//! Time source shared by the emulator and the transmitter client.
//!
//! The monotonic clock is for real transmissions. The virtual clock lets a
//! full transmission run in compressed time: sleeping advances the shared
//! counter instantly, and because every control request completes before the
//! client advances past its deadline, the recorded history is identical to a
//! jitter-free real-time run.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

#[derive(Clone)]
pub enum Clock {
    Monotonic(Instant),
    Virtual(Arc<AtomicU64>),
}

impl std::fmt::Debug for Clock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Clock::Monotonic(_) => write!(f, "Clock::Monotonic"),
            Clock::Virtual(_) => write!(f, "Clock::Virtual"),
        }
    }
}

impl Clock {
    pub fn monotonic() -> Self {
        Clock::Monotonic(Instant::now())
    }

    /// A clock starting at zero virtual milliseconds; clones share it.
    pub fn virtual_clock() -> Self {
        Clock::Virtual(Arc::new(AtomicU64::new(0)))
    }

    /// Current time in milliseconds since the clock epoch.
    pub fn now_ms(&self) -> f64 {
        match self {
            Clock::Monotonic(start) => start.elapsed().as_secs_f64() * 1000.0,
            Clock::Virtual(micros) => micros.load(Ordering::SeqCst) as f64 / 1000.0,
        }
    }

    /// Blocks (or advances) until `deadline_ms` on this clock's axis.
    pub fn sleep_until_ms(&self, deadline_ms: f64) {
        match self {
            Clock::Monotonic(start) => {
                let deadline = *start + Duration::from_secs_f64(deadline_ms.max(0.0) / 1000.0);
                loop {
                    let now = Instant::now();
                    if now >= deadline {
                        return;
                    }
                    let remaining = deadline - now;
                    if remaining > Duration::from_millis(2) {
                        std::thread::sleep(remaining - Duration::from_millis(1));
                    } else {
                        // Finish with a spin for sub-millisecond accuracy.
                        std::hint::spin_loop();
                    }
                }
            }
            Clock::Virtual(micros) => {
                let target = (deadline_ms.max(0.0) * 1000.0).round() as u64;
                micros.fetch_max(target, Ordering::SeqCst);
            }
        }
    }
}
