//! IR LED state machine: the current level plus the full timestamped
//! history of accepted changes, from which recorded video is reconstructed.

use super::CamsimError;
use crate::modem::SignalTimeline;

#[derive(Debug, Clone)]
pub struct CameraState {
    n_levels: usize,
    /// (timestamp ms, level) of every accepted change; non-decreasing time.
    history: Vec<(f64, usize)>,
}

impl CameraState {
    /// A fresh camera starts dark at the given time.
    pub fn new(n_levels: usize, now_ms: f64) -> Self {
        Self { n_levels, history: vec![(now_ms, 0)] }
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn level(&self) -> usize {
        self.history.last().expect("seeded history").1
    }

    pub fn history(&self) -> &[(f64, usize)] {
        &self.history
    }

    /// Accepts an in-range level change; rejected requests leave the state
    /// untouched.
    pub fn set_level(&mut self, level: usize, now_ms: f64) -> Result<(), CamsimError> {
        if level >= self.n_levels {
            return Err(CamsimError::LevelOutOfRange { level, n_levels: self.n_levels });
        }
        let last_t = self.history.last().expect("seeded history").0;
        self.history.push((now_ms.max(last_t), level));
        Ok(())
    }

    /// Converts the history restricted to `[from_ms, to_ms)` into a timeline
    /// of (level, duration) segments. The level in force at the window start
    /// opens the first segment; a window that ends before the first recorded
    /// entry is empty.
    pub fn export_timeline(&self, from_ms: f64, to_ms: f64) -> SignalTimeline {
        let mut timeline = SignalTimeline::new();
        if to_ms <= from_ms {
            return timeline;
        }
        let first_t = self.history.first().expect("seeded history").0;
        if to_ms <= first_t {
            return timeline;
        }
        let start = from_ms.max(first_t);

        // Level in force at the window start.
        let mut current = self
            .history
            .iter()
            .take_while(|(t, _)| *t <= start)
            .last()
            .map(|(_, level)| *level)
            .unwrap_or(0);
        let mut cursor = start;
        for &(t, level) in self.history.iter().filter(|(t, _)| *t > start && *t < to_ms) {
            if level == current {
                continue;
            }
            if t > cursor {
                timeline.push(current, t - cursor);
            }
            current = level;
            cursor = t;
        }
        if to_ms > cursor {
            timeline.push(current, to_ms - cursor);
        }
        timeline
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepted_changes_append_in_order() {
        let mut state = CameraState::new(5, 0.0);
        assert_eq!(state.level(), 0);
        state.set_level(4, 10.0).unwrap();
        state.set_level(0, 12.0).unwrap();
        assert_eq!(state.level(), 0);
        assert_eq!(state.history(), &[(0.0, 0), (10.0, 4), (12.0, 0)]);
    }

    #[test]
    fn rejected_change_leaves_state_untouched() {
        let mut state = CameraState::new(5, 0.0);
        state.set_level(3, 5.0).unwrap();
        let before = state.history().to_vec();
        assert!(matches!(
            state.set_level(9, 6.0),
            Err(CamsimError::LevelOutOfRange { level: 9, n_levels: 5 })
        ));
        assert_eq!(state.history(), &before[..]);
        assert_eq!(state.level(), 3);
    }

    #[test]
    fn export_splits_window_at_changes() {
        let mut state = CameraState::new(2, 0.0);
        state.set_level(1, 100.0).unwrap();
        let tl = state.export_timeline(0.0, 200.0);
        assert_eq!(tl.segments.len(), 2);
        assert_eq!((tl.segments[0].level, tl.segments[0].duration_ms), (0, 100.0));
        assert_eq!((tl.segments[1].level, tl.segments[1].duration_ms), (1, 100.0));
    }

    #[test]
    fn export_constant_window_is_one_segment() {
        let mut state = CameraState::new(5, 0.0);
        state.set_level(2, 50.0).unwrap();
        let tl = state.export_timeline(60.0, 160.0);
        assert_eq!(tl.segments.len(), 1);
        assert_eq!((tl.segments[0].level, tl.segments[0].duration_ms), (2, 100.0));
    }

    #[test]
    fn export_before_history_is_empty() {
        let state = CameraState::new(5, 1000.0);
        assert!(state.export_timeline(0.0, 500.0).is_empty());
        assert!(state.export_timeline(100.0, 100.0).is_empty());
    }
}
