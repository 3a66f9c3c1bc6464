use std::fmt;

use serde::{Deserialize, Serialize};

/// Length of a regulation quarter in milliseconds.
pub const QUARTER_MS: u32 = 720_000;
/// Length of an overtime period in milliseconds.
pub const OVERTIME_MS: u32 = 300_000;

/// Game clock (time remaining in the period) on a millisecond grid.
///
/// Keeping the clock integral makes interval durations add up to the period
/// length exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clock(u32);

impl Clock {
    pub const ZERO: Clock = Clock(0);

    pub fn from_millis(ms: u32) -> Self {
        Clock(ms)
    }

    /// Rounds seconds to the nearest millisecond. Negative or non-finite
    /// values are rejected.
    pub fn from_secs(secs: f64) -> Option<Self> {
        if !secs.is_finite() || secs < 0.0 || secs > f64::from(u32::MAX) / 1000.0 {
            return None;
        }
        Some(Clock((secs * 1000.0).round() as u32))
    }

    pub fn millis(self) -> u32 {
        self.0
    }

    pub fn secs(self) -> f64 {
        f64::from(self.0) / 1000.0
    }
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}", self.secs())
    }
}

/// Periods 1-4 are 12-minute quarters; anything later is a 5-minute overtime.
pub fn period_length(period: u32) -> Clock {
    if period <= 4 {
        Clock(QUARTER_MS)
    } else {
        Clock(OVERTIME_MS)
    }
}
