//! Play-by-play ingestion.
//!
//! A canonical event log is UTF-8 JSON-lines: one header record per game
//! (teams, starters, date, optional per-period lineups) followed by that
//! game's events. Lineups are tracked from the starters through every
//! substitution; the game is cut into intervals at each substitution and at
//! each period boundary. An interval whose ten players cannot be inferred is
//! kept but marked excluded.

mod boxscore;
mod clock;
mod export;
mod intervals;
mod log;

pub use boxscore::{crosscheck_boxscore, read_boxscores, write_boxscores, BoxScore, Mismatch, ValidationReport, DEFAULT_TOLERANCE_SECS};
pub use clock::{period_length, Clock};
pub use export::{read_intervals, write_intervals};
pub use intervals::{extract_intervals, ExclusionReason, Interval};
pub use log::{
    parse_event_log, write_event_log, EventKind, GameEvent, GameLog, ParsedLogs, PeriodLineup,
    RejectedGame, Side,
};
