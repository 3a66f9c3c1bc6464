use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::clock::{period_length, Clock};
use super::log::{EventKind, GameLog, Side};
use crate::ids::{GameId, PlayerId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExclusionReason {
    /// The ten players on court could not be inferred.
    LineupUnknown,
    /// Points recorded for a team with no possession in the interval.
    Inconsistent,
    /// A player is listed on both sides.
    Overlap,
    /// Events fell between substitutions recorded at the same clock.
    ZeroDuration,
}

impl ExclusionReason {
    pub fn code(self) -> &'static str {
        match self {
            ExclusionReason::LineupUnknown => "lineup_unknown",
            ExclusionReason::Inconsistent => "inconsistent",
            ExclusionReason::Overlap => "overlap",
            ExclusionReason::ZeroDuration => "zero_duration",
        }
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ExclusionReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lineup_unknown" => Ok(ExclusionReason::LineupUnknown),
            "inconsistent" => Ok(ExclusionReason::Inconsistent),
            "overlap" => Ok(ExclusionReason::Overlap),
            "zero_duration" => Ok(ExclusionReason::ZeroDuration),
            other => Err(format!("unknown exclusion reason {other:?}")),
        }
    }
}

/// A maximal stretch of one period with no substitutions.
///
/// Lineups are sorted by player id. Excluded intervals whose lineup is
/// unknown carry empty lineups.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub game_id: GameId,
    pub season: String,
    pub idx: u32,
    pub home_on_court: Vec<PlayerId>,
    pub away_on_court: Vec<PlayerId>,
    pub duration_ms: u32,
    pub n_home_poss: u32,
    pub n_away_poss: u32,
    pub pts_home: u32,
    pub pts_away: u32,
    pub exclusion: Option<ExclusionReason>,
}

impl Interval {
    pub fn excluded(&self) -> bool {
        self.exclusion.is_some()
    }

    pub fn duration_secs(&self) -> f64 {
        f64::from(self.duration_ms) / 1000.0
    }
}

struct Lineups {
    home: Option<BTreeSet<PlayerId>>,
    away: Option<BTreeSet<PlayerId>>,
}

impl Lineups {
    fn known(home: &[PlayerId], away: &[PlayerId]) -> Self {
        Lineups {
            home: Some(home.iter().cloned().collect()),
            away: Some(away.iter().cloned().collect()),
        }
    }

    fn side_mut(&mut self, side: Side) -> &mut Option<BTreeSet<PlayerId>> {
        match side {
            Side::Home => &mut self.home,
            Side::Away => &mut self.away,
        }
    }

    fn on_court(&self, p: &PlayerId) -> bool {
        self.home.as_ref().is_some_and(|s| s.contains(p))
            || self.away.as_ref().is_some_and(|s| s.contains(p))
    }

    /// Applies a substitution; an impossible one makes the side unknown.
    fn substitute(&mut self, side: Side, player_in: &PlayerId, player_out: &PlayerId) {
        let already_on = self.on_court(player_in);
        let slot = self.side_mut(side);
        match slot {
            Some(set) if set.contains(player_out) && !already_on => {
                set.remove(player_out);
                set.insert(player_in.clone());
            }
            _ => *slot = None,
        }
    }
}

struct Open {
    start: Clock,
    n: [u32; 2],
    pts: [u32; 2],
}

impl Open {
    fn new(start: Clock) -> Self {
        Open {
            start,
            n: [0; 2],
            pts: [0; 2],
        }
    }

    fn has_content(&self) -> bool {
        self.n != [0, 0] || self.pts != [0, 0]
    }
}

fn idx(side: Side) -> usize {
    match side {
        Side::Home => 0,
        Side::Away => 1,
    }
}

/// Splits a game into constant-lineup intervals.
///
/// Boundaries are every substitution and every period end. Lineups start from
/// the header's starters (or a period lineup, when the header supplies one)
/// and follow the substitutions. A substitution whose outgoing player is not
/// on court makes that side unknown, which excludes every remaining interval
/// of the period; the next period lineup in the header restores tracking.
pub fn extract_intervals(log: &GameLog) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut lineups = Lineups::known(&log.home_starters, &log.away_starters);
    let mut events = log.events.iter().peekable();

    for period in 1..=log.periods() {
        if let Some(l) = log.period_lineup(period) {
            lineups = Lineups::known(&l.home, &l.away);
        }
        let mut open = Open::new(period_length(period));

        while let Some(e) = events.next_if(|e| e.period == period) {
            let side = e.team.as_ref().and_then(|t| log.side_of(t));
            match (&e.kind, side) {
                (EventKind::Substitution { player_in, player_out }, Some(side)) => {
                    close(log, &lineups, &mut open, e.clock, &mut out);
                    lineups.substitute(side, player_in, player_out);
                }
                (EventKind::PossessionStart, Some(side)) => open.n[idx(side)] += 1,
                (EventKind::Points { value, .. }, Some(side)) => {
                    open.pts[idx(side)] += u32::from(*value)
                }
                (EventKind::PeriodEnd, _) => close(log, &lineups, &mut open, e.clock, &mut out),
                // The parser guarantees a participating team on every other kind.
                _ => {}
            }
        }
    }
    out
}

fn close(log: &GameLog, lineups: &Lineups, open: &mut Open, at: Clock, out: &mut Vec<Interval>) {
    let duration_ms = open.start.millis() - at.millis();
    if duration_ms == 0 && !open.has_content() {
        *open = Open::new(at);
        return;
    }
    let (home, away, mut exclusion) = match (&lineups.home, &lineups.away) {
        (Some(h), Some(a)) => {
            let home: Vec<_> = h.iter().cloned().collect();
            let away: Vec<_> = a.iter().cloned().collect();
            let reason = if !h.is_disjoint(a) {
                Some(ExclusionReason::Overlap)
            } else {
                None
            };
            (home, away, reason)
        }
        _ => (Vec::new(), Vec::new(), Some(ExclusionReason::LineupUnknown)),
    };
    if exclusion.is_none() && duration_ms == 0 {
        exclusion = Some(ExclusionReason::ZeroDuration);
    }
    if exclusion.is_none() && ((open.pts[0] > 0 && open.n[0] == 0) || (open.pts[1] > 0 && open.n[1] == 0)) {
        exclusion = Some(ExclusionReason::Inconsistent);
    }
    out.push(Interval {
        game_id: log.game_id.clone(),
        season: log.season.clone(),
        idx: out.len() as u32,
        home_on_court: home,
        away_on_court: away,
        duration_ms,
        n_home_poss: open.n[0],
        n_away_poss: open.n[1],
        pts_home: open.pts[0],
        pts_away: open.pts[1],
        exclusion,
    });
    *open = Open::new(at);
}
