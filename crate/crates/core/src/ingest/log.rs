use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::clock::{period_length, Clock};
use crate::error::{Error, Result};
use crate::ids::{GameId, PlayerId, TeamId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Home,
    Away,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Home => Side::Away,
            Side::Away => Side::Home,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Substitution {
        player_in: PlayerId,
        player_out: PlayerId,
    },
    PossessionStart,
    /// Free throws are separate `value = 1` events inside the current
    /// possession.
    Points {
        value: u8,
        player: Option<PlayerId>,
    },
    PeriodEnd,
}

impl EventKind {
    fn tag(&self) -> &'static str {
        match self {
            EventKind::Substitution { .. } => "substitution",
            EventKind::PossessionStart => "possession_start",
            EventKind::Points { .. } => "points",
            EventKind::PeriodEnd => "period_end",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameEvent {
    pub period: u32,
    pub clock: Clock,
    /// Acting team; `None` only for `PeriodEnd`.
    pub team: Option<TeamId>,
    pub kind: EventKind,
}

/// Players on court at the start of a period. Used to resynchronise lineup
/// tracking after an unresolvable substitution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodLineup {
    pub period: u32,
    pub home: Vec<PlayerId>,
    pub away: Vec<PlayerId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameLog {
    pub game_id: GameId,
    pub season: String,
    pub date: String,
    pub home_team: TeamId,
    pub away_team: TeamId,
    pub home_starters: Vec<PlayerId>,
    pub away_starters: Vec<PlayerId>,
    pub period_lineups: Vec<PeriodLineup>,
    pub events: Vec<GameEvent>,
}

impl GameLog {
    pub fn side_of(&self, team: &TeamId) -> Option<Side> {
        if *team == self.home_team {
            Some(Side::Home)
        } else if *team == self.away_team {
            Some(Side::Away)
        } else {
            None
        }
    }

    pub fn substitution_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Substitution { .. }))
            .count()
    }

    /// Number of periods played (the highest period with an event).
    pub fn periods(&self) -> u32 {
        self.events.iter().map(|e| e.period).max().unwrap_or(0)
    }

    pub fn period_lineup(&self, period: u32) -> Option<&PeriodLineup> {
        self.period_lineups.iter().find(|l| l.period == period)
    }

    /// Sum of the lengths of all periods played.
    pub fn total_time(&self) -> u64 {
        (1..=self.periods())
            .map(|p| u64::from(period_length(p).millis()))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedGame {
    pub game_id: GameId,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedLogs {
    pub games: Vec<GameLog>,
    pub rejected: Vec<RejectedGame>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventRecord {
    game_id: String,
    season: String,
    period: u32,
    clock_remaining: f64,
    kind: String,
    team: Option<String>,
    player_in: Option<String>,
    player_out: Option<String>,
    player: Option<String>,
    value: Option<u8>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderRecord {
    game_id: String,
    season: String,
    kind: String,
    date: String,
    home_team: String,
    away_team: String,
    home_starters: Vec<String>,
    away_starters: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    period_lineups: Vec<PeriodLineup>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn check_lineup(home: &[PlayerId], away: &[PlayerId]) -> std::result::Result<(), String> {
    let h: BTreeSet<_> = home.iter().collect();
    let a: BTreeSet<_> = away.iter().collect();
    if home.len() != 5 || h.len() != 5 || away.len() != 5 || a.len() != 5 {
        return Err("lineups need exactly 5 distinct players per side".into());
    }
    if !h.is_disjoint(&a) {
        return Err("a player appears on both sides".into());
    }
    Ok(())
}

fn to_players(v: Vec<String>) -> Vec<PlayerId> {
    v.into_iter().map(PlayerId::from).collect()
}

impl HeaderRecord {
    fn into_log(self, line: usize) -> Result<GameLog> {
        if chrono::NaiveDate::parse_from_str(&self.date, "%Y-%m-%d").is_err() {
            return Err(parse_err(line, format!("bad date {:?}", self.date)));
        }
        if self.home_team == self.away_team {
            return Err(parse_err(line, "home and away team are the same"));
        }
        let home_starters = to_players(self.home_starters);
        let away_starters = to_players(self.away_starters);
        check_lineup(&home_starters, &away_starters)
            .map_err(|m| parse_err(line, format!("starters: {m}")))?;
        let mut seen = BTreeSet::new();
        for l in &self.period_lineups {
            if l.period < 1 || !seen.insert(l.period) {
                return Err(parse_err(line, format!("bad period lineup for period {}", l.period)));
            }
            check_lineup(&l.home, &l.away)
                .map_err(|m| parse_err(line, format!("period {} lineup: {m}", l.period)))?;
        }
        Ok(GameLog {
            game_id: GameId::new(self.game_id),
            season: self.season,
            date: self.date,
            home_team: TeamId::new(self.home_team),
            away_team: TeamId::new(self.away_team),
            home_starters,
            away_starters,
            period_lineups: self.period_lineups,
            events: Vec::new(),
        })
    }
}

impl EventRecord {
    fn into_event(self, line: usize, log: &GameLog) -> Result<GameEvent> {
        if self.period < 1 {
            return Err(parse_err(line, "period must be >= 1"));
        }
        let clock = Clock::from_secs(self.clock_remaining)
            .ok_or_else(|| parse_err(line, "clock_remaining must be a finite non-negative number"))?;
        if self.season != log.season {
            return Err(parse_err(line, "season differs from the game header"));
        }
        let team = self.team.map(TeamId::new);
        let need_team = || -> Result<()> {
            match &team {
                Some(t) if log.side_of(t).is_some() => Ok(()),
                Some(t) => Err(parse_err(line, format!("team {t} is not playing in this game"))),
                None => Err(parse_err(line, "missing team")),
            }
        };
        let kind = match self.kind.as_str() {
            "substitution" => {
                need_team()?;
                let (Some(pin), Some(pout)) = (self.player_in, self.player_out) else {
                    return Err(parse_err(line, "substitution needs player_in and player_out"));
                };
                if pin == pout {
                    return Err(parse_err(line, "player_in equals player_out"));
                }
                EventKind::Substitution {
                    player_in: PlayerId::new(pin),
                    player_out: PlayerId::new(pout),
                }
            }
            "possession_start" => {
                need_team()?;
                EventKind::PossessionStart
            }
            "points" => {
                need_team()?;
                match self.value {
                    Some(v @ 1..=3) => EventKind::Points {
                        value: v,
                        player: self.player.map(PlayerId::new),
                    },
                    _ => return Err(parse_err(line, "points value must be 1, 2 or 3")),
                }
            }
            "period_end" => EventKind::PeriodEnd,
            other => return Err(parse_err(line, format!("unknown event kind {other:?}"))),
        };
        Ok(GameEvent {
            period: self.period,
            clock,
            team,
            kind,
        })
    }
}

/// Checks ordering and completeness; a failure rejects the game without
/// failing the parse.
fn check_game(log: &GameLog) -> std::result::Result<(), String> {
    if log.events.is_empty() {
        return Err("no events".into());
    }
    let mut period = 1;
    let mut last_clock = period_length(1);
    let mut ended = false;
    for e in &log.events {
        if e.period != period {
            if e.period < period {
                return Err(format!("period goes backwards ({} after {period})", e.period));
            }
            if !ended || e.period != period + 1 {
                return Err(format!("period {period} has no period_end before period {}", e.period));
            }
            period = e.period;
            last_clock = period_length(period);
            ended = false;
        } else if ended {
            return Err(format!("event after period_end in period {period}"));
        }
        if e.clock > period_length(period) {
            return Err(format!("clock {} exceeds the length of period {period}", e.clock));
        }
        if e.clock > last_clock {
            return Err(format!(
                "clock goes backwards in period {period} ({} after {})",
                e.clock, last_clock
            ));
        }
        last_clock = e.clock;
        if e.kind == EventKind::PeriodEnd {
            if e.clock != Clock::ZERO {
                return Err(format!("period {period} ends with {} remaining", e.clock));
            }
            ended = true;
        }
    }
    if !ended {
        return Err(format!("period {period} has no period_end"));
    }
    Ok(())
}

/// Parses a JSON-lines event log.
///
/// Malformed lines are fatal and carry the 1-based line number. Games whose
/// events are out of order or incomplete are returned in
/// [`ParsedLogs::rejected`].
pub fn parse_event_log<R: BufRead>(reader: R) -> Result<ParsedLogs> {
    let mut games: Vec<GameLog> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(trimmed).map_err(|e| parse_err(lineno, e.to_string()))?;
        let kind = value
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| parse_err(lineno, "missing kind"))?;
        if kind == "header" {
            let rec: HeaderRecord =
                serde_json::from_value(value).map_err(|e| parse_err(lineno, e.to_string()))?;
            if by_id.contains_key(&rec.game_id) {
                return Err(parse_err(lineno, format!("duplicate header for game {}", rec.game_id)));
            }
            by_id.insert(rec.game_id.clone(), games.len());
            games.push(rec.into_log(lineno)?);
        } else {
            let rec: EventRecord =
                serde_json::from_value(value).map_err(|e| parse_err(lineno, e.to_string()))?;
            let Some(&gi) = by_id.get(&rec.game_id) else {
                return Err(parse_err(lineno, format!("event for game {} before its header", rec.game_id)));
            };
            let event = rec.into_event(lineno, &games[gi])?;
            games[gi].events.push(event);
        }
    }

    let mut out = ParsedLogs::default();
    for g in games {
        match check_game(&g) {
            Ok(()) => out.games.push(g),
            Err(reason) => out.rejected.push(RejectedGame {
                game_id: g.game_id,
                reason,
            }),
        }
    }
    Ok(out)
}

fn strings(p: &[PlayerId]) -> Vec<String> {
    p.iter().map(|x| x.to_string()).collect()
}

/// Writes games in the canonical JSON-lines format, header first.
pub fn write_event_log<W: Write>(games: &[GameLog], mut w: W) -> Result<()> {
    for g in games {
        let header = HeaderRecord {
            game_id: g.game_id.to_string(),
            season: g.season.clone(),
            kind: "header".into(),
            date: g.date.clone(),
            home_team: g.home_team.to_string(),
            away_team: g.away_team.to_string(),
            home_starters: strings(&g.home_starters),
            away_starters: strings(&g.away_starters),
            period_lineups: g.period_lineups.clone(),
        };
        serde_json::to_writer(&mut w, &header).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        for e in &g.events {
            let (player_in, player_out, player, value) = match &e.kind {
                EventKind::Substitution {
                    player_in,
                    player_out,
                } => (Some(player_in.to_string()), Some(player_out.to_string()), None, None),
                EventKind::Points { value, player } => {
                    (None, None, player.as_ref().map(|p| p.to_string()), Some(*value))
                }
                _ => (None, None, None, None),
            };
            let rec = EventRecord {
                game_id: g.game_id.to_string(),
                season: g.season.clone(),
                period: e.period,
                clock_remaining: e.clock.secs(),
                kind: e.kind.tag().to_string(),
                team: e.team.as_ref().map(|t| t.to_string()),
                player_in,
                player_out,
                player,
                value,
            };
            serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn header(game: &str) -> String {
        format!(
            r#"{{"game_id":"{game}","season":"2008-09","kind":"header","date":"2009-01-02","home_team":"H","away_team":"A","home_starters":["h1","h2","h3","h4","h5"],"away_starters":["a1","a2","a3","a4","a5"]}}"#
        )
    }

    fn ev(game: &str, period: u32, clock: f64, kind: &str, extra: &str) -> String {
        format!(
            r#"{{"game_id":"{game}","season":"2008-09","period":{period},"clock_remaining":{clock},"kind":"{kind}"{extra}}}"#
        )
    }

    fn minimal_game(game: &str) -> Vec<String> {
        let mut lines = vec![header(game)];
        for p in 1..=4 {
            lines.push(ev(game, p, 0.0, "period_end", ""));
        }
        lines
    }

    #[test]
    fn empty_stream_is_empty() {
        let parsed = parse_event_log("".as_bytes()).unwrap();
        assert!(parsed.games.is_empty());
        assert!(parsed.rejected.is_empty());
    }

    #[test]
    fn minimal_game_has_no_substitutions() {
        let text = minimal_game("g1").join("\n");
        let parsed = parse_event_log(text.as_bytes()).unwrap();
        assert_eq!(parsed.games.len(), 1);
        let g = &parsed.games[0];
        assert_eq!(g.substitution_count(), 0);
        assert_eq!(g.periods(), 4);
        assert_eq!(g.events.len(), 4);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut lines = minimal_game("g1");
        lines.insert(2, "{not json".into());
        let err = parse_event_log(lines.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn bad_points_value_is_malformed() {
        let mut lines = minimal_game("g1");
        lines.insert(1, ev("g1", 1, 700.0, "points", r#","team":"H","value":4"#));
        let err = parse_event_log(lines.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn self_substitution_is_malformed() {
        let mut lines = minimal_game("g1");
        lines.insert(
            1,
            ev("g1", 1, 700.0, "substitution", r#","team":"H","player_in":"h1","player_out":"h1""#),
        );
        assert!(parse_event_log(lines.join("\n").as_bytes()).is_err());
    }

    #[test]
    fn backwards_clock_rejects_game_only() {
        let mut lines = minimal_game("g1");
        lines.insert(1, ev("g1", 1, 600.0, "possession_start", r#","team":"H""#));
        lines.insert(2, ev("g1", 1, 650.0, "possession_start", r#","team":"A""#));
        lines.extend(minimal_game("g2"));
        let parsed = parse_event_log(lines.join("\n").as_bytes()).unwrap();
        assert_eq!(parsed.games.len(), 1);
        assert_eq!(parsed.games[0].game_id.as_str(), "g2");
        assert_eq!(parsed.rejected.len(), 1);
        assert!(parsed.rejected[0].reason.contains("backwards"));
    }

    #[test]
    fn missing_period_end_rejects() {
        let mut lines = minimal_game("g1");
        lines.pop();
        lines.push(ev("g1", 4, 10.0, "possession_start", r#","team":"H""#));
        let parsed = parse_event_log(lines.join("\n").as_bytes()).unwrap();
        assert!(parsed.games.is_empty());
        assert_eq!(parsed.rejected.len(), 1);
    }

    #[test]
    fn event_before_header_is_malformed() {
        let text = ev("g9", 1, 0.0, "period_end", "");
        assert!(matches!(
            parse_event_log(text.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn overlapping_starters_are_malformed() {
        let bad = header("g1").replace("\"a5\"", "\"h1\"");
        assert!(parse_event_log(bad.as_bytes()).is_err());
    }

    #[test]
    fn write_then_parse_is_identity() {
        let mut lines = minimal_game("g1");
        lines.insert(1, ev("g1", 1, 720.0, "possession_start", r#","team":"H""#));
        lines.insert(2, ev("g1", 1, 719.3, "points", r#","team":"H","value":2,"player":"h3""#));
        lines.insert(
            3,
            ev("g1", 1, 431.05, "substitution", r#","team":"A","player_in":"a9","player_out":"a2""#),
        );
        let first = parse_event_log(lines.join("\n").as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_event_log(&first.games, &mut buf).unwrap();
        let second = parse_event_log(buf.as_slice()).unwrap();
        assert_eq!(first.games, second.games);
    }
}
