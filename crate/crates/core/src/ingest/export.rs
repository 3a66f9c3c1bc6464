use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::clock::Clock;
use super::intervals::{ExclusionReason, Interval};
use crate::error::{Error, Result};
use crate::ids::{GameId, PlayerId};

#[derive(Debug, Serialize, Deserialize)]
struct IntervalRecord {
    game_id: String,
    season: String,
    idx: u32,
    duration_s: f64,
    home_players: String,
    away_players: String,
    n_home_poss: u32,
    n_away_poss: u32,
    pts_home: u32,
    pts_away: u32,
    excluded: bool,
    reason: String,
}

fn join(players: &[PlayerId]) -> String {
    players.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(";")
}

fn split(s: &str) -> Vec<PlayerId> {
    if s.is_empty() {
        Vec::new()
    } else {
        s.split(';').map(PlayerId::from).collect()
    }
}

pub fn write_intervals<W: Write>(intervals: &[Interval], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for iv in intervals {
        w.serialize(IntervalRecord {
            game_id: iv.game_id.to_string(),
            season: iv.season.clone(),
            idx: iv.idx,
            duration_s: iv.duration_secs(),
            home_players: join(&iv.home_on_court),
            away_players: join(&iv.away_on_court),
            n_home_poss: iv.n_home_poss,
            n_away_poss: iv.n_away_poss,
            pts_home: iv.pts_home,
            pts_away: iv.pts_away,
            excluded: iv.excluded(),
            reason: iv.exclusion.map(|r| r.code().to_string()).unwrap_or_default(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_intervals<R: Read>(reader: R) -> Result<Vec<Interval>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let rec: IntervalRecord = rec?;
        let line = i + 2;
        let duration = Clock::from_secs(rec.duration_s).ok_or(Error::Parse {
            line,
            msg: "bad duration_s".into(),
        })?;
        let exclusion = match (rec.excluded, rec.reason.as_str()) {
            (false, _) => None,
            (true, r) => Some(r.parse::<ExclusionReason>().map_err(|msg| Error::Parse { line, msg })?),
        };
        out.push(Interval {
            game_id: GameId::new(rec.game_id),
            season: rec.season,
            idx: rec.idx,
            home_on_court: split(&rec.home_players),
            away_on_court: split(&rec.away_players),
            duration_ms: duration.millis(),
            n_home_poss: rec.n_home_poss,
            n_away_poss: rec.n_away_poss,
            pts_home: rec.pts_home,
            pts_away: rec.pts_away,
            exclusion,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_exclusions() {
        let ivs = vec![
            Interval {
                game_id: GameId::new("g1"),
                season: "2008-09".into(),
                idx: 0,
                home_on_court: ["h1", "h2", "h3", "h4", "h5"].map(PlayerId::from).to_vec(),
                away_on_court: ["a1", "a2", "a3", "a4", "a5"].map(PlayerId::from).to_vec(),
                duration_ms: 123_450,
                n_home_poss: 4,
                n_away_poss: 5,
                pts_home: 6,
                pts_away: 3,
                exclusion: None,
            },
            Interval {
                game_id: GameId::new("g1"),
                season: "2008-09".into(),
                idx: 1,
                home_on_court: vec![],
                away_on_court: vec![],
                duration_ms: 50,
                n_home_poss: 0,
                n_away_poss: 1,
                pts_home: 0,
                pts_away: 2,
                exclusion: Some(ExclusionReason::LineupUnknown),
            },
        ];
        let mut buf = Vec::new();
        write_intervals(&ivs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "game_id,season,idx,duration_s,home_players,away_players,n_home_poss,n_away_poss,pts_home,pts_away,excluded,reason"
        ));
        assert_eq!(read_intervals(buf.as_slice()).unwrap(), ivs);
    }
}
