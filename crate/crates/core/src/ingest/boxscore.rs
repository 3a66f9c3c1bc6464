use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::intervals::Interval;
use crate::error::Result;
use crate::ids::{GameId, PlayerId};

pub const DEFAULT_TOLERANCE_SECS: f64 = 30.0;

/// Seconds on court per player for one game.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoxScore {
    pub game_id: GameId,
    pub seconds: BTreeMap<PlayerId, f64>,
}

impl BoxScore {
    /// Ten players are on court at all times.
    pub fn total_game_seconds(&self) -> f64 {
        self.seconds.values().sum::<f64>() / 10.0
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BoxScoreRecord {
    game_id: String,
    player_id: String,
    seconds_on_court: f64,
}

pub fn read_boxscores<R: Read>(reader: R) -> Result<BTreeMap<GameId, BoxScore>> {
    let mut out: BTreeMap<GameId, BoxScore> = BTreeMap::new();
    let mut rdr = csv::Reader::from_reader(reader);
    for rec in rdr.deserialize() {
        let rec: BoxScoreRecord = rec?;
        let game = GameId::new(rec.game_id);
        let entry = out.entry(game.clone()).or_insert_with(|| BoxScore {
            game_id: game,
            seconds: BTreeMap::new(),
        });
        *entry.seconds.entry(PlayerId::new(rec.player_id)).or_insert(0.0) += rec.seconds_on_court;
    }
    Ok(out)
}

pub fn write_boxscores<'a, W: Write>(boxes: impl IntoIterator<Item = &'a BoxScore>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for b in boxes {
        for (p, s) in &b.seconds {
            w.serialize(BoxScoreRecord {
                game_id: b.game_id.to_string(),
                player_id: p.to_string(),
                seconds_on_court: *s,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub player: PlayerId,
    /// `None` when the player never appears in an included interval.
    pub inferred_secs: Option<f64>,
    /// `None` when the player is missing from the box score.
    pub boxscore_secs: Option<f64>,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub game_id: GameId,
    /// Seconds on court per player, from included intervals only.
    pub inferred_secs: BTreeMap<PlayerId, f64>,
    /// Included plus excluded interval durations.
    pub inferred_total_secs: f64,
    pub excluded_secs: f64,
    pub boxscore_total_secs: f64,
    pub excluded_fraction: f64,
    /// Players whose discrepancy exceeds the tolerance, or who appear on only
    /// one side of the comparison.
    pub mismatches: Vec<Mismatch>,
    /// True when no interval of the game was excluded.
    pub complete: bool,
    /// Set for complete games with at least one mismatch.
    pub flagged: bool,
}

/// Compares per-player time inferred from the intervals with a box score.
///
/// Games with excluded time cannot be fully reconstructed, so they are never
/// flagged; their mismatches are still listed.
pub fn crosscheck_boxscore(intervals: &[Interval], boxscore: &BoxScore, tolerance_secs: f64) -> ValidationReport {
    let mut inferred: BTreeMap<PlayerId, u64> = BTreeMap::new();
    let mut included_ms = 0u64;
    let mut excluded_ms = 0u64;
    for iv in intervals.iter().filter(|i| i.game_id == boxscore.game_id) {
        if iv.excluded() {
            excluded_ms += u64::from(iv.duration_ms);
            continue;
        }
        included_ms += u64::from(iv.duration_ms);
        for p in iv.home_on_court.iter().chain(&iv.away_on_court) {
            *inferred.entry(p.clone()).or_default() += u64::from(iv.duration_ms);
        }
    }
    let inferred_secs: BTreeMap<PlayerId, f64> = inferred
        .into_iter()
        .map(|(p, ms)| (p, ms as f64 / 1000.0))
        .collect();

    let mut mismatches = Vec::new();
    for (p, &b) in &boxscore.seconds {
        match inferred_secs.get(p) {
            Some(&i) => {
                let d = (i - b).abs();
                if d > tolerance_secs {
                    mismatches.push(Mismatch {
                        player: p.clone(),
                        inferred_secs: Some(i),
                        boxscore_secs: Some(b),
                        abs_diff: d,
                    });
                }
            }
            None if b > tolerance_secs => mismatches.push(Mismatch {
                player: p.clone(),
                inferred_secs: None,
                boxscore_secs: Some(b),
                abs_diff: b,
            }),
            None => {}
        }
    }
    for (p, &i) in &inferred_secs {
        if !boxscore.seconds.contains_key(p) {
            mismatches.push(Mismatch {
                player: p.clone(),
                inferred_secs: Some(i),
                boxscore_secs: None,
                abs_diff: i,
            });
        }
    }

    let total_ms = included_ms + excluded_ms;
    let complete = excluded_ms == 0;
    ValidationReport {
        game_id: boxscore.game_id.clone(),
        inferred_secs,
        inferred_total_secs: total_ms as f64 / 1000.0,
        excluded_secs: excluded_ms as f64 / 1000.0,
        boxscore_total_secs: boxscore.total_game_seconds(),
        excluded_fraction: if total_ms > 0 {
            excluded_ms as f64 / total_ms as f64
        } else {
            0.0
        },
        flagged: complete && !mismatches.is_empty(),
        mismatches,
        complete,
    }
}
