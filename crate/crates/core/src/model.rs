//! Regression rows built from constant-lineup intervals.
//!
//! Each interval yields up to two rows, one per team that had the ball:
//!
//! ```text
//! 100·y / n  =  Σ α(attackers) − Σ β(defenders) ± γ  +  noise,   noise ~ N(0, σ² / n)
//! ```
//!
//! where `y` is the points the attacking team scored on its `n` possessions
//! and `+γ` applies when the home side attacks. Rows carry `n` as weight.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ids::PlayerId;
use crate::ingest::Interval;

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRow {
    /// Points per 100 possessions.
    pub response: f64,
    /// Possession count.
    pub weight: f64,
    /// Indices into the set's player index. Full games have five per side;
    /// smaller lineups of equal size are accepted for toy models.
    pub attackers: Vec<u32>,
    pub defenders: Vec<u32>,
    pub home_attacking: bool,
    pub season: Arc<str>,
}

impl ObservationRow {
    /// `+1` when the home side attacks, `-1` otherwise.
    pub fn lineup_size(&self) -> usize {
        self.attackers.len()
    }

    pub fn home_sign(&self) -> f64 {
        if self.home_attacking {
            1.0
        } else {
            -1.0
        }
    }
}

/// Bijection between player ids and dense indices. A player with index `i`
/// owns the offensive coordinate `2i` and the defensive coordinate `2i + 1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlayerIndex {
    ids: Vec<PlayerId>,
    lookup: HashMap<PlayerId, usize>,
}

impl PlayerIndex {
    pub fn new(ids: Vec<PlayerId>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(ids.len());
        for (i, p) in ids.iter().enumerate() {
            if lookup.insert(p.clone(), i).is_some() {
                return Err(Error::DuplicatePlayer(p.clone()));
            }
        }
        Ok(PlayerIndex { ids, lookup })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, p: &PlayerId) -> Option<usize> {
        self.lookup.get(p).copied()
    }

    pub fn id(&self, i: usize) -> &PlayerId {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[PlayerId] {
        &self.ids
    }

    pub fn alpha_coord(i: usize) -> usize {
        2 * i
    }

    pub fn beta_coord(i: usize) -> usize {
        2 * i + 1
    }

    pub(crate) fn push(&mut self, p: PlayerId) -> Result<usize> {
        if self.lookup.contains_key(&p) {
            return Err(Error::DuplicatePlayer(p));
        }
        let i = self.ids.len();
        self.lookup.insert(p.clone(), i);
        self.ids.push(p);
        Ok(i)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservationSet {
    /// Season label (or labels joined by `+`).
    pub label: String,
    pub players: PlayerIndex,
    pub rows: Vec<ObservationRow>,
}

impl ObservationSet {
    /// Checks that every row refers to indexed players.
    pub fn new(label: impl Into<String>, players: PlayerIndex, rows: Vec<ObservationRow>) -> Result<Self> {
        let n = players.len() as u32;
        for r in &rows {
            if r.attackers.is_empty() || r.attackers.len() != r.defenders.len() {
                return Err(Error::invalid(format!(
                    "row in season {} has unequal or empty lineups",
                    r.season
                )));
            }
            if r.attackers.iter().chain(&r.defenders).any(|&i| i >= n) {
                return Err(Error::invalid(format!(
                    "row in season {} refers to an unindexed player",
                    r.season
                )));
            }
            if !(r.weight >= 1.0) || !r.response.is_finite() || r.response < 0.0 {
                return Err(Error::invalid(format!(
                    "row in season {} needs weight >= 1 and a finite non-negative response",
                    r.season
                )));
            }
        }
        Ok(ObservationSet {
            label: label.into(),
            players,
            rows,
        })
    }

    pub fn empty(label: impl Into<String>) -> Self {
        ObservationSet {
            label: label.into(),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Players who appear in at least one row.
    pub fn active_players(&self) -> Vec<PlayerId> {
        let mut seen = vec![false; self.players.len()];
        for r in &self.rows {
            for &i in r.attackers.iter().chain(&r.defenders) {
                seen[i as usize] = true;
            }
        }
        let mut out: Vec<_> = seen
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| self.players.id(i).clone())
            .collect();
        out.sort();
        out
    }

    /// Total weight of rows where the home side attacks.
    pub fn home_possessions(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.home_attacking)
            .map(|r| r.weight)
            .sum()
    }

    /// Weighted mean response, i.e. 100 × league points per possession.
    pub fn mean_response(&self) -> f64 {
        let (num, den) = self
            .rows
            .iter()
            .fold((0.0, 0.0), |(n, d), r| (n + r.weight * r.response, d + r.weight));
        num / den
    }

    /// Union of several sets under a merged player index.
    pub fn concat(label: impl Into<String>, sets: &[&ObservationSet]) -> Result<Self> {
        let mut ids: BTreeSet<PlayerId> = BTreeSet::new();
        for s in sets {
            ids.extend(s.players.ids().iter().cloned());
        }
        let players = PlayerIndex::new(ids.into_iter().collect())?;
        let mut rows = Vec::new();
        for s in sets {
            let remap: Vec<u32> = s
                .players
                .ids()
                .iter()
                .map(|p| players.get(p).expect("merged index") as u32)
                .collect();
            rows.extend(s.rows.iter().map(|r| ObservationRow {
                attackers: r.attackers.iter().map(|&i| remap[i as usize]).collect(),
                defenders: r.defenders.iter().map(|&i| remap[i as usize]).collect(),
                ..r.clone()
            }));
        }
        ObservationSet::new(label, players, rows)
    }

    /// One row per observation: response, weight, five attacker and five
    /// defender ids (blank when the lineup is smaller), home flag, season.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["response".to_string(), "weight".to_string()];
        header.extend((1..=5).map(|i| format!("att{i}")));
        header.extend((1..=5).map(|i| format!("def{i}")));
        header.extend(["home_attacking".to_string(), "season".to_string()]);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.response.to_string(), r.weight.to_string()];
            for side in [&r.attackers, &r.defenders] {
                for k in 0..5 {
                    rec.push(
                        side.get(k)
                            .map(|&i| self.players.id(i as usize).to_string())
                            .unwrap_or_default(),
                    );
                }
            }
            rec.push(r.home_attacking.to_string());
            rec.push(r.season.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds regression rows from the included intervals of the requested
/// seasons (all seasons when `seasons` is `None`).
///
/// Each side with at least one possession yields one row; excluded intervals
/// are skipped. The player index is sorted by id.
pub fn build_observations(intervals: &[Interval], seasons: Option<&[String]>) -> Result<ObservationSet> {
    let keep = |iv: &&Interval| {
        !iv.excluded() && seasons.is_none_or(|s| s.iter().any(|x| *x == iv.season))
    };
    let mut ids = BTreeSet::new();
    let mut labels = BTreeSet::new();
    for iv in intervals.iter().filter(keep) {
        if iv.home_on_court.len() != 5 || iv.away_on_court.len() != 5 {
            return Err(Error::invalid(format!(
                "game {} interval {} does not have five players per side",
                iv.game_id, iv.idx
            )));
        }
        let home: BTreeSet<_> = iv.home_on_court.iter().collect();
        if home.len() != 5 || iv.away_on_court.iter().any(|p| home.contains(p)) {
            return Err(Error::invalid(format!(
                "game {} interval {} has overlapping or repeated players",
                iv.game_id, iv.idx
            )));
        }
        ids.extend(iv.home_on_court.iter().chain(&iv.away_on_court).cloned());
        labels.insert(iv.season.clone());
    }
    let players = PlayerIndex::new(ids.into_iter().collect())?;
    let label = match seasons {
        Some(s) => s.join("+"),
        None => labels.iter().cloned().collect::<Vec<_>>().join("+"),
    };

    let mut season_labels: HashMap<String, Arc<str>> = HashMap::new();
    let mut rows = Vec::new();
    let lineup = |ps: &[PlayerId]| -> Vec<u32> {
        ps.iter()
            .map(|p| players.get(p).expect("indexed above") as u32)
            .collect()
    };
    for iv in intervals.iter().filter(keep) {
        let season = season_labels
            .entry(iv.season.clone())
            .or_insert_with(|| Arc::from(iv.season.as_str()))
            .clone();
        let home = lineup(&iv.home_on_court);
        let away = lineup(&iv.away_on_court);
        for (home_attacking, n, pts) in [
            (true, iv.n_home_poss, iv.pts_home),
            (false, iv.n_away_poss, iv.pts_away),
        ] {
            if n == 0 {
                continue;
            }
            let (attackers, defenders) = if home_attacking {
                (home.clone(), away.clone())
            } else {
                (away.clone(), home.clone())
            };
            rows.push(ObservationRow {
                response: 100.0 * f64::from(pts) / f64::from(n),
                weight: f64::from(n),
                attackers,
                defenders,
                home_attacking,
                season: season.clone(),
            });
        }
    }
    ObservationSet::new(label, players, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::GameId;

    fn iv(season: &str, nh: u32, na: u32, ph: u32, pa: u32) -> Interval {
        Interval {
            game_id: GameId::new("g"),
            season: season.into(),
            idx: 0,
            home_on_court: ["h1", "h2", "h3", "h4", "h5"].map(PlayerId::from).to_vec(),
            away_on_court: ["a1", "a2", "a3", "a4", "a5"].map(PlayerId::from).to_vec(),
            duration_ms: 60_000,
            n_home_poss: nh,
            n_away_poss: na,
            pts_home: ph,
            pts_away: pa,
            exclusion: None,
        }
    }

    #[test]
    fn zero_possession_side_emits_nothing() {
        let set = build_observations(&[iv("s", 0, 3, 0, 4)], None).unwrap();
        assert_eq!(set.len(), 1);
        assert!(!set.rows[0].home_attacking);
    }

    #[test]
    fn response_is_points_per_hundred_possessions() {
        let set = build_observations(&[iv("s", 5, 4, 6, 0)], None).unwrap();
        let home = set.rows.iter().find(|r| r.home_attacking).unwrap();
        assert_eq!(home.response, 120.0);
        assert_eq!(home.weight, 5.0);
        let h1 = set.players.get(&"h1".into()).unwrap() as u32;
        assert!(home.attackers.contains(&h1));
        let away = set.rows.iter().find(|r| !r.home_attacking).unwrap();
        assert!(away.defenders.contains(&h1));
    }

    #[test]
    fn overlapping_lineups_are_rejected() {
        let mut bad = iv("s", 1, 1, 0, 0);
        bad.away_on_court[0] = "h1".into();
        assert!(build_observations(&[bad], None).is_err());
    }

    #[test]
    fn season_filter_and_exclusions() {
        let mut ex = iv("s1", 2, 2, 2, 2);
        ex.exclusion = Some(crate::ingest::ExclusionReason::LineupUnknown);
        let ivs = [iv("s1", 2, 2, 1, 1), iv("s2", 3, 3, 1, 1), ex];
        let set = build_observations(&ivs, Some(&["s2".to_string()])).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.label, "s2");
        assert_eq!(set.home_possessions(), 3.0);
    }

    #[test]
    fn concat_remaps_players() {
        let a = build_observations(&[iv("s1", 2, 2, 1, 1)], None).unwrap();
        let mut other = iv("s2", 1, 0, 3, 0);
        other.home_on_court[0] = "z9".into();
        let b = build_observations(&[other], None).unwrap();
        let both = ObservationSet::concat("all", &[&a, &b]).unwrap();
        assert_eq!(both.players.len(), 11);
        assert_eq!(both.len(), 3);
        let last = both.rows.last().unwrap();
        let names: Vec<_> = last.attackers.iter().map(|&i| both.players.id(i as usize).as_str()).collect();
        assert!(names.contains(&"z9"));
    }
}
