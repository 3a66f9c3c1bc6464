use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::wls::{backward_select, standardise_fit, RegressionFit, StandardiseMode, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::ids::PlayerId;

/// Covariate names in column order.
pub const COVARIATES: [&str; 10] = [
    "FG%", "FT%", "3P%", "TO/40", "TRB/40", "AST/40", "PTS/40", "STL/40", "BLK/40", "PF/40",
];

/// Saturated offensive model.
pub const OFFENSIVE_CANDIDATES: [&str; 10] = COVARIATES;

/// Saturated defensive model: points scored are not a defensive quantity.
pub const DEFENSIVE_CANDIDATES: [&str; 9] =
    ["FG%", "FT%", "3P%", "TO/40", "TRB/40", "AST/40", "STL/40", "BLK/40", "PF/40"];

/// Minimum players in a position subset fit.
const MIN_SUBSET: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Guard,
    Forward,
    Center,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Guard => "guard",
            Position::Forward => "forward",
            Position::Center => "center",
        })
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "guard" => Ok(Position::Guard),
            "forward" => Ok(Position::Forward),
            "center" => Ok(Position::Center),
            _ => Err(Error::invalid(format!("unknown position {s:?}"))),
        }
    }
}

/// Season box-score summary for one player. Percentages are in `[0, 100]`;
/// the other fields are per 40 minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerGameStats {
    pub player_id: PlayerId,
    pub position: Position,
    pub fg_pct: f64,
    pub ft_pct: f64,
    pub three_pct: f64,
    pub to_40: f64,
    pub trb_40: f64,
    pub ast_40: f64,
    pub pts_40: f64,
    pub stl_40: f64,
    pub blk_40: f64,
    pub pf_40: f64,
}

impl PlayerGameStats {
    pub fn values(&self) -> [f64; 10] {
        [
            self.fg_pct,
            self.ft_pct,
            self.three_pct,
            self.to_40,
            self.trb_40,
            self.ast_40,
            self.pts_40,
            self.stl_40,
            self.blk_40,
            self.pf_40,
        ]
    }

    pub fn get(&self, covariate: &str) -> Option<f64> {
        COVARIATES.iter().position(|c| *c == covariate).map(|j| self.values()[j])
    }

    /// Covariate values keyed by name, for [`super::predict_ability`].
    pub fn covariates(&self) -> BTreeMap<String, f64> {
        COVARIATES.iter().map(|c| c.to_string()).zip(self.values()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.values();
        for (j, (name, x)) in COVARIATES.iter().zip(v).enumerate() {
            let ok = if j < 3 { (0.0..=100.0).contains(&x) } else { x >= 0.0 && x.is_finite() };
            if !ok {
                return Err(Error::invalid(format!("player {}: {name} = {x} out of range", self.player_id)));
            }
        }
        Ok(())
    }
}

pub fn read_stats_csv<R: Read>(reader: R) -> Result<Vec<PlayerGameStats>> {
    let mut out = Vec::new();
    for (i, rec) in csv::Reader::from_reader(reader).deserialize().enumerate() {
        let s: PlayerGameStats = rec.map_err(|e| Error::Parse {
            line: i + 2,
            msg: e.to_string(),
        })?;
        s.validate().map_err(|e| Error::Parse {
            line: i + 2,
            msg: e.to_string(),
        })?;
        out.push(s);
    }
    Ok(out)
}

pub fn write_stats_csv<W: Write>(writer: W, stats: &[PlayerGameStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in stats {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// A rating and its standard error, the regression outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbilityEstimate {
    pub player: PlayerId,
    pub mean: f64,
    pub se: f64,
}

/// Settings of the stats regression pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsModel {
    pub candidates: Vec<String>,
    pub alpha: f64,
    pub standardise: StandardiseMode,
}

impl StatsModel {
    pub fn offensive() -> Self {
        StatsModel {
            candidates: OFFENSIVE_CANDIDATES.iter().map(|s| s.to_string()).collect(),
            alpha: DEFAULT_ALPHA,
            standardise: StandardiseMode::default(),
        }
    }

    pub fn defensive() -> Self {
        StatsModel {
            candidates: DEFENSIVE_CANDIDATES.iter().map(|s| s.to_string()).collect(),
            ..Self::offensive()
        }
    }
}

/// Joins stats to estimates by player, runs backward selection and adds
/// standardised coefficients. Rows are ordered by player id; players
/// missing from either input are skipped.
pub fn regress_abilities(
    stats: &[PlayerGameStats],
    abilities: &[AbilityEstimate],
    model: &StatsModel,
) -> Result<RegressionFit> {
    let cols = model
        .candidates
        .iter()
        .map(|c| {
            COVARIATES
                .iter()
                .position(|k| k == c)
                .ok_or_else(|| Error::MissingCovariate(c.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let by_id: BTreeMap<&PlayerId, &AbilityEstimate> = abilities.iter().map(|a| (&a.player, a)).collect();
    let mut rows: Vec<(&PlayerGameStats, &AbilityEstimate)> = stats
        .iter()
        .filter_map(|s| by_id.get(&s.player_id).map(|a| (s, *a)))
        .collect();
    rows.sort_by(|a, b| a.0.player_id.cmp(&b.0.player_id));
    if rows.is_empty() {
        return Err(Error::NoObservations);
    }
    let x = Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| rows[i].0.values()[cols[j]]);
    let y: Vec<f64> = rows.iter().map(|r| r.1.mean).collect();
    let se: Vec<f64> = rows.iter().map(|r| r.1.se).collect();
    let mut fit = backward_select(x.view(), &y, &se, &model.candidates, model.alpha)?;
    let keep: Vec<usize> = fit
        .coefficients
        .iter()
        .map(|c| model.candidates.iter().position(|k| *k == c.name).expect("selected from candidates"))
        .collect();
    standardise_fit(&mut fit, x.select(Axis(1), &keep).view(), &se, model.standardise)?;
    fit.players = rows.iter().map(|r| r.0.player_id.clone()).collect();
    Ok(fit)
}

/// [`regress_abilities`] restricted to one position.
pub fn position_subset_fit(
    stats: &[PlayerGameStats],
    abilities: &[AbilityEstimate],
    position: Position,
    model: &StatsModel,
) -> Result<RegressionFit> {
    let ids: std::collections::BTreeSet<&PlayerId> = abilities.iter().map(|a| &a.player).collect();
    let subset: Vec<PlayerGameStats> = stats
        .iter()
        .filter(|s| s.position == position && ids.contains(&s.player_id))
        .cloned()
        .collect();
    if subset.len() < MIN_SUBSET {
        return Err(Error::SubsetTooSmall {
            position: position.to_string(),
            n: subset.len(),
            min: MIN_SUBSET,
        });
    }
    regress_abilities(&subset, abilities, model)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use super::*;

    /// Guards whose rating depends on FG% only; other positions are noise.
    fn league(seed: u64, n: usize) -> (Vec<PlayerGameStats>, Vec<AbilityEstimate>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut stats = Vec::new();
        let mut ab = Vec::new();
        for i in 0..n {
            let pos = [Position::Guard, Position::Forward, Position::Center][i % 3];
            let s = PlayerGameStats {
                player_id: PlayerId::new(format!("p{i:03}")),
                position: pos,
                fg_pct: rng.random_range(35.0..55.0),
                ft_pct: rng.random_range(60.0..90.0),
                three_pct: rng.random_range(20.0..45.0),
                to_40: rng.random_range(1.0..5.0),
                trb_40: rng.random_range(3.0..15.0),
                ast_40: rng.random_range(1.0..10.0),
                pts_40: rng.random_range(10.0..30.0),
                stl_40: rng.random_range(0.5..3.0),
                blk_40: rng.random_range(0.0..3.0),
                pf_40: rng.random_range(2.0..6.0),
            };
            let se = rng.random_range(0.5..1.5);
            let mean = match pos {
                Position::Guard => 0.5 * (s.fg_pct - 45.0),
                _ => 0.0,
            } + se * noise.sample(&mut rng);
            ab.push(AbilityEstimate {
                player: s.player_id.clone(),
                mean,
                se,
            });
            stats.push(s);
        }
        (stats, ab)
    }

    #[test]
    fn guard_fg_survives_and_rebounds_drop() {
        let (stats, ab) = league(1, 300);
        let fit = position_subset_fit(&stats, &ab, Position::Guard, &StatsModel::offensive()).unwrap();
        assert!(fit.selected().contains(&"FG%"));
        assert!(!fit.selected().contains(&"TRB/40"));
        assert_eq!(fit.standardised.len(), fit.coefficients.len());
        assert_eq!(fit.players.len(), 100);
    }

    #[test]
    fn subset_too_small() {
        let (stats, ab) = league(2, 20);
        assert!(matches!(
            position_subset_fit(&stats, &ab, Position::Center, &StatsModel::defensive()),
            Err(Error::SubsetTooSmall { n: 6, .. })
        ));
    }

    #[test]
    fn full_subset_equals_unrestricted() {
        let (mut stats, ab) = league(3, 60);
        stats.iter_mut().for_each(|s| s.position = Position::Forward);
        let m = StatsModel::offensive();
        assert_eq!(
            position_subset_fit(&stats, &ab, Position::Forward, &m).unwrap(),
            regress_abilities(&stats, &ab, &m).unwrap()
        );
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let (stats, _) = league(4, 5);
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &stats).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("player_id,position,fg_pct,ft_pct,three_pct,to_40,"));
        assert_eq!(read_stats_csv(&buf[..]).unwrap(), stats);
        let mut bad_stats = stats.clone();
        bad_stats[0].fg_pct = 120.0;
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &bad_stats).unwrap();
        assert!(matches!(read_stats_csv(&buf[..]), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn unknown_candidate() {
        let (stats, ab) = league(5, 30);
        let m = StatsModel {
            candidates: vec!["dunks".into()],
            ..StatsModel::offensive()
        };
        assert!(matches!(regress_abilities(&stats, &ab, &m), Err(Error::MissingCovariate(_))));
    }
}
