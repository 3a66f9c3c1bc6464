use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::PlayerMarginal;
use crate::ids::PlayerId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RatingKind {
    Offense,
    Defense,
    Combined,
}

impl RatingKind {
    pub const ALL: [RatingKind; 3] = [RatingKind::Offense, RatingKind::Defense, RatingKind::Combined];

    fn mean_se(self, m: &PlayerMarginal) -> (f64, f64) {
        match self {
            RatingKind::Offense => (m.alpha_mean, m.alpha_se()),
            RatingKind::Defense => (m.beta_mean, m.beta_se()),
            RatingKind::Combined => (m.combined_mean(), m.combined_se()),
        }
    }
}

/// Which model produced a set of ratings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    /// Chain over every season.
    #[default]
    Multi,
    /// Final season alone from the population prior.
    Single,
    /// Final season with each focal player's prior reset.
    Isolated,
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelTag::Multi => "multi",
            ModelTag::Single => "single",
            ModelTag::Isolated => "isolated",
        })
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multi" => Ok(ModelTag::Multi),
            "single" => Ok(ModelTag::Single),
            "isolated" => Ok(ModelTag::Isolated),
            _ => Err(Error::invalid(format!("unknown model {s:?}; expected multi, single or isolated"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingEntry {
    pub player: PlayerId,
    /// Centred mean.
    pub mean: f64,
    pub se: f64,
    /// 1 is best. Ties go to the smaller id.
    pub rank: usize,
}

/// One centred column, entries in input order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingsColumn {
    pub kind: RatingKind,
    /// Unweighted mean subtracted from every estimate.
    pub centre: f64,
    pub entries: Vec<RatingEntry>,
}

/// Centres one kind of estimate by its unweighted mean across `marginals`
/// and ranks it, highest first.
pub fn centred_ratings(marginals: &[PlayerMarginal], kind: RatingKind) -> Result<RatingsColumn> {
    if marginals.is_empty() {
        return Err(Error::EmptyPlayers);
    }
    let raw: Vec<(f64, f64)> = marginals.iter().map(|m| kind.mean_se(m)).collect();
    let centre = raw.iter().map(|r| r.0).sum::<f64>() / raw.len() as f64;
    let mut order: Vec<usize> = (0..raw.len()).collect();
    // Ranking on raw means keeps ranks independent of the centring rounding.
    order.sort_by(|&a, &b| {
        raw[b].0
            .total_cmp(&raw[a].0)
            .then_with(|| marginals[a].player.cmp(&marginals[b].player))
    });
    let mut rank = vec![0; raw.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    let entries = marginals
        .iter()
        .zip(&raw)
        .zip(rank)
        .map(|((m, &(mean, se)), rank)| RatingEntry {
            player: m.player.clone(),
            mean: mean - centre,
            se,
            rank,
        })
        .collect();
    Ok(RatingsColumn { kind, centre, entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRow {
    pub player: PlayerId,
    pub off_mean: f64,
    pub off_se: f64,
    pub off_rank: usize,
    pub def_mean: f64,
    pub def_se: f64,
    pub def_rank: usize,
    pub comb_mean: f64,
    pub comb_se: f64,
    pub comb_rank: usize,
}

/// Offensive, defensive and combined centred ratings for one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingsTable {
    pub model: ModelTag,
    /// Rows in the order of the input marginals.
    pub rows: Vec<RatingRow>,
    /// Centring constants for offense, defense and combined.
    pub centres: [f64; 3],
}

impl RatingsTable {
    pub fn from_marginals(marginals: &[PlayerMarginal], model: ModelTag) -> Result<Self> {
        let [o, d, c] = RatingKind::ALL.map(|k| centred_ratings(marginals, k));
        let (o, d, c) = (o?, d?, c?);
        let rows = (0..marginals.len())
            .map(|i| RatingRow {
                player: marginals[i].player.clone(),
                off_mean: o.entries[i].mean,
                off_se: o.entries[i].se,
                off_rank: o.entries[i].rank,
                def_mean: d.entries[i].mean,
                def_se: d.entries[i].se,
                def_rank: d.entries[i].rank,
                comb_mean: c.entries[i].mean,
                comb_se: c.entries[i].se,
                comb_rank: c.entries[i].rank,
            })
            .collect();
        Ok(RatingsTable {
            model,
            rows,
            centres: [o.centre, d.centre, c.centre],
        })
    }

    pub fn get(&self, p: &PlayerId) -> Option<&RatingRow> {
        self.rows.iter().find(|r| &r.player == p)
    }

    /// Rows ordered by rank in `kind`.
    pub fn ranked(&self, kind: RatingKind) -> Vec<&RatingRow> {
        let mut rows: Vec<&RatingRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| match kind {
            RatingKind::Offense => r.off_rank,
            RatingKind::Defense => r.def_rank,
            RatingKind::Combined => r.comb_rank,
        });
        rows
    }

    /// Writes the ratings CSV. Players missing from `names` are named by id.
    pub fn write_csv<W: Write>(&self, writer: W, names: &BTreeMap<PlayerId, String>) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "player_id", "name", "off_mean", "off_se", "off_rank", "def_mean", "def_se", "def_rank", "comb_mean",
            "comb_se", "comb_rank", "model_tag",
        ])?;
        let tag = self.model.to_string();
        for r in &self.rows {
            let name = names.get(&r.player).map(String::as_str).unwrap_or(r.player.as_str());
            w.write_record([
                r.player.as_str(),
                name,
                &r.off_mean.to_string(),
                &r.off_se.to_string(),
                &r.off_rank.to_string(),
                &r.def_mean.to_string(),
                &r.def_se.to_string(),
                &r.def_rank.to_string(),
                &r.comb_mean.to_string(),
                &r.comb_se.to_string(),
                &r.comb_rank.to_string(),
                &tag,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fixed-width table of the top `n` players by `kind`, as
    /// `mean (se) rank` cells.
    pub fn report(&self, kind: RatingKind, n: usize) -> String {
        let mut out = format!("{:<16} {:>18} {:>18} {:>18}\n", "player", "offense", "defense", "combined");
        for r in self.ranked(kind).into_iter().take(n) {
            let cell = |m: f64, s: f64, k: usize| format!("{m:.2} ({s:.2}) {k}");
            out.push_str(&format!(
                "{:<16} {:>18} {:>18} {:>18}\n",
                r.player.as_str(),
                cell(r.off_mean, r.off_se, r.off_rank),
                cell(r.def_mean, r.def_se, r.def_rank),
                cell(r.comb_mean, r.comb_se, r.comb_rank)
            ));
        }
        out
    }
}

/// Reads a ratings CSV written by [`RatingsTable::write_csv`]. The name
/// column is ignored. Every row must carry the same model tag.
pub fn read_ratings_csv<R: Read>(reader: R) -> Result<(ModelTag, Vec<RatingRow>)> {
    #[derive(Deserialize)]
    struct Record {
        player_id: PlayerId,
        off_mean: f64,
        off_se: f64,
        off_rank: usize,
        def_mean: f64,
        def_se: f64,
        def_rank: usize,
        comb_mean: f64,
        comb_se: f64,
        comb_rank: usize,
        model_tag: String,
    }
    let mut model = None;
    let mut rows = Vec::new();
    for (i, rec) in csv::Reader::from_reader(reader).deserialize().enumerate() {
        let line = i + 2;
        let r: Record = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let tag: ModelTag = r.model_tag.parse()?;
        if model.is_some_and(|m| m != tag) {
            return Err(Error::Parse {
                line,
                msg: format!("model tag {tag} differs from earlier rows"),
            });
        }
        model = Some(tag);
        rows.push(RatingRow {
            player: r.player_id,
            off_mean: r.off_mean,
            off_se: r.off_se,
            off_rank: r.off_rank,
            def_mean: r.def_mean,
            def_se: r.def_se,
            def_rank: r.def_rank,
            comb_mean: r.comb_mean,
            comb_se: r.comb_se,
            comb_rank: r.comb_rank,
        });
    }
    Ok((model.ok_or(Error::EmptyPlayers)?, rows))
}
