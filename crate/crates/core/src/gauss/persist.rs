//! Versioned CSV dump of a full belief.
//!
//! ```text
//! format,hooprate-belief,1
//! player,<id>            one record per player, index order
//! mean,<v0>,<v1>,...
//! cov,<row 0>            one record per covariance row
//! ```
//!
//! Values use the shortest representation that round-trips exactly.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};

use super::GaussianBelief;
use crate::error::{Error, Result};
use crate::ids::PlayerId;
use crate::model::PlayerIndex;

pub const BELIEF_FORMAT: &str = "hooprate-belief";
pub const BELIEF_VERSION: u32 = 1;

pub fn write_belief<W: Write>(b: &GaussianBelief, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    w.write_record(["format", BELIEF_FORMAT, &BELIEF_VERSION.to_string()])?;
    for p in b.players.ids() {
        w.write_record(["player", p.as_str()])?;
    }
    let row = |tag: &str, vals: &mut dyn Iterator<Item = &f64>| -> Vec<String> {
        std::iter::once(tag.to_string()).chain(vals.map(|v| v.to_string())).collect()
    };
    w.write_record(row("mean", &mut b.mean.iter()))?;
    for r in b.cov.rows() {
        w.write_record(row("cov", &mut r.iter()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_belief<R: Read>(reader: R) -> Result<GaussianBelief> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut players = Vec::new();
    let mut mean = None;
    let mut cov: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 1;
        let bad = |msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let nums = |rec: &csv::StringRecord| -> Result<Vec<f64>> {
            rec.iter()
                .skip(1)
                .map(|s| s.parse::<f64>().map_err(|_| bad("not a number")))
                .collect()
        };
        match rec.get(0) {
            Some("format") if i == 0 => {
                if rec.get(1) != Some(BELIEF_FORMAT) {
                    return Err(bad("not a belief dump"));
                }
                if rec.get(2) != Some(&BELIEF_VERSION.to_string()) {
                    return Err(bad("unsupported belief format version"));
                }
            }
            _ if i == 0 => return Err(bad("missing format record")),
            Some("player") => players.push(PlayerId::from(rec.get(1).ok_or_else(|| bad("missing id"))?)),
            Some("mean") => mean = Some(nums(&rec)?),
            Some("cov") => {
                cov.extend(nums(&rec)?);
                rows += 1;
            }
            _ => return Err(bad("unknown record")),
        }
    }
    let d = 2 * players.len();
    let mean = mean.ok_or_else(|| Error::invalid("belief dump has no mean record"))?;
    if mean.len() != d || rows != d || cov.len() != d * d {
        return Err(Error::invalid("belief dump dimensions disagree with the player list"));
    }
    let cov = Array2::from_shape_vec((d, d), cov).map_err(|e| Error::invalid(e.to_string()))?;
    GaussianBelief::new(PlayerIndex::new(players)?, Array1::from(mean), cov)
}
