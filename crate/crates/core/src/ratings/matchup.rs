use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauss::GaussianBelief;
use crate::ids::PlayerId;

const LINEUP: usize = 5;

/// Expected home-minus-away score difference over a matched pair of
/// possession runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Matchup {
    pub mean: f64,
    /// Zero for point estimates.
    pub var: f64,
}

impl Matchup {
    pub fn se(&self) -> f64 {
        self.var.sqrt()
    }
}

fn check_lineups(home: &[PlayerId], away: &[PlayerId]) -> Result<()> {
    for (side, l) in [("home", home), ("away", away)] {
        if l.len() != LINEUP {
            return Err(Error::invalid(format!("{side} lineup has {} players, need {LINEUP}", l.len())));
        }
        let mut s = l.to_vec();
        s.sort();
        if let Some(w) = s.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePlayer(w[0].clone()));
        }
    }
    if let Some(p) = home.iter().find(|p| away.contains(p)) {
        return Err(Error::invalid(format!("player {p} is in both lineups")));
    }
    Ok(())
}

/// `Σ_K (α+β) − Σ_L (α+β) + 2γ` under a belief, with variance from the
/// joint covariance. γ is not rescaled for overtime.
pub fn lineup_matchup(belief: &GaussianBelief, home: &[PlayerId], away: &[PlayerId], gamma: f64) -> Result<Matchup> {
    check_lineups(home, away)?;
    let mut w: Vec<(usize, f64)> = Vec::with_capacity(4 * LINEUP);
    for (lineup, sign) in [(home, 1.0), (away, -1.0)] {
        for p in lineup {
            let i = belief.index_of(p)?;
            w.push((2 * i, sign));
            w.push((2 * i + 1, sign));
        }
    }
    let mean = w.iter().map(|&(k, s)| s * belief.mean[k]).sum::<f64>() + 2.0 * gamma;
    let var = w
        .iter()
        .map(|&(r, sr)| w.iter().map(|&(c, sc)| sr * sc * belief.cov[[r, c]]).sum::<f64>())
        .sum::<f64>()
        .max(0.0);
    Ok(Matchup { mean, var })
}

/// Point-estimate version over `(α, β)` per player.
pub fn lineup_matchup_points(
    abilities: &BTreeMap<PlayerId, (f64, f64)>,
    home: &[PlayerId],
    away: &[PlayerId],
    gamma: f64,
) -> Result<Matchup> {
    check_lineups(home, away)?;
    let side = |l: &[PlayerId]| -> Result<f64> {
        l.iter()
            .map(|p| {
                abilities
                    .get(p)
                    .map(|(a, b)| a + b)
                    .ok_or_else(|| Error::UnknownPlayer(p.clone()))
            })
            .sum()
    };
    Ok(Matchup {
        mean: side(home)? - side(away)? + 2.0 * gamma,
        var: 0.0,
    })
}
