use ndarray::{s, Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{GaussianBelief, HyperParams};
use crate::ids::PlayerId;
use crate::model::PlayerIndex;

/// Between-season shrinkage `p` and innovation scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionParams {
    pub p: f64,
    pub s_alpha: f64,
    pub s_beta: f64,
}

impl Default for TransitionParams {
    fn default() -> Self {
        TransitionParams {
            p: 0.83,
            s_alpha: 1.23,
            s_beta: 0.59,
        }
    }
}

impl TransitionParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("transition p must lie in [0, 1]"));
        }
        if !(self.s_alpha >= 0.0 && self.s_beta >= 0.0 && self.s_alpha.is_finite() && self.s_beta.is_finite()) {
            return Err(Error::invalid("transition scales must be finite and non-negative"));
        }
        Ok(())
    }

    pub(crate) fn innovation_var(&self, k: usize) -> f64 {
        if k % 2 == 0 {
            self.s_alpha * self.s_alpha
        } else {
            self.s_beta * self.s_beta
        }
    }
}

/// End-of-season to start-of-season map: every ability shrinks toward its
/// population mean by `p` and gains independent noise.
///
/// `mean' = p·m + (1 − p)·μ`, `Σ' = p²·Σ + diag(s²)`.
pub fn apply_transition(b: &GaussianBelief, tp: &TransitionParams, hyper: &HyperParams) -> Result<GaussianBelief> {
    tp.validate()?;
    let p = tp.p;
    let p2 = p * p;
    let d = b.dim();
    let mean = Array1::from_shape_fn(d, |k| {
        let mu = if k % 2 == 0 { hyper.mu_alpha } else { hyper.mu_beta };
        p * b.mean[k] + (1.0 - p) * mu
    });
    let mut cov = b.cov.mapv(|c| p2 * c);
    for k in 0..d {
        cov[[k, k]] += tp.innovation_var(k);
    }
    GaussianBelief::new(b.players.clone(), mean, cov)
}

/// Appends players with independent prior coordinates. Existing entries
/// are copied unchanged.
pub fn inject_players(b: &GaussianBelief, new: &[PlayerId], hyper: &HyperParams) -> Result<GaussianBelief> {
    hyper.validate()?;
    let mut index: PlayerIndex = b.players.clone();
    for p in new {
        index.push(p.clone())?;
    }
    let (d0, d) = (b.dim(), 2 * index.len());
    let mut mean = Array1::zeros(d);
    mean.slice_mut(s![..d0]).assign(&b.mean);
    let mut cov = Array2::zeros((d, d));
    cov.slice_mut(s![..d0, ..d0]).assign(&b.cov);
    for k in d0..d {
        let (m, v) = hyper.coord_prior(k);
        mean[k] = m;
        cov[[k, k]] = v;
    }
    GaussianBelief::new(index, mean, cov)
}

/// Integrates the listed players out, keeping the rest in index order.
pub fn marginalize(b: &GaussianBelief, drop: &[PlayerId]) -> Result<GaussianBelief> {
    for p in drop {
        b.index_of(p)?;
    }
    let keep: Vec<PlayerId> = b
        .players
        .ids()
        .iter()
        .filter(|p| !drop.contains(p))
        .cloned()
        .collect();
    if keep.is_empty() {
        return Ok(GaussianBelief::empty());
    }
    b.select(&keep)
}
