//! Sparse design over the coordinates an observation set touches.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};

use crate::error::Result;
use crate::gauss::GaussianBelief;
use crate::model::ObservationSet;

/// Row `i` has `+1` on the offense coordinates of its attackers and `-1` on
/// the defense coordinates of its defenders. Coordinates are stored as
/// positions in `active`.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    /// Global belief coordinates touched by at least one row, ascending.
    pub active: Vec<usize>,
    offsets: Vec<usize>,
    plus: Vec<u32>,
    minus: Vec<u32>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    /// `+1` home attacking, `-1` away attacking.
    pub h: Vec<f64>,
    /// Lineup size per row.
    pub s: Vec<f64>,
}

impl Design {
    /// Design against a belief's coordinate layout.
    pub fn for_belief(obs: &ObservationSet, belief: &GaussianBelief) -> Result<Design> {
        let map = obs
            .players
            .ids()
            .iter()
            .map(|p| belief.index_of(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Design::with_map(obs, &map))
    }

    /// Design over the set's own player index.
    pub fn own(obs: &ObservationSet) -> Design {
        let map: Vec<usize> = (0..obs.players.len()).collect();
        Design::with_map(obs, &map)
    }

    fn with_map(obs: &ObservationSet, map: &[usize]) -> Design {
        let mut coords = BTreeSet::new();
        for r in &obs.rows {
            coords.extend(r.attackers.iter().map(|&i| 2 * map[i as usize]));
            coords.extend(r.defenders.iter().map(|&i| 2 * map[i as usize] + 1));
        }
        let active: Vec<usize> = coords.into_iter().collect();
        let pos = |c: usize| active.binary_search(&c).expect("active coordinate") as u32;

        let n = obs.rows.len();
        let mut d = Design {
            offsets: Vec::with_capacity(n + 1),
            plus: Vec::new(),
            minus: Vec::new(),
            y: Vec::with_capacity(n),
            w: Vec::with_capacity(n),
            h: Vec::with_capacity(n),
            s: Vec::with_capacity(n),
            active: Vec::new(),
        };
        d.offsets.push(0);
        for r in &obs.rows {
            d.plus.extend(r.attackers.iter().map(|&i| pos(2 * map[i as usize])));
            d.minus.extend(r.defenders.iter().map(|&i| pos(2 * map[i as usize] + 1)));
            d.offsets.push(d.plus.len());
            d.y.push(r.response);
            d.w.push(r.weight);
            d.h.push(r.home_sign());
            d.s.push(r.lineup_size() as f64);
        }
        d.active = active;
        d
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.active.len()
    }

    fn row(&self, i: usize) -> (&[u32], &[u32]) {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        (&self.plus[a..b], &self.minus[a..b])
    }

    /// `Xᵀ W X` over the active coordinates.
    pub fn gram(&self) -> Array2<f64> {
        let k = self.k();
        let mut a = Array2::<f64>::zeros((k, k));
        let mut idx: Vec<(usize, f64)> = Vec::with_capacity(10);
        for i in 0..self.n_rows() {
            let (p, m) = self.row(i);
            idx.clear();
            idx.extend(p.iter().map(|&c| (c as usize, 1.0)));
            idx.extend(m.iter().map(|&c| (c as usize, -1.0)));
            let w = self.w[i];
            for &(r, sr) in &idx {
                for &(c, sc) in &idx {
                    a[[r, c]] += w * sr * sc;
                }
            }
        }
        a
    }

    /// `Xᵀ W z` for a per-row vector `z`.
    pub fn xt_w(&self, z: &[f64]) -> Array1<f64> {
        let mut out = Array1::zeros(self.k());
        for i in 0..self.n_rows() {
            let (p, m) = self.row(i);
            let v = self.w[i] * z[i];
            for &c in p {
                out[c as usize] += v;
            }
            for &c in m {
                out[c as usize] -= v;
            }
        }
        out
    }

    /// `x_iᵀ v` for a vector over the active coordinates.
    pub fn x_dot(&self, i: usize, v: &Array1<f64>) -> f64 {
        let (p, m) = self.row(i);
        p.iter().map(|&c| v[c as usize]).sum::<f64>() - m.iter().map(|&c| v[c as usize]).sum::<f64>()
    }

    /// Residuals `y − X m − γ h` for an active-coordinate mean `m`.
    pub fn residual(&self, m: &Array1<f64>, gamma: f64) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| self.y[i] - self.x_dot(i, m) - gamma * self.h[i])
            .collect()
    }

    pub fn sum_ln_w(&self) -> f64 {
        self.w.iter().map(|w| w.ln()).sum()
    }

    /// `Σ w_i a_i b_i`.
    pub fn wdot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.w.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }
}
