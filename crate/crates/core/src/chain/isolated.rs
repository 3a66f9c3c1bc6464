//! Final-season ratings in which one focal player's prior is reset to the
//! population prior while everyone else keeps the carried-forward belief.
//!
//! Resetting player `f` changes the prior precision `Q = Σ₀⁻¹` by a rank-4
//! term `U K Uᵀ` with `U = [e_f, Q[:,f]]` and `K = diag(D_f⁻¹, −Q_ff⁻¹)`,
//! where `D_f = diag(σ_α², σ_β²)`. The reset posterior therefore follows from
//! the chain posterior `Σₚ` by one 4×4 solve:
//!
//! ```text
//! Σ' = Σₚ − ΣₚU S⁻¹ UᵀΣₚ,     S = K⁻¹ + UᵀΣₚU
//! m' = z − ΣₚU S⁻¹ Uᵀz,       z = mₚ + Σₚ[:,f] D_f⁻¹ μ_f − (ΣₚQ)[:,f] Q_ff⁻¹ (Q m₀)_f
//! ```

use ndarray::{Array1, Array2};
use ndarray_linalg::Inverse;
use rayon::prelude::*;

use super::run::{chain_fit, SeasonChainResult};
use super::transition::TransitionParams;
use crate::error::{Error, Result};
use crate::gauss::linalg::{cholesky, solve_lower};
use crate::gauss::{GaussianBelief, HyperParams, PlayerMarginal};
use crate::ids::PlayerId;
use crate::model::ObservationSet;

/// Precomputed quantities of the final season shared by every focal player.
#[derive(Debug, Clone)]
pub struct IsolatedContext {
    hyper: HyperParams,
    start: GaussianBelief,
    end: GaussianBelief,
    q: Array2<f64>,
    /// `Σₚ Q`.
    b: Array2<f64>,
    qm0: Array1<f64>,
    active: Vec<PlayerId>,
}

/// Rank-4 correction for one focal player.
struct Focal {
    /// `ΣₚU`, `d × 4`.
    su: Array2<f64>,
    /// `ΣₚU S⁻¹`.
    t: Array2<f64>,
    z: Array1<f64>,
    /// `S⁻¹ Uᵀ z`.
    w: [f64; 4],
}

impl Focal {
    fn mean(&self, i: usize) -> f64 {
        let mut acc = self.z[i];
        for a in 0..4 {
            acc -= self.su[[i, a]] * self.w[a];
        }
        acc
    }

    fn cov(&self, base: &Array2<f64>, i: usize, j: usize) -> f64 {
        let mut acc = base[[i, j]];
        for a in 0..4 {
            acc -= self.t[[i, a]] * self.su[[j, a]];
        }
        acc
    }
}

fn inv2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

impl IsolatedContext {
    /// Context for the last stage of a chain.
    pub fn new(chain: &SeasonChainResult) -> Result<Self> {
        let stage = chain.last().ok_or(Error::NoObservations)?;
        let l = cholesky(&stage.start.cov, "final-season prior covariance")?;
        let linv = solve_lower(&l, &Array2::eye(l.nrows()));
        let q = linv.t().dot(&linv);
        let b = stage.end.cov.dot(&q);
        let qm0 = q.dot(&stage.start.mean);
        Ok(IsolatedContext {
            hyper: chain.hyper,
            start: stage.start.clone(),
            end: stage.end.clone(),
            q,
            b,
            qm0,
            active: stage.active.clone(),
        })
    }

    /// Players eligible as focal players.
    pub fn active(&self) -> &[PlayerId] {
        &self.active
    }

    /// True when the carried-forward prior already equals the reset prior.
    fn already_reset(&self, i: usize) -> bool {
        let f = [2 * i, 2 * i + 1];
        let d = self.start.dim();
        f.iter().all(|&k| {
            let (mu, var) = self.hyper.coord_prior(k);
            self.start.mean[k] == mu
                && self.start.cov[[k, k]] == var
                && (0..d).all(|j| j == k || (self.start.cov[[k, j]] == 0.0 && self.start.cov[[j, k]] == 0.0))
        })
    }

    fn focal_index(&self, p: &PlayerId) -> Result<usize> {
        if self.active.binary_search(p).is_err() {
            return Err(Error::invalid(format!("focal player {p} has no rows in the final season")));
        }
        self.start.index_of(p)
    }

    fn focal(&self, i: usize) -> Result<Option<Focal>> {
        if self.already_reset(i) {
            return Ok(None);
        }
        let f = [2 * i, 2 * i + 1];
        let d = self.start.dim();
        let sp = &self.end.cov;
        let mut su = Array2::zeros((d, 4));
        for r in 0..d {
            su[[r, 0]] = sp[[r, f[0]]];
            su[[r, 1]] = sp[[r, f[1]]];
            su[[r, 2]] = self.b[[r, f[0]]];
            su[[r, 3]] = self.b[[r, f[1]]];
        }
        let dvar = [self.hyper.coord_prior(f[0]), self.hyper.coord_prior(f[1])];
        let qff = [[self.q[[f[0], f[0]]], self.q[[f[0], f[1]]]], [self.q[[f[1], f[0]]], self.q[[f[1], f[1]]]]];
        let qff_inv = inv2(qff);

        // Uᵀ v for a d-vector v.
        let ut = |v: &dyn Fn(usize) -> f64| -> [f64; 4] {
            let mut out = [v(f[0]), v(f[1]), 0.0, 0.0];
            for r in 0..d {
                let x = v(r);
                out[2] += self.q[[r, f[0]]] * x;
                out[3] += self.q[[r, f[1]]] * x;
            }
            out
        };
        let mut s = Array2::<f64>::zeros((4, 4));
        for col in 0..4 {
            let u = ut(&|r| su[[r, col]]);
            for row in 0..4 {
                s[[row, col]] = u[row];
            }
        }
        s[[0, 0]] += dvar[0].1;
        s[[1, 1]] += dvar[1].1;
        for a in 0..2 {
            for b in 0..2 {
                s[[2 + a, 2 + b]] -= qff[a][b];
            }
        }
        let sinv = s.inv().map_err(|_| Error::NotPositiveDefinite("isolated-season correction"))?;

        let mu_term = [dvar[0].0 / dvar[0].1, dvar[1].0 / dvar[1].1];
        let qm0f = [self.qm0[f[0]], self.qm0[f[1]]];
        let back = [
            qff_inv[0][0] * qm0f[0] + qff_inv[0][1] * qm0f[1],
            qff_inv[1][0] * qm0f[0] + qff_inv[1][1] * qm0f[1],
        ];
        let z = Array1::from_shape_fn(d, |r| {
            self.end.mean[r] + su[[r, 0]] * mu_term[0] + su[[r, 1]] * mu_term[1]
                - su[[r, 2]] * back[0]
                - su[[r, 3]] * back[1]
        });
        let uz = ut(&|r| z[r]);
        let mut w = [0.0; 4];
        for a in 0..4 {
            for b in 0..4 {
                w[a] += sinv[[a, b]] * uz[b];
            }
        }
        let mut t = Array2::zeros((d, 4));
        for r in 0..d {
            for a in 0..4 {
                let mut acc = 0.0;
                for b in 0..4 {
                    acc += su[[r, b]] * sinv[[b, a]];
                }
                t[[r, a]] = acc;
            }
        }
        Ok(Some(Focal { su, t, z, w }))
    }

    /// The focal player's reset-prior posterior marginal.
    pub fn marginal(&self, p: &PlayerId) -> Result<PlayerMarginal> {
        let i = self.focal_index(p)?;
        let Some(fc) = self.focal(i)? else {
            return Ok(self.end.marginal_at(i));
        };
        let (a, b) = (2 * i, 2 * i + 1);
        let base = &self.end.cov;
        Ok(PlayerMarginal {
            player: p.clone(),
            alpha_mean: fc.mean(a),
            alpha_var: fc.cov(base, a, a),
            beta_mean: fc.mean(b),
            beta_var: fc.cov(base, b, b),
            cov_alpha_beta: fc.cov(base, a, b),
        })
    }

    /// Full final-season posterior under the focal player's reset prior.
    pub fn belief(&self, p: &PlayerId) -> Result<GaussianBelief> {
        let i = self.focal_index(p)?;
        let Some(fc) = self.focal(i)? else {
            return Ok(self.end.clone());
        };
        let d = self.end.dim();
        let base = &self.end.cov;
        let mean = Array1::from_shape_fn(d, |r| fc.mean(r));
        let mut cov = Array2::zeros((d, d));
        for r in 0..d {
            for c in 0..=r {
                let v = fc.cov(base, r, c);
                cov[[r, c]] = v;
                cov[[c, r]] = v;
            }
        }
        // Keep the focal block bitwise equal to `marginal`.
        let (a, b) = (2 * i, 2 * i + 1);
        let ab = fc.cov(base, a, b);
        cov[[a, b]] = ab;
        cov[[b, a]] = ab;
        GaussianBelief::new(self.end.players.clone(), mean, cov)
    }

    /// Marginals for every active player, in id order.
    pub fn all_marginals(&self) -> Result<Vec<PlayerMarginal>> {
        self.active.par_iter().map(|p| self.marginal(p)).collect()
    }
}

/// Final-season prior with `focal` reset to the population prior and its
/// cross-covariances zeroed.
pub fn isolated_prior(start: &GaussianBelief, focal: &PlayerId, hyper: &HyperParams) -> Result<GaussianBelief> {
    let i = start.index_of(focal)?;
    let mut b = start.clone();
    for k in [2 * i, 2 * i + 1] {
        let (mu, var) = hyper.coord_prior(k);
        b.mean[k] = mu;
        b.cov.row_mut(k).fill(0.0);
        b.cov.column_mut(k).fill(0.0);
        b.cov[[k, k]] = var;
    }
    Ok(b)
}

/// Runs the chain and returns the final-season posterior under the focal
/// player's reset prior.
pub fn isolated_season_fit(
    seasons: &[ObservationSet],
    focal: &PlayerId,
    hyper: &HyperParams,
    tp: &TransitionParams,
) -> Result<GaussianBelief> {
    let chain = chain_fit(seasons, hyper, tp)?;
    IsolatedContext::new(&chain)?.belief(focal)
}

#[derive(Debug, Clone)]
pub struct IsolatedResult {
    pub chain: SeasonChainResult,
    /// One entry per final-season active player, in id order.
    pub marginals: Vec<PlayerMarginal>,
}

/// Isolated-season marginals for every final-season player. Rookies need no
/// reset and take the chain posterior.
pub fn isolated_all(seasons: &[ObservationSet], hyper: &HyperParams, tp: &TransitionParams) -> Result<IsolatedResult> {
    let chain = chain_fit(seasons, hyper, tp)?;
    let marginals = IsolatedContext::new(&chain)?.all_marginals()?;
    Ok(IsolatedResult { chain, marginals })
}
