//! Exact conditioning of a Gaussian belief on observation rows.
//!
//! With `S` the coordinates the rows touch, `P = Σ₀[S,S] = L Lᵀ`, `A = XᵀWX`
//! and `r = y − X m₀ − γh`, the update works in the whitened basis
//! `M = I + Lᵀ A L / σ² = C Cᵀ`. The marginal covariance of the responses is
//! `V = σ² W⁻¹ + X P Xᵀ`, so
//!
//! ```text
//! ln|V|    = Σ ln(σ²/wᵢ) + 2 Σ ln Cᵢᵢ
//! rᵀV⁻¹r   = rᵀWr/σ² − uᵀM⁻¹u,     u = Lᵀ XᵀWr / σ²
//! ```
//!
//! Coordinates outside `S` move through their prior covariance with `S`.

use ndarray::{Array1, Array2, Axis};

use super::design::Design;
use super::linalg::{cholesky, chol_solve_vec, solve_lower, symmetrize};
use super::{prior_belief, GaussianBelief, HyperParams};
use crate::error::{Error, Result};
use crate::model::ObservationSet;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Sufficient statistics of the rows for one prior mean and `γ`.
pub(crate) struct Evidence {
    /// `XᵀWX` over the active coordinates.
    pub a: Array2<f64>,
    /// `XᵀWr`.
    pub xtwr: Array1<f64>,
    /// `rᵀWr`.
    pub rwr: f64,
    pub n: usize,
    pub sum_ln_w: f64,
}

impl Evidence {
    pub fn from_design(design: &Design, prior_mean: &Array1<f64>, gamma: f64) -> Evidence {
        let m = Array1::from_iter(design.active.iter().map(|&k| prior_mean[k]));
        let r = design.residual(&m, gamma);
        Evidence {
            a: design.gram(),
            xtwr: design.xt_w(&r),
            rwr: design.wdot(&r, &r),
            n: design.n_rows(),
            sum_ln_w: design.sum_ln_w(),
        }
    }
}

/// Log marginal likelihood and, when requested, the posterior mean and
/// covariance over all coordinates.
pub(crate) fn condition(
    mean: &Array1<f64>,
    cov: &Array2<f64>,
    active: &[usize],
    ev: &Evidence,
    sigma2: f64,
    want_posterior: bool,
) -> Result<(f64, Option<(Array1<f64>, Array2<f64>)>)> {
    if ev.n == 0 {
        let post = want_posterior.then(|| (mean.clone(), cov.clone()));
        return Ok((0.0, post));
    }
    let d = mean.len();
    let k = active.len();
    let full = k == d;

    let p = if full {
        cov.clone()
    } else {
        Array2::from_shape_fn((k, k), |(i, j)| cov[[active[i], active[j]]])
    };
    let l = cholesky(&p, "prior covariance")?;

    let mut m = l.t().dot(&ev.a.dot(&l));
    m.mapv_inplace(|v| v / sigma2);
    m.diag_mut().mapv_inplace(|v| v + 1.0);
    symmetrize(&mut m);
    let c = cholesky(&m, "whitened posterior precision")?;

    let u = l.t().dot(&ev.xtwr) / sigma2;
    let v = chol_solve_vec(&c, &u);
    let logdet = 2.0 * c.diag().iter().map(|x| x.ln()).sum::<f64>();
    let n = ev.n as f64;
    let loglik = -0.5 * (n * LN_2PI + n * sigma2.ln() - ev.sum_ln_w + logdet + ev.rwr / sigma2 - u.dot(&v));
    if !loglik.is_finite() {
        return Err(Error::NotPositiveDefinite("response covariance"));
    }
    if !want_posterior {
        return Ok((loglik, None));
    }

    // Gᵀ = L⁻¹ Σ₀[S,:], which is Lᵀ when every coordinate is active.
    let gt = if full {
        l.t().to_owned()
    } else {
        let rows = cov.select(Axis(0), active);
        solve_lower(&l, &rows)
    };
    let post_mean = mean + &gt.t().dot(&v);
    let kt = solve_lower(&c, &gt);
    let mut post_cov = kt.t().dot(&kt);
    if !full {
        let mut rest = cov - &gt.t().dot(&gt);
        // Zero in exact arithmetic on the active block.
        for &i in active {
            for &j in active {
                rest[[i, j]] = 0.0;
            }
        }
        post_cov = post_cov + rest;
    }
    symmetrize(&mut post_cov);
    Ok((loglik, Some((post_mean, post_cov))))
}

fn check_sigma(hyper: &HyperParams) -> Result<f64> {
    if !(hyper.sigma > 0.0 && hyper.sigma.is_finite() && hyper.gamma.is_finite()) {
        return Err(Error::invalid("sigma must be positive and gamma finite"));
    }
    Ok(hyper.sigma * hyper.sigma)
}

/// Posterior belief and log marginal likelihood of `obs` under `prior`.
///
/// Only `hyper.gamma` and `hyper.sigma` are read; the prior is taken as given.
pub fn update_with_evidence(
    prior: &GaussianBelief,
    obs: &ObservationSet,
    hyper: &HyperParams,
) -> Result<(GaussianBelief, f64)> {
    let sigma2 = check_sigma(hyper)?;
    let design = Design::for_belief(obs, prior)?;
    let ev = Evidence::from_design(&design, &prior.mean, hyper.gamma);
    let (ll, post) = condition(&prior.mean, &prior.cov, &design.active, &ev, sigma2, true)?;
    let (mean, cov) = post.expect("posterior requested");
    Ok((
        GaussianBelief {
            players: prior.players.clone(),
            mean,
            cov,
        },
        ll,
    ))
}

/// Exact conjugate posterior given the rows of `obs`.
pub fn posterior_update(prior: &GaussianBelief, obs: &ObservationSet, hyper: &HyperParams) -> Result<GaussianBelief> {
    if obs.is_empty() {
        for p in obs.players.ids() {
            prior.index_of(p)?;
        }
        return Ok(prior.clone());
    }
    update_with_evidence(prior, obs, hyper).map(|(b, _)| b)
}

/// Log marginal likelihood of `obs` under an arbitrary prior belief.
pub fn log_marginal_likelihood_under(prior: &GaussianBelief, obs: &ObservationSet, hyper: &HyperParams) -> Result<f64> {
    let sigma2 = check_sigma(hyper)?;
    let design = Design::for_belief(obs, prior)?;
    let ev = Evidence::from_design(&design, &prior.mean, hyper.gamma);
    condition(&prior.mean, &prior.cov, &design.active, &ev, sigma2, false).map(|(ll, _)| ll)
}

/// Log density of the responses with every ability integrated out under
/// the independent prior built from `hyper`.
pub fn log_marginal_likelihood(hyper: &HyperParams, obs: &ObservationSet) -> Result<f64> {
    if obs.is_empty() {
        return Ok(0.0);
    }
    let prior = prior_belief(obs.players.ids(), hyper)?;
    log_marginal_likelihood_under(&prior, obs, hyper)
}
