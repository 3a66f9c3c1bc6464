//! Maximum likelihood for the prior hyperparameters.
//!
//! Every row's prior mean is `s·(μ_α − μ_β)` for lineup size `s`, so the
//! data identify only the difference `c = μ_α − μ_β`. The sum
//! `μ_α + μ_β` is held at its initial value. For fixed scales the response
//! covariance `V` does not depend on `(c, γ)`, so both are profiled out by
//! generalised least squares on the regressors `[s, h]`; the simplex search
//! runs over `(ln σ_α, ln σ_β, ln σ)`.

use ndarray::{Array1, Array2};
use ndarray_linalg::Inverse;
use serde::Serialize;

use super::design::Design;
use super::linalg::{cholesky, chol_solve_vec};
use super::HyperParams;
use crate::error::{Error, Result};
use crate::model::ObservationSet;
use crate::optim::{hessian, nelder_mead, NelderMeadOptions};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Log-likelihood change tolerance.
    pub ftol: f64,
    /// Relative parameter-move tolerance.
    pub xtol: f64,
    pub standard_errors: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 1000,
            ftol: 1e-6,
            xtol: 1e-4,
            standard_errors: true,
        }
    }
}

/// Asymptotic standard errors from the observed information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperStdErrors {
    pub mu_alpha: f64,
    pub sigma_alpha: f64,
    pub mu_beta: f64,
    pub sigma_beta: f64,
    pub gamma: f64,
    pub sigma: f64,
    /// Of `μ_α − μ_β`.
    pub mu_diff: f64,
    /// Of `(5μ_α − 5μ_β + 2γ)/100`.
    pub home_points_per_possession: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperFit {
    pub hyper: HyperParams,
    pub loglik: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// `μ_α + μ_β`, held fixed.
    pub gauge: f64,
    pub std_errors: Option<HyperStdErrors>,
}

/// Per-set statistics that do not depend on the hyperparameters.
struct SetCache {
    a: Array2<f64>,
    is_alpha: Vec<bool>,
    /// `XᵀW z` for `z ∈ {y, s, h}`.
    xz: [Array1<f64>; 3],
    /// `zᵀ W z'`.
    zz: [[f64; 3]; 3],
    n: f64,
    sum_ln_w: f64,
}

impl SetCache {
    fn new(obs: &ObservationSet) -> SetCache {
        let d = Design::own(obs);
        let z = [&d.y, &d.s, &d.h];
        let mut zz = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                zz[i][j] = d.wdot(z[i], z[j]);
            }
        }
        SetCache {
            a: d.gram(),
            is_alpha: d.active.iter().map(|k| k % 2 == 0).collect(),
            xz: [d.xt_w(&d.y), d.xt_w(&d.s), d.xt_w(&d.h)],
            zz,
            n: d.n_rows() as f64,
            sum_ln_w: d.sum_ln_w(),
        }
    }

    /// `ln|V|` and the Gram matrix `zᵀV⁻¹z'`.
    fn stats(&self, sa: f64, sb: f64, sigma: f64) -> Result<(f64, [[f64; 3]; 3])> {
        let s2 = sigma * sigma;
        let scale: Vec<f64> = self.is_alpha.iter().map(|&a| if a { sa } else { sb }).collect();
        let k = scale.len();
        let mut m = Array2::from_shape_fn((k, k), |(i, j)| scale[i] * scale[j] * self.a[[i, j]] / s2);
        m.diag_mut().mapv_inplace(|v| v + 1.0);
        let c = cholesky(&m, "whitened posterior precision")?;
        let q: Vec<Array1<f64>> = self
            .xz
            .iter()
            .map(|x| Array1::from_iter(x.iter().zip(&scale).map(|(v, d)| v * d / s2)))
            .collect();
        let mq: Vec<Array1<f64>> = q.iter().map(|v| chol_solve_vec(&c, v)).collect();
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = self.zz[i][j] / s2 - q[i].dot(&mq[j]);
            }
        }
        let logdet = self.n * s2.ln() - self.sum_ln_w + 2.0 * c.diag().iter().map(|x| x.ln()).sum::<f64>();
        Ok((logdet, g))
    }
}

struct Pooled {
    sets: Vec<SetCache>,
    n: f64,
}

impl Pooled {
    fn stats(&self, sa: f64, sb: f64, sigma: f64) -> Result<(f64, [[f64; 3]; 3])> {
        let mut logdet = 0.0;
        let mut g = [[0.0; 3]; 3];
        for s in &self.sets {
            let (ld, gs) = s.stats(sa, sb, sigma)?;
            logdet += ld;
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] += gs[i][j];
                }
            }
        }
        Ok((logdet, g))
    }

    fn loglik(&self, c: f64, gamma: f64, sa: f64, sb: f64, sigma: f64) -> Result<f64> {
        let (logdet, g) = self.stats(sa, sb, sigma)?;
        Ok(full_loglik(self.n, logdet, &g, c, gamma))
    }

    /// Profiled log-likelihood and the maximising `(c, γ)`.
    fn profile(&self, sa: f64, sb: f64, sigma: f64) -> Result<(f64, f64, f64)> {
        let (logdet, g) = self.stats(sa, sb, sigma)?;
        let (c, gamma) = gls(&g)?;
        Ok((full_loglik(self.n, logdet, &g, c, gamma), c, gamma))
    }
}

fn full_loglik(n: f64, logdet: f64, g: &[[f64; 3]; 3], c: f64, gamma: f64) -> f64 {
    let quad = g[0][0] - 2.0 * (c * g[1][0] + gamma * g[2][0])
        + c * c * g[1][1]
        + 2.0 * c * gamma * g[1][2]
        + gamma * gamma * g[2][2];
    -0.5 * (n * LN_2PI + logdet + quad)
}

fn gls(g: &[[f64; 3]; 3]) -> Result<(f64, f64)> {
    let (a, b, d) = (g[1][1], g[1][2], g[2][2]);
    let det = a * d - b * b;
    if !(det > 1e-12 * a.abs() * d.abs()) {
        return Err(Error::invalid(
            "mean offset and home advantage are not separately identified (need both home and away rows)",
        ));
    }
    let (ry, hy) = (g[1][0], g[2][0]);
    Ok(((d * ry - b * hy) / det, (a * hy - b * ry) / det))
}

fn assemble(c: f64, gamma: f64, sa: f64, sb: f64, sigma: f64, gauge: f64) -> HyperParams {
    HyperParams {
        mu_alpha: (gauge + c) / 2.0,
        sigma_alpha: sa,
        mu_beta: (gauge - c) / 2.0,
        sigma_beta: sb,
        gamma,
        sigma,
    }
}

/// Maximises the summed log marginal likelihood over independent per-set
/// priors that share one set of hyperparameters.
///
/// Returns [`Error::NotConverged`] with the best point found when the
/// simplex does not meet both tolerances within `max_iter` iterations.
pub fn fit_hyperparameters(sets: &[&ObservationSet], init: &HyperParams, opts: &FitOptions) -> Result<HyperFit> {
    init.validate()?;
    let nonempty: Vec<&&ObservationSet> = sets.iter().filter(|s| !s.is_empty()).collect();
    if nonempty.is_empty() {
        return Err(Error::NoObservations);
    }
    let pooled = Pooled {
        sets: nonempty.iter().map(|s| SetCache::new(s)).collect(),
        n: nonempty.iter().map(|s| s.len() as f64).sum(),
    };
    let gauge = init.mu_alpha + init.mu_beta;

    let objective = |x: &[f64]| match pooled.profile(x[0].exp(), x[1].exp(), x[2].exp()) {
        Ok((ll, _, _)) => -ll,
        Err(_) => f64::INFINITY,
    };
    let x0 = [init.sigma_alpha.ln(), init.sigma_beta.ln(), init.sigma.ln()];
    let nm = nelder_mead(
        objective,
        &x0,
        &[0.2, 0.2, 0.1],
        &NelderMeadOptions {
            max_iter: opts.max_iter,
            ftol: opts.ftol,
            xtol: opts.xtol,
        },
    );
    let (sa, sb, sigma) = (nm.x[0].exp(), nm.x[1].exp(), nm.x[2].exp());
    let (loglik, c, gamma) = pooled.profile(sa, sb, sigma)?;
    let hyper = assemble(c, gamma, sa, sb, sigma, gauge);
    if !nm.converged {
        return Err(Error::NotConverged {
            iterations: nm.iterations,
            loglik,
            best: Box::new(hyper),
        });
    }

    let std_errors = if opts.standard_errors {
        standard_errors(&pooled, [c, gamma, nm.x[0], nm.x[1], nm.x[2]])
    } else {
        None
    };
    Ok(HyperFit {
        hyper,
        loglik,
        iterations: nm.iterations,
        evaluations: nm.evaluations,
        gauge,
        std_errors,
    })
}

/// Inverse observed information in `(c, γ, ln σ_α, ln σ_β, ln σ)`, mapped to
/// the natural scale by the delta method.
fn standard_errors(pooled: &Pooled, theta: [f64; 5]) -> Option<HyperStdErrors> {
    let f = |x: &[f64]| {
        pooled
            .loglik(x[0], x[1], x[2].exp(), x[3].exp(), x[4].exp())
            .unwrap_or(f64::NAN)
    };
    let h = hessian(f, &theta, &[1e-2, 1e-2, 1e-3, 1e-3, 1e-4]);
    let info = h.mapv(|v| -v);
    let cov = match info.inv() {
        Ok(c) if c.diag().iter().all(|v| *v > 0.0 && v.is_finite()) => c,
        _ => {
            log::warn!("observed information is not positive definite; standard errors omitted");
            return None;
        }
    };
    let se = |i: usize| cov[[i, i]].sqrt();
    let se_c = se(0);
    let var_home = (25.0 * cov[[0, 0]] + 20.0 * cov[[0, 1]] + 4.0 * cov[[1, 1]]) / 1e4;
    Some(HyperStdErrors {
        mu_alpha: se_c / 2.0,
        mu_beta: se_c / 2.0,
        mu_diff: se_c,
        gamma: se(1),
        sigma_alpha: theta[2].exp() * se(2),
        sigma_beta: theta[3].exp() * se(3),
        sigma: theta[4].exp() * se(4),
        home_points_per_possession: var_home.max(0.0).sqrt(),
    })
}

/// Profiled log-likelihood at the given scales, returning it with the
/// maximising `(μ_α − μ_β, γ)`.
pub fn profile_loglik(sets: &[&ObservationSet], sigma_alpha: f64, sigma_beta: f64, sigma: f64) -> Result<(f64, f64, f64)> {
    let pooled = Pooled {
        sets: sets.iter().filter(|s| !s.is_empty()).map(|s| SetCache::new(s)).collect(),
        n: sets.iter().map(|s| s.len() as f64).sum(),
    };
    if pooled.sets.is_empty() {
        return Err(Error::NoObservations);
    }
    pooled.profile(sigma_alpha, sigma_beta, sigma)
}
