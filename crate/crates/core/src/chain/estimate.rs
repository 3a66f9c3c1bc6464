//! Maximum likelihood for the transition parameters, alone or jointly with
//! the prior hyperparameters.

use ndarray_linalg::Inverse;
use serde::Serialize;

use super::run::{next_start, run_stage};
use super::transition::TransitionParams;
use crate::error::{Error, Result};
use crate::gauss::{log_marginal_likelihood_under, update_with_evidence, FitOptions, GaussianBelief, HyperParams};
use crate::model::ObservationSet;
use crate::optim::{hessian, nelder_mead, NelderMeadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionStdErrors {
    pub p: f64,
    pub s_alpha: f64,
    pub s_beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionFit {
    pub tp: TransitionParams,
    /// Summed log marginal likelihood over every season.
    pub loglik: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// False when the simplex stopped at `max_iter`; `tp` is then the best
    /// point found.
    pub converged: bool,
    pub std_errors: Option<TransitionStdErrors>,
}

/// Which parameters the multi-season likelihood is maximised over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EstimationOrder {
    /// Prior hyperparameters fixed, transition fitted.
    #[default]
    Sequential,
    /// Both fitted together on the multi-season likelihood.
    Joint,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Multi-season log-likelihood with the first season's posterior fixed.
struct Chain<'a> {
    seasons: &'a [ObservationSet],
    first: GaussianBelief,
    first_ll: f64,
    hyper: HyperParams,
}

impl<'a> Chain<'a> {
    fn new(seasons: &'a [ObservationSet], hyper: &HyperParams) -> Result<Self> {
        let stage = run_stage(None, &seasons[0], hyper, &TransitionParams::default())
            .map_err(|e| e.in_season(&seasons[0].label))?;
        Ok(Chain {
            seasons,
            first: stage.end,
            first_ll: stage.loglik,
            hyper: *hyper,
        })
    }

    fn loglik(&self, tp: &TransitionParams) -> Result<f64> {
        let mut total = self.first_ll;
        let mut prev = self.first.clone();
        let last = self.seasons.len() - 1;
        for (t, obs) in self.seasons.iter().enumerate().skip(1) {
            let (start, _) = next_start(Some(&prev), obs, &self.hyper, tp)?;
            if obs.is_empty() {
                prev = start;
                continue;
            }
            if t == last {
                total += log_marginal_likelihood_under(&start, obs, &self.hyper)?;
            } else {
                let (end, ll) = update_with_evidence(&start, obs, &self.hyper)?;
                total += ll;
                prev = end;
            }
        }
        Ok(total)
    }
}

fn check_seasons(seasons: &[ObservationSet]) -> Result<()> {
    if seasons.len() < 2 {
        return Err(Error::invalid("transition fitting needs at least two seasons"));
    }
    if seasons.iter().all(|s| s.is_empty()) {
        return Err(Error::NoObservations);
    }
    Ok(())
}

fn start_point(init: &TransitionParams) -> [f64; 3] {
    [
        logit(init.p.clamp(0.01, 0.99)),
        init.s_alpha.max(1e-3).ln(),
        init.s_beta.max(1e-3).ln(),
    ]
}

fn from_x(x: &[f64]) -> TransitionParams {
    TransitionParams {
        p: expit(x[0]),
        s_alpha: x[1].exp(),
        s_beta: x[2].exp(),
    }
}

/// Maximises the multi-season marginal likelihood over `(p, s_α, s_β)` with
/// the prior hyperparameters held fixed.
///
/// The simplex runs on `(logit p, ln s_α, ln s_β)`. Hitting `max_iter` is
/// not an error: the best point is returned with `converged = false`.
pub fn fit_transition_params(
    seasons: &[ObservationSet],
    hyper: &HyperParams,
    init: &TransitionParams,
    opts: &FitOptions,
) -> Result<TransitionFit> {
    check_seasons(seasons)?;
    hyper.validate()?;
    init.validate()?;
    let chain = Chain::new(seasons, hyper)?;
    let objective = |x: &[f64]| chain.loglik(&from_x(x)).map(|v| -v).unwrap_or(f64::INFINITY);
    let nm = nelder_mead(
        objective,
        &start_point(init),
        &[0.5, 0.3, 0.3],
        &NelderMeadOptions {
            max_iter: opts.max_iter,
            ftol: opts.ftol,
            xtol: opts.xtol,
        },
    );
    let tp = from_x(&nm.x);
    if !nm.converged {
        log::warn!(
            "transition fit stopped after {} iterations without meeting tolerances",
            nm.iterations
        );
    }
    let std_errors = if opts.standard_errors {
        transition_std_errors(&chain, &tp)
    } else {
        None
    };
    Ok(TransitionFit {
        tp,
        loglik: -nm.f,
        iterations: nm.iterations,
        evaluations: nm.evaluations,
        converged: nm.converged,
        std_errors,
    })
}

fn transition_std_errors(chain: &Chain, tp: &TransitionParams) -> Option<TransitionStdErrors> {
    let x = [tp.p, tp.s_alpha, tp.s_beta];
    let h = [
        1e-3f64.min(tp.p / 4.0).min((1.0 - tp.p) / 4.0).max(1e-6),
        1e-3 * tp.s_alpha.max(1e-2),
        1e-3 * tp.s_beta.max(1e-2),
    ];
    let f = |x: &[f64]| {
        let tp = TransitionParams {
            p: x[0],
            s_alpha: x[1],
            s_beta: x[2],
        };
        chain.loglik(&tp).unwrap_or(f64::NAN)
    };
    let info = hessian(f, &x, &h).mapv(|v| -v);
    match info.inv() {
        Ok(c) if c.diag().iter().all(|v| *v > 0.0 && v.is_finite()) => Some(TransitionStdErrors {
            p: c[[0, 0]].sqrt(),
            s_alpha: c[[1, 1]].sqrt(),
            s_beta: c[[2, 2]].sqrt(),
        }),
        _ => {
            log::warn!("transition information is not positive definite; standard errors omitted");
            None
        }
    }
}

/// Fits the prior hyperparameters and the transition together on the
/// multi-season likelihood. `μ_α + μ_β` stays at its initial value.
///
/// Every evaluation reruns the whole chain, so this is far slower than the
/// sequential order.
pub fn fit_joint(
    seasons: &[ObservationSet],
    init_hyper: &HyperParams,
    init_tp: &TransitionParams,
    opts: &FitOptions,
) -> Result<(HyperParams, TransitionFit)> {
    check_seasons(seasons)?;
    init_hyper.validate()?;
    init_tp.validate()?;
    let gauge = init_hyper.mu_alpha + init_hyper.mu_beta;
    let unpack = |x: &[f64]| -> (HyperParams, TransitionParams) {
        let c = x[0];
        let hyper = HyperParams {
            mu_alpha: (gauge + c) / 2.0,
            mu_beta: (gauge - c) / 2.0,
            gamma: x[1],
            sigma_alpha: x[2].exp(),
            sigma_beta: x[3].exp(),
            sigma: x[4].exp(),
        };
        (hyper, from_x(&x[5..]))
    };
    let objective = |x: &[f64]| {
        let (hyper, tp) = unpack(x);
        Chain::new(seasons, &hyper)
            .and_then(|c| c.loglik(&tp))
            .map(|v| -v)
            .unwrap_or(f64::INFINITY)
    };
    let mut x0 = vec![
        init_hyper.mu_alpha - init_hyper.mu_beta,
        init_hyper.gamma,
        init_hyper.sigma_alpha.ln(),
        init_hyper.sigma_beta.ln(),
        init_hyper.sigma.ln(),
    ];
    x0.extend(start_point(init_tp));
    let nm = nelder_mead(
        objective,
        &x0,
        &[0.5, 0.5, 0.2, 0.2, 0.1, 0.5, 0.3, 0.3],
        &NelderMeadOptions {
            max_iter: opts.max_iter,
            ftol: opts.ftol,
            xtol: opts.xtol,
        },
    );
    let (hyper, tp) = unpack(&nm.x);
    let std_errors = if opts.standard_errors {
        Chain::new(seasons, &hyper)
            .ok()
            .and_then(|c| transition_std_errors(&c, &tp))
    } else {
        None
    };
    Ok((
        hyper,
        TransitionFit {
            tp,
            loglik: -nm.f,
            iterations: nm.iterations,
            evaluations: nm.evaluations,
            converged: nm.converged,
            std_errors,
        },
    ))
}
