use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ids::PlayerId;
use crate::normal;

/// Two-sided significance level for backward selection.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Relative residual norm below which a column counts as collinear.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Two-sided normal p-value against zero.
    pub p_value: f64,
}

impl Coefficient {
    fn new(name: &str, estimate: f64, se: f64) -> Self {
        let half = normal::Z_975 * se;
        Coefficient {
            name: name.to_string(),
            estimate,
            se,
            ci_low: estimate - half,
            ci_high: estimate + half,
            p_value: normal::two_sided_p(estimate / se),
        }
    }
}

/// How covariates and outcome are centred and scaled before the
/// standardised refit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum StandardiseMode {
    /// Unweighted mean and sample SD.
    #[default]
    Unweighted,
    /// Means and SDs weighted by `1/SE²`.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    /// Row labels, when the fit came from named players.
    pub players: Vec<PlayerId>,
    pub intercept: Coefficient,
    /// Raw-scale coefficients of the selected covariates, in candidate order.
    pub coefficients: Vec<Coefficient>,
    /// Standardised coefficients, filled by [`standardise_fit`].
    pub standardised: Vec<Coefficient>,
    /// Per-row fitted values on the raw scale.
    pub fitted: Vec<f64>,
    pub y: Vec<f64>,
    /// `1 / SE²`.
    pub weights: Vec<f64>,
    /// Covariates removed by backward selection with their p-values at
    /// removal, in removal order.
    pub dropped: Vec<(String, f64)>,
    pub notices: Vec<String>,
}

impl RegressionFit {
    pub fn selected(&self) -> Vec<&str> {
        self.coefficients.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn standardised_coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.standardised.iter().find(|c| c.name == name)
    }
}

/// Thin QR of `A` by modified Gram–Schmidt with one reorthogonalisation
/// pass. Fails naming each column that lies in the span of earlier ones.
fn mgs_qr(a: ArrayView2<f64>, names: &[String]) -> Result<(Array2<f64>, Array2<f64>)> {
    let (n, p) = a.dim();
    let mut q = a.to_owned();
    let mut r = Array2::<f64>::zeros((p, p));
    for j in 0..p {
        let norm0 = a.column(j).dot(&a.column(j)).sqrt();
        for _pass in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dot(&q.column(j));
                r[[k, j]] += proj;
                let qk = q.column(k).to_owned();
                q.column_mut(j).scaled_add(-proj, &qk);
            }
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        if !(norm > RANK_TOL * norm0.max(f64::MIN_POSITIVE)) || n <= j {
            // Column j ≈ Σ c_k a_k with R[..j, ..j] c = R[..j, j].
            let rj = r.slice(ndarray::s![..j, ..j]).to_owned();
            let c = solve_upper(&rj, &r.slice(ndarray::s![..j, j]).to_owned());
            let mut cols: Vec<String> = (0..j)
                .filter(|&k| (c[k] * a.column(k).dot(&a.column(k)).sqrt()).abs() > 1e-8 * norm0)
                .map(|k| names[k].clone())
                .collect();
            cols.push(names[j].clone());
            return Err(Error::RankDeficient { columns: cols });
        }
        r[[j, j]] = norm;
        q.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Ok((q, r))
}

/// Solves `R x = b` for upper-triangular `R`.
fn solve_upper(r: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let p = b.len();
    let mut x = b.clone();
    for i in (0..p).rev() {
        let mut acc = x[i];
        for k in i + 1..p {
            acc -= r[[i, k]] * x[k];
        }
        x[i] = acc / r[[i, i]];
    }
    x
}

fn check_inputs(x: ArrayView2<f64>, y: &[f64], se: &[f64], names: &[String]) -> Result<()> {
    let n = y.len();
    if x.nrows() != n || se.len() != n {
        return Err(Error::invalid(format!(
            "design has {} rows, outcome {n}, standard errors {}",
            x.nrows(),
            se.len()
        )));
    }
    if x.ncols() != names.len() {
        return Err(Error::invalid("one name per covariate column is required"));
    }
    if n == 0 {
        return Err(Error::NoObservations);
    }
    if let Some(i) = se.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::invalid(format!("row {i}: standard error must be finite and positive")));
    }
    if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("design and outcome must be finite"));
    }
    Ok(())
}

/// Weighted least squares with an intercept and weights `1/SE²`.
pub fn wls_fit(x: ArrayView2<f64>, y: &[f64], se: &[f64], names: &[String]) -> Result<RegressionFit> {
    check_inputs(x, y, se, names)?;
    let (n, p) = x.dim();
    let sw: Vec<f64> = se.iter().map(|s| 1.0 / s).collect();
    let mut a = Array2::<f64>::zeros((n, p + 1));
    for i in 0..n {
        a[[i, 0]] = sw[i];
        for j in 0..p {
            a[[i, j + 1]] = x[[i, j]] * sw[i];
        }
    }
    let all_names: Vec<String> = std::iter::once("intercept".to_string()).chain(names.iter().cloned()).collect();
    let (q, r) = mgs_qr(a.view(), &all_names)?;
    let yw = Array1::from_iter(y.iter().zip(&sw).map(|(v, s)| v * s));
    let beta = solve_upper(&r, &q.t().dot(&yw));
    // Cov = R⁻¹ R⁻ᵀ; only the diagonal is needed.
    let rinv = {
        let mut m = Array2::<f64>::zeros((p + 1, p + 1));
        for j in 0..=p {
            let mut e = Array1::zeros(p + 1);
            e[j] = 1.0;
            m.column_mut(j).assign(&solve_upper(&r, &e));
        }
        m
    };
    let var: Vec<f64> = rinv.axis_iter(Axis(0)).map(|row| row.dot(&row)).collect();
    let coef: Vec<Coefficient> = (0..=p)
        .map(|j| Coefficient::new(&all_names[j], beta[j], var[j].sqrt()))
        .collect();
    let mut fit = RegressionFit {
        players: Vec::new(),
        intercept: coef[0].clone(),
        coefficients: coef[1..].to_vec(),
        standardised: Vec::new(),
        fitted: Vec::new(),
        y: y.to_vec(),
        weights: se.iter().map(|s| 1.0 / (s * s)).collect(),
        dropped: Vec::new(),
        notices: Vec::new(),
    };
    fit.fitted = (0..n).map(|i| linear_predict(&fit, |j| x[[i, j]])).collect();
    Ok(fit)
}

/// Intercept plus `Σ a_j x_j` in coefficient order.
fn linear_predict(fit: &RegressionFit, x: impl Fn(usize) -> f64) -> f64 {
    let mut acc = fit.intercept.estimate;
    for (j, c) in fit.coefficients.iter().enumerate() {
        acc += c.estimate * x(j);
    }
    acc
}

/// Weighted `R² = 1 − RSS_w / TSS_w`, with TSS about the weighted mean.
pub fn r_squared(fit: &RegressionFit) -> Result<f64> {
    let wsum: f64 = fit.weights.iter().sum();
    let ybar = fit.y.iter().zip(&fit.weights).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let tss: f64 = fit.y.iter().zip(&fit.weights).map(|(y, w)| w * (y - ybar).powi(2)).sum();
    if !(tss > 0.0) {
        return Err(Error::ZeroVariance("outcome".into()));
    }
    let rss: f64 = fit
        .y
        .iter()
        .zip(&fit.fitted)
        .zip(&fit.weights)
        .map(|((y, f), w)| w * (y - f).powi(2))
        .sum();
    Ok(1.0 - rss / tss)
}

/// Backward selection from the saturated model: repeatedly drops the
/// covariate with the largest p-value above `alpha` and refits. Equal
/// p-values drop the alphabetically first name, so the result does not
/// depend on column order. The intercept is never dropped.
pub fn backward_select(x: ArrayView2<f64>, y: &[f64], se: &[f64], names: &[String], alpha: f64) -> Result<RegressionFit> {
    check_inputs(x, y, se, names)?;
    let mut keep: Vec<usize> = (0..names.len()).collect();
    let mut dropped = Vec::new();
    loop {
        let sub = x.select(Axis(1), &keep);
        let sub_names: Vec<String> = keep.iter().map(|&j| names[j].clone()).collect();
        let mut fit = wls_fit(sub.view(), y, se, &sub_names)?;
        let worst = fit
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.p_value > alpha)
            .max_by(|(_, a), (_, b)| a.p_value.total_cmp(&b.p_value).then_with(|| b.name.cmp(&a.name)));
        match worst {
            Some((k, c)) => {
                dropped.push((c.name.clone(), c.p_value));
                keep.remove(k);
            }
            None => {
                if keep.is_empty() {
                    log::warn!("backward selection removed every covariate; returning the intercept-only fit");
                    fit.notices.push("no covariate survived selection; intercept-only fit".into());
                }
                fit.dropped = dropped;
                return Ok(fit);
            }
        }
    }
}

fn column_stats(v: &[f64], w: &[f64], mode: StandardiseMode) -> (f64, f64) {
    let n = v.len() as f64;
    match mode {
        StandardiseMode::Unweighted => {
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, var.sqrt())
        }
        StandardiseMode::Weighted => {
            let ws: f64 = w.iter().sum();
            let mean = v.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / ws;
            let var = v.iter().zip(w).map(|(x, w)| w * (x - mean).powi(2)).sum::<f64>() / ws * n / (n - 1.0);
            (mean, var.sqrt())
        }
    }
}

/// Refits the selected covariates after centring and scaling each one and
/// the outcome, and stores the standardised coefficients in `fit`.
///
/// `x` holds the columns of `fit.coefficients`, in that order. Outcome SEs
/// are scaled with the outcome. Zero-variance covariates are left out with
/// a notice.
pub fn standardise_fit(fit: &mut RegressionFit, x: ArrayView2<f64>, se: &[f64], mode: StandardiseMode) -> Result<()> {
    let names: Vec<String> = fit.coefficients.iter().map(|c| c.name.clone()).collect();
    check_inputs(x, &fit.y, se, &names)?;
    if x.nrows() < 2 {
        return Err(Error::ZeroVariance("outcome".into()));
    }
    let (ym, ys) = column_stats(&fit.y, &fit.weights, mode);
    if !(ys > 0.0) {
        return Err(Error::ZeroVariance("outcome".into()));
    }
    let mut cols = Vec::new();
    let mut kept = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let v: Vec<f64> = x.column(j).to_vec();
        let (m, s) = column_stats(&v, &fit.weights, mode);
        if s > 0.0 {
            cols.push(v.iter().map(|x| (x - m) / s).collect::<Vec<_>>());
            kept.push(name.clone());
        } else {
            log::warn!("covariate {name} has zero variance; left out of the standardised fit");
            fit.notices.push(format!("{name} has zero variance and has no standardised coefficient"));
        }
    }
    let n = fit.y.len();
    let z = Array2::from_shape_fn((n, cols.len()), |(i, j)| cols[j][i]);
    let yz: Vec<f64> = fit.y.iter().map(|y| (y - ym) / ys).collect();
    let sez: Vec<f64> = se.iter().map(|s| s / ys).collect();
    let std_fit = wls_fit(z.view(), &yz, &sez, &kept)?;
    fit.standardised = std_fit.coefficients;
    Ok(())
}

/// Raw-scale prediction `intercept + Σ a_j x_j` from named covariate values.
pub fn predict_ability(fit: &RegressionFit, values: &BTreeMap<String, f64>) -> Result<f64> {
    let xs = fit
        .coefficients
        .iter()
        .map(|c| values.get(&c.name).copied().ok_or_else(|| Error::MissingCovariate(c.name.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(linear_predict(fit, |j| xs[j]))
}
