//! Derivative-free minimisation and finite-difference curvature.

use ndarray::Array2;

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Converged when the spread of simplex values falls below this.
    pub ftol: f64,
    /// and every vertex is within this relative distance of the best one.
    pub xtol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iter: 2000,
            ftol: 1e-6,
            xtol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimises `f` from `x0` with an axis-aligned initial simplex of size
/// `step`. Non-finite values are treated as `+∞`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(step.len(), n, "one step per parameter");
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let (alpha, gamma, rho, shrink) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        // Stable sort keeps ties in insertion order.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let best = &simplex[0];
        let size = simplex[1..]
            .iter()
            .flat_map(|x| x.iter().zip(best).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)))
            .fold(0.0f64, f64::max);
        if spread.is_finite() && spread < opts.ftol && size < opts.xtol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(gamma);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(rho * alpha);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            let x: Vec<f64> = simplex[i]
                .iter()
                .zip(&best)
                .map(|(v, b)| b + shrink * (v - b))
                .collect();
            values[i] = eval(&x);
            simplex[i] = x;
        }
    }
    NelderMeadResult {
        x: simplex[0].clone(),
        f: values[0],
        iterations,
        evaluations: evals,
        converged,
    }
}

/// Central-difference Hessian of `f` at `x` with per-coordinate steps `h`.
pub fn hessian<F>(mut f: F, x: &[f64], h: &[f64]) -> Array2<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x.len();
    let mut out = Array2::zeros((n, n));
    let f0 = f(x);
    let shifted = |i: usize, si: f64, j: usize, sj: f64| -> Vec<f64> {
        let mut y = x.to_vec();
        y[i] += si * h[i];
        y[j] += sj * h[j];
        y
    };
    for i in 0..n {
        let mut up = x.to_vec();
        up[i] += h[i];
        let mut dn = x.to_vec();
        dn[i] -= h[i];
        out[[i, i]] = (f(&up) - 2.0 * f0 + f(&dn)) / (h[i] * h[i]);
        for j in 0..i {
            let v = (f(&shifted(i, 1.0, j, 1.0)) - f(&shifted(i, 1.0, j, -1.0)) - f(&shifted(i, -1.0, j, 1.0))
                + f(&shifted(i, -1.0, j, -1.0)))
                / (4.0 * h[i] * h[j]);
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

/// Central-difference gradient.
pub fn gradient<F>(mut f: F, x: &[f64], h: &[f64]) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            up[i] += h[i];
            let mut dn = x.to_vec();
            dn[i] -= h[i];
            (f(&up) - f(&dn)) / (2.0 * h[i])
        })
        .collect()
}
