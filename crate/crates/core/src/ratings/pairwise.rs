use std::io::Write;

use ndarray::Array2;

use crate::error::Result;
use crate::gauss::GaussianBelief;
use crate::ids::PlayerId;
use crate::normal;

/// Probability that the difference `d ~ N(mean, var)` is positive.
///
/// Evaluated as `Φ(|z|)` and reflected so that swapping the sign of `mean`
/// yields the exact complement.
pub(crate) fn prob_positive(mean: f64, var: f64) -> f64 {
    if !(var > 0.0) {
        return match mean.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => 1.0,
            Some(std::cmp::Ordering::Less) => 0.0,
            _ => 0.5,
        };
    }
    let upper = normal::cdf(mean.abs() / var.sqrt());
    if mean >= 0.0 {
        upper
    } else {
        1.0 - upper
    }
}

/// Mean and variance of `c_A − c_B` for combined abilities, with terms
/// summed in an order independent of argument order.
fn combined_difference(b: &GaussianBelief, i: usize, j: usize) -> (f64, f64) {
    let mean = |k: usize| b.mean[2 * k] + b.mean[2 * k + 1];
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let var = b.combined_cov(lo, lo) + b.combined_cov(hi, hi) - 2.0 * b.combined_cov(lo, hi);
    (mean(i) - mean(j), var)
}

/// Posterior probability that `a`'s combined ability exceeds `b`'s, using
/// the full joint covariance.
///
/// `pairwise_prob(A, B) + pairwise_prob(B, A)` is exactly 1.
pub fn pairwise_prob(belief: &GaussianBelief, a: &PlayerId, b: &PlayerId) -> Result<f64> {
    let (i, j) = (belief.index_of(a)?, belief.index_of(b)?);
    let (mean, var) = combined_difference(belief, i, j);
    Ok(prob_positive(mean, var))
}

/// Square matrix with entry `(r, c)` = P(player r stronger than player c).
/// The diagonal is 0.5.
pub fn pairwise_matrix(belief: &GaussianBelief, players: &[PlayerId]) -> Result<Array2<f64>> {
    let idx = players
        .iter()
        .map(|p| belief.index_of(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Array2::from_shape_fn((idx.len(), idx.len()), |(r, c)| {
        let (mean, var) = combined_difference(belief, idx[r], idx[c]);
        prob_positive(mean, var)
    }))
}

/// Square CSV: a header of player ids, then one row per player led by its id.
pub fn write_pairwise_csv<W: Write>(writer: W, players: &[PlayerId], matrix: &Array2<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(std::iter::once("player").chain(players.iter().map(PlayerId::as_str)))?;
    for (p, row) in players.iter().zip(matrix.rows()) {
        w.write_record(std::iter::once(p.to_string()).chain(row.iter().map(|v| v.to_string())))?;
    }
    w.flush()?;
    Ok(())
}
