use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauss::linalg::cholesky;
use crate::gauss::GaussianBelief;
use crate::ids::PlayerId;

/// Draws per block. Block `k` uses ChaCha stream `k`, so the counts do not
/// depend on how blocks are spread over threads.
const BLOCK: u64 = 4096;

/// Monte Carlo frequencies of each player having the largest combined
/// ability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestProbabilities {
    /// Sorted by id.
    pub players: Vec<PlayerId>,
    /// Draws in which each player was best. Sums to `n_draws`.
    pub counts: Vec<u64>,
    pub n_draws: u64,
}

impl BestProbabilities {
    pub fn prob(&self, p: &PlayerId) -> Option<f64> {
        let i = self.players.binary_search(p).ok()?;
        Some(self.counts[i] as f64 / self.n_draws as f64)
    }

    pub fn probs(&self) -> Vec<(PlayerId, f64)> {
        self.players
            .iter()
            .zip(&self.counts)
            .map(|(p, &c)| (p.clone(), c as f64 / self.n_draws as f64))
            .collect()
    }

    /// Monte Carlo standard error of a probability estimate `q`.
    pub fn mc_se(&self, q: f64) -> f64 {
        (q * (1.0 - q) / self.n_draws as f64).sqrt()
    }
}

/// Samples the joint Gaussian of the listed players' combined abilities and
/// counts how often each is the largest. Ties go to the smaller id.
pub fn prob_best(belief: &GaussianBelief, players: &[PlayerId], n_draws: u64, seed: u64) -> Result<BestProbabilities> {
    if n_draws == 0 {
        return Err(Error::invalid("prob_best needs at least one draw"));
    }
    if players.is_empty() {
        return Err(Error::EmptyPlayers);
    }
    let mut ids = players.to_vec();
    ids.sort();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePlayer(w[0].clone()));
    }
    let idx = ids.iter().map(|p| belief.index_of(p)).collect::<Result<Vec<_>>>()?;
    let k = idx.len();
    let mean = Array1::from_iter(idx.iter().map(|&i| belief.mean[2 * i] + belief.mean[2 * i + 1]));
    let cov = Array2::from_shape_fn((k, k), |(r, c)| belief.combined_cov(idx[r], idx[c]));
    let l = cholesky(&cov, "combined-ability covariance")?;

    let blocks = n_draws.div_ceil(BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(blk);
            let draws = BLOCK.min(n_draws - blk * BLOCK);
            let mut counts = vec![0u64; k];
            let mut z = vec![0.0; k];
            for _ in 0..draws {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for r in 0..k {
                    let mut x = mean[r];
                    for c in 0..=r {
                        x += l[[r, c]] * z[c];
                    }
                    if x > best_val {
                        best_val = x;
                        best = r;
                    }
                }
                counts[best] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(BestProbabilities {
        players: ids,
        counts,
        n_draws,
    })
}
