use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::PlayerId;
use crate::model::PlayerIndex;

/// Prior hyperparameters and fixed model constants, on the points per 100
/// possessions scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    pub mu_alpha: f64,
    pub sigma_alpha: f64,
    pub mu_beta: f64,
    pub sigma_beta: f64,
    pub gamma: f64,
    pub sigma: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            mu_alpha: 9.82,
            sigma_alpha: 2.55,
            mu_beta: -9.12,
            sigma_beta: 1.82,
            gamma: 1.43,
            sigma: 106.8,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mu_alpha,
            self.sigma_alpha,
            self.mu_beta,
            self.sigma_beta,
            self.gamma,
            self.sigma,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("hyperparameters must be finite"));
        }
        if self.sigma_alpha <= 0.0 || self.sigma_beta <= 0.0 || self.sigma <= 0.0 {
            return Err(Error::invalid("sigma_alpha, sigma_beta and sigma must be positive"));
        }
        Ok(())
    }

    /// Expected points on one home possession between prior-average lineups.
    pub fn home_points_per_possession(&self) -> f64 {
        (5.0 * self.mu_alpha - 5.0 * self.mu_beta + 2.0 * self.gamma) / 100.0
    }

    /// Prior mean and variance of coordinate `k` in the interleaved layout.
    pub(crate) fn coord_prior(&self, k: usize) -> (f64, f64) {
        if k % 2 == 0 {
            (self.mu_alpha, self.sigma_alpha * self.sigma_alpha)
        } else {
            (self.mu_beta, self.sigma_beta * self.sigma_beta)
        }
    }
}

/// Posterior summary for one player.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerMarginal {
    pub player: PlayerId,
    pub alpha_mean: f64,
    pub alpha_var: f64,
    pub beta_mean: f64,
    pub beta_var: f64,
    pub cov_alpha_beta: f64,
}

impl PlayerMarginal {
    pub fn alpha_se(&self) -> f64 {
        self.alpha_var.max(0.0).sqrt()
    }

    pub fn beta_se(&self) -> f64 {
        self.beta_var.max(0.0).sqrt()
    }

    pub fn combined_mean(&self) -> f64 {
        self.alpha_mean + self.beta_mean
    }

    pub fn combined_var(&self) -> f64 {
        self.alpha_var + self.beta_var + 2.0 * self.cov_alpha_beta
    }

    pub fn combined_se(&self) -> f64 {
        self.combined_var().max(0.0).sqrt()
    }
}

/// Joint normal belief over every player's `(α, β)`.
///
/// Player `i` of the index owns coordinates `2i` (offense) and `2i + 1`
/// (defense).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    pub players: PlayerIndex,
    pub mean: Array1<f64>,
    pub cov: Array2<f64>,
}

impl GaussianBelief {
    pub fn new(players: PlayerIndex, mean: Array1<f64>, cov: Array2<f64>) -> Result<Self> {
        let d = 2 * players.len();
        if mean.len() != d || cov.dim() != (d, d) {
            return Err(Error::invalid(format!(
                "belief over {} players needs dimension {d}",
                players.len()
            )));
        }
        Ok(GaussianBelief { players, mean, cov })
    }

    pub fn empty() -> Self {
        GaussianBelief {
            players: PlayerIndex::default(),
            mean: Array1::zeros(0),
            cov: Array2::zeros((0, 0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn index_of(&self, p: &PlayerId) -> Result<usize> {
        self.players.get(p).ok_or_else(|| Error::UnknownPlayer(p.clone()))
    }

    pub fn marginal_at(&self, i: usize) -> PlayerMarginal {
        let (a, b) = (2 * i, 2 * i + 1);
        PlayerMarginal {
            player: self.players.id(i).clone(),
            alpha_mean: self.mean[a],
            alpha_var: self.cov[[a, a]],
            beta_mean: self.mean[b],
            beta_var: self.cov[[b, b]],
            cov_alpha_beta: self.cov[[a, b]],
        }
    }

    pub fn marginal(&self, p: &PlayerId) -> Result<PlayerMarginal> {
        Ok(self.marginal_at(self.index_of(p)?))
    }

    pub fn marginals(&self) -> Vec<PlayerMarginal> {
        (0..self.n_players()).map(|i| self.marginal_at(i)).collect()
    }

    /// Covariance between the combined abilities of players `i` and `j`.
    pub fn combined_cov(&self, i: usize, j: usize) -> f64 {
        let c = &self.cov;
        c[[2 * i, 2 * j]] + c[[2 * i, 2 * j + 1]] + c[[2 * i + 1, 2 * j]] + c[[2 * i + 1, 2 * j + 1]]
    }

    /// Marginal belief over the listed players, in the given order.
    pub fn select(&self, players: &[PlayerId]) -> Result<GaussianBelief> {
        let idx = players
            .iter()
            .map(|p| self.index_of(p))
            .collect::<Result<Vec<_>>>()?;
        let coords: Vec<usize> = idx.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
        let d = coords.len();
        let mean = Array1::from_iter(coords.iter().map(|&k| self.mean[k]));
        let cov = Array2::from_shape_fn((d, d), |(r, c)| self.cov[[coords[r], coords[c]]]);
        GaussianBelief::new(PlayerIndex::new(players.to_vec())?, mean, cov)
    }

    /// Largest asymmetry `|Σ_ij − Σ_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let c = &self.cov;
        let mut worst = 0.0f64;
        for i in 0..c.nrows() {
            for j in 0..i {
                worst = worst.max((c[[i, j]] - c[[j, i]]).abs());
            }
        }
        worst
    }
}

/// Independent prior over `players`: each offense coordinate is
/// `N(μ_α, σ_α²)`, each defense coordinate `N(μ_β, σ_β²)`.
pub fn prior_belief(players: &[PlayerId], hyper: &HyperParams) -> Result<GaussianBelief> {
    if players.is_empty() {
        return Err(Error::EmptyPlayers);
    }
    hyper.validate()?;
    let index = PlayerIndex::new(players.to_vec())?;
    let d = 2 * players.len();
    let mut mean = Array1::zeros(d);
    let mut cov = Array2::zeros((d, d));
    for k in 0..d {
        let (m, v) = hyper.coord_prior(k);
        mean[k] = m;
        cov[[k, k]] = v;
    }
    GaussianBelief::new(index, mean, cov)
}
