use serde::{Deserialize, Serialize};

use crate::chain::TransitionParams;
use crate::error::{Error, Result};
use crate::gauss::HyperParams;

/// Synthetic league settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_teams: usize,
    pub players_per_team: usize,
    /// Complete round robins per season.
    pub games_per_pair: usize,
    /// Optional cap on schedule rounds; each team plays once per round.
    pub max_rounds: Option<usize>,
    pub seasons: usize,
    /// Calendar year of the first season; labels read `2007-08`.
    pub first_year: i32,
    /// Mean possessions per team per game.
    pub possessions_mean: f64,
    /// Standard deviation of possessions per team per game.
    pub possessions_sd: f64,
    /// Substitutions per team per minute.
    pub sub_rate: f64,
    /// Expected fraction of game time whose lineup cannot be recovered from
    /// the log.
    pub ambiguity_rate: f64,
    /// Chance that a rostered player leaves before the next season.
    pub departure_rate: f64,
    /// Share of departures replaced by rookies; the rest are filled from
    /// earlier departures when any are available.
    pub rookie_fraction: f64,
    pub hyper: HyperParams,
    pub tp: TransitionParams,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_teams: 30,
            players_per_team: 12,
            games_per_pair: 3,
            max_rounds: Some(82),
            seasons: 1,
            first_year: 2007,
            possessions_mean: 100.0,
            possessions_sd: 5.0,
            sub_rate: 0.25,
            ambiguity_rate: 0.0,
            departure_rate: 0.1,
            rookie_fraction: 0.75,
            hyper: HyperParams::default(),
            tp: TransitionParams::default(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Checks counts and rates. Prior and noise scales may be zero here.
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_teams", self.n_teams),
            ("players_per_team", self.players_per_team),
            ("games_per_pair", self.games_per_pair),
            ("seasons", self.seasons),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        if self.n_teams < 2 {
            return Err(Error::invalid("n_teams must be at least 2"));
        }
        if self.players_per_team < 5 {
            return Err(Error::invalid("players_per_team must be at least 5"));
        }
        if self.max_rounds == Some(0) {
            return Err(Error::invalid("max_rounds must be at least 1"));
        }
        let rates = [
            ("possessions_mean", self.possessions_mean),
            ("possessions_sd", self.possessions_sd),
            ("sub_rate", self.sub_rate),
            ("departure_rate", self.departure_rate),
            ("rookie_fraction", self.rookie_fraction),
        ];
        for (name, v) in rates {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and non-negative")));
            }
        }
        if self.departure_rate > 1.0 || self.rookie_fraction > 1.0 {
            return Err(Error::invalid("departure_rate and rookie_fraction must not exceed 1"));
        }
        if !(0.0..1.0).contains(&self.ambiguity_rate) {
            return Err(Error::invalid("ambiguity_rate must lie in [0, 1)"));
        }
        if self.sub_rate > 0.0 && self.players_per_team < 6 {
            return Err(Error::invalid("substitutions need at least 6 players per team"));
        }
        if self.ambiguity_rate > 0.0 && self.players_per_team < 7 {
            return Err(Error::invalid("ambiguity injection needs at least 7 players per team"));
        }
        let h = &self.hyper;
        let scales = [h.sigma_alpha, h.sigma_beta, h.sigma, self.tp.s_alpha, self.tp.s_beta];
        if scales.iter().any(|v| !(v.is_finite() && *v >= 0.0))
            || ![h.mu_alpha, h.mu_beta, h.gamma].iter().all(|v| v.is_finite())
        {
            return Err(Error::invalid("hyperparameters must be finite with non-negative scales"));
        }
        if !(0.0..=1.0).contains(&self.tp.p) {
            return Err(Error::invalid("transition p must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn season_label(&self, t: usize) -> String {
        let y = self.first_year + t as i32;
        format!("{y}-{:02}", (y + 1).rem_euclid(100))
    }
}
