//! Season box-score summaries loosely tied to the true abilities, for
//! exercising the statistics regression end to end.

use rand_distr::{Distribution, StandardNormal};

use super::config::SynthConfig;
use super::league::GroundTruth;
use super::{rng_for, Purpose};
use crate::error::{Error, Result};
use crate::regress::{PlayerGameStats, Position};

/// Per covariate: baseline, loading on standardised α, loading on
/// standardised β, noise SD. Order follows `COVARIATES`.
const MODEL: [(f64, f64, f64, f64); 10] = [
    (45.0, 2.0, 0.0, 2.5),  // FG%
    (75.0, 1.0, 0.0, 5.0),  // FT%
    (33.0, 1.5, 0.0, 4.0),  // 3P%
    (3.0, -0.3, 0.0, 0.5),  // TO/40
    (9.0, 0.0, 1.5, 1.5),  // TRB/40
    (4.0, 1.0, 0.0, 1.0),   // AST/40
    (18.0, 3.5, 0.0, 2.0),  // PTS/40
    (1.5, 0.0, 0.4, 0.3),  // STL/40
    (0.8, 0.0, 0.4, 0.3),  // BLK/40
    (4.0, 0.0, -0.3, 0.6),   // PF/40
];

/// Stats for every rostered player of season `t`. Higher β means a better
/// defender, so steals, blocks and rebounds load positively on it. Percentages are
/// clamped to `[0, 100]` and rates to `≥ 0`.
pub fn gen_player_stats(truth: &GroundTruth, cfg: &SynthConfig, t: usize) -> Result<Vec<PlayerGameStats>> {
    let season = truth
        .seasons
        .get(t)
        .ok_or_else(|| Error::invalid(format!("no truth for season index {t}")))?;
    let h = &cfg.hyper;
    let standardise = |x: f64, mu: f64, sd: f64| if sd > 0.0 { (x - mu) / sd } else { 0.0 };
    season
        .rostered()
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            let mut rng = rng_for(cfg.seed, Purpose::Stats, t, k);
            let (a, b) = season.abilities[&p];
            let za = standardise(a, h.mu_alpha, h.sigma_alpha);
            let zb = standardise(b, h.mu_beta, h.sigma_beta);
            let mut v = [0.0; 10];
            for (j, (base, la, lb, sd)) in MODEL.iter().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                let x = base + la * za + lb * zb + sd * z;
                v[j] = if j < 3 { x.clamp(0.0, 100.0) } else { x.max(0.0) };
            }
            let position = truth.positions.get(&p).copied().unwrap_or(Position::Forward);
            Ok(PlayerGameStats {
                player_id: p,
                position,
                fg_pct: v[0],
                ft_pct: v[1],
                three_pct: v[2],
                to_40: v[3],
                trb_40: v[4],
                ast_40: v[5],
                pts_40: v[6],
                stl_40: v[7],
                blk_40: v[8],
                pf_40: v[9],
            })
        })
        .collect()
}
