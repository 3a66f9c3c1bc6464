//! Synthetic leagues with known abilities, rendered as canonical event logs
//! and box scores.
//!
//! Every random quantity comes from ChaCha8 seeded with `SynthConfig::seed`
//! and a stream chosen by (purpose, season, game), so output does not
//! depend on generation order or thread count.

mod config;
mod game;
mod league;
mod stats;

pub use config::SynthConfig;
pub use game::{gen_game, gen_season, schedule, SeasonOutput, TruthInterval};
pub use league::{advance_truth, gen_league, transition_abilities, write_truth_csv, GroundTruth, SeasonTruth};
pub use stats::gen_player_stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Everything generated for one configuration.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub truth: GroundTruth,
    pub seasons: Vec<SeasonOutput>,
}

/// Generates `cfg.seasons` seasons of truth, logs and box scores.
pub fn simulate(cfg: &SynthConfig) -> crate::Result<Simulation> {
    cfg.validate()?;
    let mut truth = gen_league(cfg)?;
    for _ in 1..cfg.seasons {
        advance_truth(&mut truth, cfg)?;
    }
    let seasons = (0..cfg.seasons)
        .map(|t| gen_season(&truth, cfg, t))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(Simulation { truth, seasons })
}

#[derive(Clone, Copy)]
enum Purpose {
    League = 1,
    Transition = 2,
    Game = 3,
    Stats = 4,
}

fn rng_for(seed: u64, purpose: Purpose, season: usize, game: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | ((season as u64) << 32) | game as u64);
    rng
}
