//! Bayesian offensive and defensive ability ratings for basketball players.
//!
//! The pipeline runs from canonical play-by-play logs to ratings:
//!
//! 1. [`ingest`] parses JSON-lines event logs, tracks lineups and splits each
//!    game into constant-lineup intervals with per-team possessions and points.
//! 2. [`model`] turns included intervals into weighted regression rows: the
//!    response is points per 100 possessions, the weight is the possession
//!    count, the five attackers enter with `+α`, the five defenders with `-β`
//!    and home advantage with `±γ`.
//! 3. [`gauss`] holds the exact conjugate machinery: Gaussian beliefs over all
//!    abilities, posterior updates, the log marginal likelihood and maximum
//!    likelihood fitting of the prior hyperparameters.
//! 4. [`chain`] carries beliefs between seasons with a shrink-plus-noise
//!    transition and builds the isolated-season fits.
//! 5. [`ratings`] produces centred ratings, dominance probabilities,
//!    best-player odds, lineup matchups and award picks.
//! 6. [`regress`] regresses ability estimates on box-score statistics by
//!    weighted least squares with backward selection.
//! 7. [`sim`] generates synthetic leagues and logs from known abilities.

pub mod chain;
pub mod error;
pub mod gauss;
pub mod ids;
pub mod ingest;
pub mod model;
pub mod normal;
pub mod optim;
pub mod ratings;
pub mod regress;
pub mod sim;

pub use chain::{
    apply_transition, chain_extend, chain_fit, fit_transition_params, inject_players,
    isolated_all, isolated_season_fit, IsolatedContext, SeasonChainResult, SeasonStage,
    TransitionFit, TransitionParams,
};
pub use error::{Error, Result};
pub use gauss::{
    fit_hyperparameters, log_marginal_likelihood, posterior_update, prior_belief, FitOptions,
    GaussianBelief, HyperFit, HyperParams, PlayerMarginal,
};
pub use sim::{simulate, GroundTruth, Simulation, SynthConfig};
pub use regress::{backward_select, predict_ability, r_squared, standardise_fit, wls_fit, RegressionFit};
pub use ids::{GameId, PlayerId, TeamId};
pub use ingest::{
    crosscheck_boxscore, extract_intervals, parse_event_log, BoxScore, ExclusionReason,
    GameEvent, GameLog, Interval, ValidationReport,
};
pub use model::{build_observations, ObservationRow, ObservationSet};
pub use ratings::{
    centred_ratings, lineup_matchup, pairwise_prob, prob_best, select_awards, AwardSlate,
    RatingKind, RatingsTable,
};
