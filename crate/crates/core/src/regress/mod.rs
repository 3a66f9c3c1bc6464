//! Weighted regression of ability estimates on per-40-minute box-score
//! statistics.
//!
//! Each player's estimate `y_i` has known standard error `SE_i`; the fit
//! minimises `Σ (y_i − x_iᵀa)² / SE_i²` with an intercept, and confidence
//! intervals come from the weighted information matrix with no extra scale.

mod report;
mod stats;
mod wls;

pub use report::{fit_report, scatter_points, write_scatter_csv, write_scatter_svg, ScatterPoint};
pub use stats::{
    position_subset_fit, read_stats_csv, regress_abilities, write_stats_csv, AbilityEstimate, PlayerGameStats, Position,
    StatsModel, COVARIATES, DEFENSIVE_CANDIDATES, OFFENSIVE_CANDIDATES,
};
pub use wls::{
    backward_select, predict_ability, r_squared, standardise_fit, wls_fit, Coefficient, RegressionFit, StandardiseMode,
    DEFAULT_ALPHA,
};
