//! Multi-season chaining of beliefs and the isolated-season construction.

mod estimate;
mod isolated;
mod run;
mod transition;

pub use estimate::{fit_joint, fit_transition_params, EstimationOrder, TransitionFit, TransitionStdErrors};
pub use isolated::{isolated_all, isolated_prior, isolated_season_fit, IsolatedContext, IsolatedResult};
pub use run::{chain_extend, chain_fit, SeasonChainResult, SeasonStage, StageSummary};
pub use transition::{apply_transition, inject_players, marginalize, TransitionParams};

#[cfg(test)]
mod tests;
