use serde::Serialize;

use super::transition::{apply_transition, inject_players, TransitionParams};
use crate::error::Result;
use crate::gauss::{update_with_evidence, GaussianBelief, HyperParams};
use crate::ids::PlayerId;
use crate::model::ObservationSet;

/// One season of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonStage {
    pub label: String,
    /// Prior for the season: the transitioned previous posterior plus rookies.
    pub start: GaussianBelief,
    /// Posterior after the season's rows.
    pub end: GaussianBelief,
    /// Players first seen this season. Every player of the first season
    /// counts as a rookie.
    pub rookies: Vec<PlayerId>,
    /// Players with at least one row this season.
    pub active: Vec<PlayerId>,
    /// Indexed players without rows this season.
    pub inactive: Vec<PlayerId>,
    /// Log marginal likelihood of the season's rows under `start`.
    pub loglik: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonChainResult {
    pub hyper: HyperParams,
    pub tp: TransitionParams,
    pub stages: Vec<SeasonStage>,
}

/// Summary of a chain for reports.
#[derive(Debug, Clone, Serialize)]
pub struct StageSummary {
    pub label: String,
    pub players: usize,
    pub rookies: usize,
    pub active: usize,
    pub loglik: f64,
}

impl SeasonChainResult {
    pub fn last(&self) -> Option<&SeasonStage> {
        self.stages.last()
    }

    /// Posterior at the end of the final season.
    pub fn final_belief(&self) -> Option<&GaussianBelief> {
        self.stages.last().map(|s| &s.end)
    }

    pub fn total_loglik(&self) -> f64 {
        self.stages.iter().map(|s| s.loglik).sum()
    }

    pub fn summary(&self) -> Vec<StageSummary> {
        self.stages
            .iter()
            .map(|s| StageSummary {
                label: s.label.clone(),
                players: s.end.n_players(),
                rookies: s.rookies.len(),
                active: s.active.len(),
                loglik: s.loglik,
            })
            .collect()
    }
}

/// Prior for the next season: the previous posterior carried through the
/// transition, with unseen players appended in id order.
pub(crate) fn next_start(
    prev: Option<&GaussianBelief>,
    obs: &ObservationSet,
    hyper: &HyperParams,
    tp: &TransitionParams,
) -> Result<(GaussianBelief, Vec<PlayerId>)> {
    let carried = match prev {
        Some(b) => apply_transition(b, tp, hyper)?,
        None => GaussianBelief::empty(),
    };
    let mut rookies: Vec<PlayerId> = obs
        .players
        .ids()
        .iter()
        .filter(|p| carried.players.get(p).is_none())
        .cloned()
        .collect();
    rookies.sort();
    let start = inject_players(&carried, &rookies, hyper)?;
    Ok((start, rookies))
}

pub(crate) fn run_stage(
    prev: Option<&GaussianBelief>,
    obs: &ObservationSet,
    hyper: &HyperParams,
    tp: &TransitionParams,
) -> Result<SeasonStage> {
    let (start, rookies) = next_start(prev, obs, hyper, tp)?;
    let (end, loglik) = if obs.is_empty() {
        (start.clone(), 0.0)
    } else {
        update_with_evidence(&start, obs, hyper)?
    };
    let active = obs.active_players();
    let inactive = start
        .players
        .ids()
        .iter()
        .filter(|p| active.binary_search(p).is_err())
        .cloned()
        .collect();
    Ok(SeasonStage {
        label: obs.label.clone(),
        start,
        end,
        rookies,
        active,
        inactive,
        loglik,
    })
}

/// Runs the multi-season model over chronologically ordered seasons.
///
/// Players who sit out a season stay in the belief and are carried through
/// the transition unobserved.
pub fn chain_fit(seasons: &[ObservationSet], hyper: &HyperParams, tp: &TransitionParams) -> Result<SeasonChainResult> {
    let empty = SeasonChainResult {
        hyper: *hyper,
        tp: *tp,
        stages: Vec::new(),
    };
    chain_extend(&empty, seasons)
}

/// Continues a chain with further seasons. Extending in pieces gives the
/// same stages as one run over the concatenated list.
pub fn chain_extend(prev: &SeasonChainResult, seasons: &[ObservationSet]) -> Result<SeasonChainResult> {
    prev.hyper.validate()?;
    prev.tp.validate()?;
    let mut out = prev.clone();
    for obs in seasons {
        let stage = run_stage(out.final_belief(), obs, &prev.hyper, &prev.tp).map_err(|e| e.in_season(&obs.label))?;
        out.stages.push(stage);
    }
    Ok(out)
}
