use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::SynthConfig;
use super::{rng_for, Purpose};
use crate::chain::TransitionParams;
use crate::error::Result;
use crate::gauss::HyperParams;
use crate::ids::{PlayerId, TeamId};
use crate::regress::Position;

/// True abilities and rosters for one season.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonTruth {
    pub label: String,
    /// `(α, β)` for every player generated so far, rostered or not.
    pub abilities: BTreeMap<PlayerId, (f64, f64)>,
    /// Team rosters, in roster-slot order.
    pub rosters: BTreeMap<TeamId, Vec<PlayerId>>,
    /// Players created for this season.
    pub rookies: Vec<PlayerId>,
}

impl SeasonTruth {
    /// Rostered players, sorted by id.
    pub fn rostered(&self) -> Vec<PlayerId> {
        let mut v: Vec<PlayerId> = self.rosters.values().flatten().cloned().collect();
        v.sort();
        v
    }
}

/// Known abilities of a synthetic league across seasons.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub seasons: Vec<SeasonTruth>,
    pub positions: BTreeMap<PlayerId, Position>,
    next_player: usize,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn slot_position(slot: usize) -> Position {
    match slot % 5 {
        0 | 1 => Position::Guard,
        2 | 3 => Position::Forward,
        _ => Position::Center,
    }
}

impl GroundTruth {
    fn new_player(&mut self, rng: &mut ChaCha8Rng, hyper: &HyperParams, pos: Position) -> (PlayerId, (f64, f64)) {
        self.next_player += 1;
        let id = PlayerId::new(format!("P{:05}", self.next_player));
        self.positions.insert(id.clone(), pos);
        let a = hyper.mu_alpha + hyper.sigma_alpha * normal(rng);
        let b = hyper.mu_beta + hyper.sigma_beta * normal(rng);
        (id, (a, b))
    }

    pub fn last(&self) -> &SeasonTruth {
        self.seasons.last().expect("a league has at least one season")
    }
}

/// Draws the first season: `players_per_team` players per team with
/// `α ~ N(μ_α, σ_α²)` and `β ~ N(μ_β, σ_β²)`.
pub fn gen_league(cfg: &SynthConfig) -> Result<GroundTruth> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, Purpose::League, 0, 0);
    let mut truth = GroundTruth {
        seasons: Vec::new(),
        positions: BTreeMap::new(),
        next_player: 0,
    };
    let mut abilities = BTreeMap::new();
    let mut rosters = BTreeMap::new();
    for t in 0..cfg.n_teams {
        let team = TeamId::new(format!("T{:02}", t + 1));
        let mut roster = Vec::with_capacity(cfg.players_per_team);
        for slot in 0..cfg.players_per_team {
            let (id, ab) = truth.new_player(&mut rng, &cfg.hyper, slot_position(slot));
            abilities.insert(id.clone(), ab);
            roster.push(id);
        }
        rosters.insert(team, roster);
    }
    let rookies = abilities.keys().cloned().collect();
    truth.seasons.push(SeasonTruth {
        label: cfg.season_label(0),
        abilities,
        rosters,
        rookies,
    });
    Ok(truth)
}

/// `α' = p α + (1 − p) μ_α + s_α ε` and likewise for `β`, in id order.
pub fn transition_abilities(
    abilities: &mut BTreeMap<PlayerId, (f64, f64)>,
    tp: &TransitionParams,
    hyper: &HyperParams,
    rng: &mut ChaCha8Rng,
) {
    for (a, b) in abilities.values_mut() {
        let (ea, eb) = (normal(rng), normal(rng));
        *a = tp.p * *a + (1.0 - tp.p) * hyper.mu_alpha + tp.s_alpha * ea;
        *b = tp.p * *b + (1.0 - tp.p) * hyper.mu_beta + tp.s_beta * eb;
    }
}

/// Appends the next season: every generated player's abilities move through
/// the transition, then departures are refilled by rookies or by earlier
/// departures.
pub fn advance_truth(truth: &mut GroundTruth, cfg: &SynthConfig) -> Result<()> {
    cfg.validate()?;
    let t = truth.seasons.len();
    let mut rng = rng_for(cfg.seed, Purpose::Transition, t, 0);
    let prev = truth.last().clone();
    let mut abilities = prev.abilities.clone();
    transition_abilities(&mut abilities, &cfg.tp, &cfg.hyper, &mut rng);

    let rostered: BTreeSet<PlayerId> = prev.rostered().into_iter().collect();
    let mut pool: Vec<PlayerId> = abilities.keys().filter(|p| !rostered.contains(*p)).cloned().collect();
    let mut rookies = Vec::new();
    let mut rosters = prev.rosters.clone();
    for roster in rosters.values_mut() {
        for slot in roster.iter_mut() {
            if !rng.random_bool(cfg.departure_rate) {
                continue;
            }
            let leaving = slot.clone();
            let use_rookie = pool.is_empty() || rng.random_bool(cfg.rookie_fraction);
            *slot = if use_rookie {
                let pos = truth.positions[&leaving];
                let (id, ab) = truth.new_player(&mut rng, &cfg.hyper, pos);
                abilities.insert(id.clone(), ab);
                rookies.push(id.clone());
                id
            } else {
                let k = rng.random_range(0..pool.len());
                pool.swap_remove(k)
            };
        }
    }
    truth.seasons.push(SeasonTruth {
        label: cfg.season_label(t),
        abilities,
        rosters,
        rookies,
    });
    Ok(())
}

/// CSV with columns `season, player_id, alpha_true, beta_true`, one row per
/// generated player per season.
pub fn write_truth_csv<W: Write>(truth: &GroundTruth, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["season", "player_id", "alpha_true", "beta_true"])?;
    for s in &truth.seasons {
        for (p, (a, b)) in &s.abilities {
            w.write_record([s.label.as_str(), p.as_str(), &a.to_string(), &b.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
