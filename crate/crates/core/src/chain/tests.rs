use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::*;
use crate::gauss::{posterior_update, prior_belief, GaussianBelief, HyperParams};
use crate::ids::PlayerId;
use crate::model::{ObservationRow, ObservationSet, PlayerIndex};

fn pid(i: usize) -> PlayerId {
    PlayerId::new(format!("p{i:02}"))
}

/// One season of 5-on-5 rows drawn from `truth` over the players `pool`.
fn season(rng: &mut ChaCha8Rng, label: &str, pool: &[usize], truth: &[(f64, f64)], rows: usize, h: &HyperParams) -> ObservationSet {
    let ids: Vec<PlayerId> = pool.iter().map(|&i| pid(i)).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    let index = PlayerIndex::new(sorted).unwrap();
    let out = (0..rows)
        .map(|_| {
            let pick = sample(rng, pool.len(), 10).into_vec();
            let att: Vec<usize> = pick[..5].iter().map(|&k| pool[k]).collect();
            let def: Vec<usize> = pick[5..].iter().map(|&k| pool[k]).collect();
            let home = rng.random_bool(0.5);
            let n = rng.random_range(3..15) as f64;
            let mean = att.iter().map(|&i| truth[i].0).sum::<f64>() - def.iter().map(|&i| truth[i].1).sum::<f64>()
                + if home { h.gamma } else { -h.gamma };
            let z: f64 = StandardNormal.sample(rng);
            ObservationRow {
                response: (mean + h.sigma / n.sqrt() * z).max(0.0),
                weight: n,
                attackers: att.iter().map(|&i| index.get(&pid(i)).unwrap() as u32).collect(),
                defenders: def.iter().map(|&i| index.get(&pid(i)).unwrap() as u32).collect(),
                home_attacking: home,
                season: Arc::from(label),
            }
        })
        .collect();
    ObservationSet::new(label, index, out).unwrap()
}

fn toy_league(seed: u64) -> Vec<ObservationSet> {
    let h = HyperParams {
        sigma: 60.0,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<(f64, f64)> = (0..18)
        .map(|_| (9.8 + 2.5 * rng.random::<f64>(), -9.1 + 1.8 * rng.random::<f64>()))
        .collect();
    // Players 14..18 only arrive in the last season; 0..2 sit it out.
    let early: Vec<usize> = (0..14).collect();
    let late: Vec<usize> = (2..18).collect();
    vec![
        season(&mut rng, "s1", &early, &truth, 80, &h),
        season(&mut rng, "s2", &early, &truth, 80, &h),
        season(&mut rng, "s3", &late, &truth, 80, &h),
    ]
}

fn max_abs_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn single_season_chain_is_plain_update() {
    let h = HyperParams::default();
    let seasons = toy_league(1);
    let chain = chain_fit(&seasons[..1], &h, &TransitionParams::default()).unwrap();
    let prior = prior_belief(seasons[0].players.ids(), &h).unwrap();
    let direct = posterior_update(&prior, &seasons[0], &h).unwrap();
    assert_eq!(chain.stages[0].start, prior);
    assert_eq!(chain.stages[0].end, direct);
    assert_eq!(chain.stages[0].rookies.len(), 14);
}

#[test]
fn empty_season_keeps_transitioned_posterior() {
    let h = HyperParams::default();
    let tp = TransitionParams::default();
    let seasons = toy_league(2);
    let empty = ObservationSet::empty("gap");
    let chain = chain_fit(&[seasons[0].clone(), empty], &h, &tp).unwrap();
    let want = apply_transition(&chain.stages[0].end, &tp, &h).unwrap();
    assert_eq!(chain.stages[1].end, want);
    assert_eq!(chain.stages[1].loglik, 0.0);
}

#[test]
fn extending_matches_one_run() {
    let h = HyperParams::default();
    let tp = TransitionParams::default();
    let seasons = toy_league(3);
    let whole = chain_fit(&seasons, &h, &tp).unwrap();
    let part = chain_fit(&seasons[..1], &h, &tp).unwrap();
    let rest = chain_extend(&part, &seasons[1..]).unwrap();
    for (a, b) in whole.stages.iter().zip(&rest.stages) {
        assert!(max_abs_diff(&a.end.mean, &b.end.mean) < 1e-10);
        assert!(max_abs_diff(&a.end.cov, &b.end.cov) < 1e-10);
        assert_eq!(a.end.players, b.end.players);
    }
}

#[test]
fn absent_players_are_carried_and_rookies_injected() {
    let h = HyperParams::default();
    let tp = TransitionParams::default();
    let chain = chain_fit(&toy_league(4), &h, &tp).unwrap();
    let last = chain.last().unwrap();
    assert_eq!(last.rookies, (14..18).map(pid).collect::<Vec<_>>());
    assert_eq!(last.inactive, vec![pid(0), pid(1)]);
    assert_eq!(last.end.n_players(), 18);
    // Absent players' variance grows through the transition.
    let before = chain.stages[1].end.marginal(&pid(0)).unwrap();
    let after = last.end.marginal(&pid(0)).unwrap();
    assert!(after.alpha_var > tp.p * tp.p * before.alpha_var);
}

#[test]
fn season_errors_carry_context() {
    let h = HyperParams {
        sigma: -1.0,
        ..Default::default()
    };
    assert!(chain_fit(&toy_league(5), &h, &TransitionParams::default()).is_err());
    let tp = TransitionParams {
        p: 1.5,
        ..Default::default()
    };
    assert!(chain_fit(&toy_league(5), &HyperParams::default(), &tp).is_err());
}

#[test]
fn isolated_matches_dense_reset_and_refit() {
    let h = HyperParams::default();
    let tp = TransitionParams::default();
    let seasons = toy_league(6);
    let chain = chain_fit(&seasons, &h, &tp).unwrap();
    let last = chain.last().unwrap();
    let ctx = IsolatedContext::new(&chain).unwrap();
    for p in &last.active {
        let reset = isolated_prior(&last.start, p, &h).unwrap();
        let dense = posterior_update(&reset, &seasons[2], &h).unwrap();
        let fast = ctx.belief(p).unwrap();
        assert!(max_abs_diff(&fast.mean, &dense.mean) < 1e-8, "{p}");
        assert!(max_abs_diff(&fast.cov, &dense.cov) < 1e-8, "{p}");
        let m = ctx.marginal(p).unwrap();
        assert_eq!(m, fast.marginal(p).unwrap());
    }
}

#[test]
fn isolated_reset_prior_is_exactly_the_population_prior() {
    let h = HyperParams::default();
    let chain = chain_fit(&toy_league(7), &h, &TransitionParams::default()).unwrap();
    let last = chain.last().unwrap();
    let p = pid(5);
    let reset = isolated_prior(&last.start, &p, &h).unwrap();
    let i = reset.index_of(&p).unwrap();
    assert_eq!(reset.mean[2 * i], h.mu_alpha);
    assert_eq!(reset.mean[2 * i + 1], h.mu_beta);
    assert_eq!(reset.cov[[2 * i, 2 * i]], h.sigma_alpha * h.sigma_alpha);
    for k in [2 * i, 2 * i + 1] {
        let nonzero = (0..reset.dim()).filter(|&j| j != k && reset.cov[[k, j]] != 0.0).count();
        assert_eq!(nonzero, 0);
    }
}

#[test]
fn rookie_focal_equals_chain() {
    let h = HyperParams::default();
    let tp = TransitionParams::default();
    let seasons = toy_league(8);
    let chain = chain_fit(&seasons, &h, &tp).unwrap();
    let iso = isolated_season_fit(&seasons, &pid(15), &h, &tp).unwrap();
    assert_eq!(iso, chain.last().unwrap().end);
}

#[test]
fn single_season_isolated_equals_plain_model() {
    let h = HyperParams::default();
    let tp = TransitionParams::default();
    let seasons = toy_league(9);
    let iso = isolated_all(&seasons[..1], &h, &tp).unwrap();
    let prior = prior_belief(seasons[0].players.ids(), &h).unwrap();
    let plain = posterior_update(&prior, &seasons[0], &h).unwrap();
    for m in &iso.marginals {
        assert_eq!(*m, plain.marginal(&m.player).unwrap());
    }
}

#[test]
fn isolated_all_equals_per_player_fits() {
    let h = HyperParams::default();
    let tp = TransitionParams::default();
    let seasons = toy_league(10);
    let all = isolated_all(&seasons, &h, &tp).unwrap();
    assert_eq!(all.marginals.len(), 16);
    for m in all.marginals.iter().step_by(5) {
        let single = isolated_season_fit(&seasons, &m.player, &h, &tp).unwrap();
        assert_eq!(*m, single.marginal(&m.player).unwrap());
    }
}

#[test]
fn isolated_rejects_absent_focal() {
    let h = HyperParams::default();
    let r = isolated_season_fit(&toy_league(11), &pid(0), &h, &TransitionParams::default());
    assert!(r.is_err());
}

#[test]
fn isolated_se_not_above_single_season_se() {
    let h = HyperParams::default();
    let tp = TransitionParams::default();
    let seasons = toy_league(12);
    let iso = isolated_all(&seasons, &h, &tp).unwrap();
    let prior = prior_belief(seasons[2].players.ids(), &h).unwrap();
    let single = posterior_update(&prior, &seasons[2], &h).unwrap();
    for m in &iso.marginals {
        let s = single.marginal(&m.player).unwrap();
        assert!(m.alpha_var <= s.alpha_var + 1e-10);
        assert!(m.beta_var <= s.beta_var + 1e-10);
    }
}

#[test]
fn transition_fit_needs_two_seasons() {
    let seasons = toy_league(13);
    let r = fit_transition_params(&seasons[..1], &HyperParams::default(), &TransitionParams::default(), &Default::default());
    assert!(r.is_err());
}

#[test]
fn transition_fit_runs_and_reports() {
    let h = HyperParams {
        sigma: 60.0,
        ..Default::default()
    };
    let seasons = toy_league(14);
    let fit = fit_transition_params(&seasons, &h, &TransitionParams::default(), &Default::default()).unwrap();
    assert!(fit.tp.validate().is_ok());
    let chain = chain_fit(&seasons, &h, &fit.tp).unwrap();
    assert!((chain.total_loglik() - fit.loglik).abs() < 1e-6);
}

#[test]
fn empty_prior_belief_can_seed_chain() {
    let b = GaussianBelief::empty();
    assert_eq!(b.dim(), 0);
}
