//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use hooprate::chain::isolated_all;
use hooprate::gauss::log_marginal_likelihood;
use hooprate::ingest::{parse_event_log, write_event_log, DEFAULT_TOLERANCE_SECS};
use hooprate::model::PlayerIndex;
use hooprate::ratings::{lineup_matchup, pairwise_prob, prob_best};
use hooprate::regress::wls_fit;
use hooprate::sim::{advance_truth, gen_league, gen_season, SeasonOutput};
use hooprate::*;
use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn pid(i: usize) -> PlayerId {
    PlayerId::new(format!("p{i:03}"))
}

// Dense reference linear algebra, independent of the library's solvers.

type Mat = Vec<Vec<f64>>;

fn cholesky(a: &Mat) -> Mat {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                assert!(d > 0.0, "reference Cholesky: matrix not positive definite");
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

fn chol_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    x
}

fn spd_inverse(a: &Mat) -> Mat {
    let l = cholesky(a);
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let e: Vec<f64> = (0..n).map(|i| f64::from(u8::from(i == j))).collect();
            chol_solve(&l, &e)
        })
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

fn to_mat(a: &Array2<f64>) -> Mat {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn big_phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Row design of a toy set: `+1` on attacker α coordinates, `-1` on
/// defender β coordinates, and the home sign.
fn design_rows(obs: &ObservationSet, dim: usize) -> Vec<(Vec<f64>, f64)> {
    obs.rows
        .iter()
        .map(|r| {
            let mut x = vec![0.0; dim];
            for &a in &r.attackers {
                x[2 * a as usize] += 1.0;
            }
            for &d in &r.defenders {
                x[2 * d as usize + 1] -= 1.0;
            }
            (x, r.home_sign())
        })
        .collect()
}

/// Random toy set over `k` players with lineups of size `s`.
fn toy_set(rng: &mut ChaCha8Rng, k: usize, s: usize, rows: usize, label: &str) -> ObservationSet {
    let index = PlayerIndex::new((0..k).map(pid).collect()).unwrap();
    let out = (0..rows)
        .map(|_| {
            let pick = sample(rng, k, 2 * s).into_vec();
            ObservationRow {
                response: 150.0 * rng.random::<f64>(),
                weight: f64::from(rng.random_range(1..12u32)),
                attackers: pick[..s].iter().map(|&i| i as u32).collect(),
                defenders: pick[s..].iter().map(|&i| i as u32).collect(),
                home_attacking: rng.random_bool(0.5),
                season: Arc::from(label),
            }
        })
        .collect();
    ObservationSet::new(label, index, out).unwrap()
}

fn random_belief(rng: &mut ChaCha8Rng, k: usize) -> GaussianBelief {
    let d = 2 * k;
    let a = Array2::from_shape_fn((d, d), |_| normal(rng));
    let cov = a.dot(&a.t()) / d as f64 + Array2::<f64>::eye(d) * 0.5;
    let mean = Array1::from_shape_fn(d, |i| if i % 2 == 0 { 9.8 } else { -9.1 } + 2.0 * normal(rng));
    GaussianBelief::new(PlayerIndex::new((0..k).map(pid).collect()).unwrap(), mean, cov).unwrap()
}

/// Dense conjugate posterior from the normal equations.
fn dense_posterior(prior: &GaussianBelief, obs: &ObservationSet, h: &HyperParams) -> (Vec<f64>, Mat) {
    let d = prior.dim();
    let q = spd_inverse(&to_mat(&prior.cov));
    let m0: Vec<f64> = prior.mean.to_vec();
    let mut prec = q.clone();
    let mut rhs: Vec<f64> = (0..d).map(|i| (0..d).map(|j| q[i][j] * m0[j]).sum()).collect();
    let s2 = h.sigma * h.sigma;
    for ((x, sign), r) in design_rows(obs, d).into_iter().zip(&obs.rows) {
        let w = r.weight / s2;
        let z = r.response - sign * h.gamma;
        for i in 0..d {
            rhs[i] += w * x[i] * z;
            for j in 0..d {
                prec[i][j] += w * x[i] * x[j];
            }
        }
    }
    let l = cholesky(&prec);
    (chol_solve(&l, &rhs), spd_inverse(&prec))
}

fn max_diff_belief(b: &GaussianBelief, mean: &[f64], cov: &Mat) -> f64 {
    let d = b.dim();
    let mut m = 0.0f64;
    for i in 0..d {
        m = m.max((b.mean[i] - mean[i]).abs());
        for j in 0..d {
            m = m.max((b.cov[[i, j]] - cov[i][j]).abs());
        }
    }
    m
}

fn c1_forced_arithmetic() -> Outcome {
    let h = HyperParams::default();
    let hpp = h.home_points_per_possession();
    // 0.9756 has no binary representation; allow the formula's rounding.
    let exact = (hpp - 0.9756).abs() <= 2.0 * f64::EPSILON && (hpp * 1e4).round() == 9756.0;
    let home: Vec<PlayerId> = (0..5).map(pid).collect();
    let away: Vec<PlayerId> = (5..10).map(pid).collect();
    let all: Vec<PlayerId> = (0..10).map(pid).collect();
    let belief = prior_belief(&all, &h).map_err(|e| e.to_string())?;
    let m = lineup_matchup(&belief, &home, &away, h.gamma).map_err(|e| e.to_string())?;
    check(
        exact && m.mean == 2.86,
        format!("home points/possession = {hpp}, equal-lineup matchup = {}", m.mean),
    )
}

fn c2_conjugacy() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut worst_seq) = (0.0f64, 0.0f64);
    for inst in 0..20 {
        let k = rng.random_range(2..=8);
        let s = rng.random_range(1..=k / 2);
        let rows = rng.random_range(1..=60);
        let h = HyperParams {
            gamma: 3.0 * normal(&mut rng),
            sigma: rng.random_range(20.0..120.0),
            ..Default::default()
        };
        let prior = random_belief(&mut rng, k);
        let obs = toy_set(&mut rng, k, s, rows, "toy");
        let post = posterior_update(&prior, &obs, &h).map_err(|e| format!("instance {inst}: {e}"))?;
        let (mean, cov) = dense_posterior(&prior, &obs, &h);
        worst = worst.max(max_diff_belief(&post, &mean, &cov));

        let cut = rng.random_range(0..=rows);
        let a = ObservationSet::new("a", obs.players.clone(), obs.rows[..cut].to_vec()).unwrap();
        let b = ObservationSet::new("b", obs.players.clone(), obs.rows[cut..].to_vec()).unwrap();
        let seq = posterior_update(&posterior_update(&prior, &a, &h).unwrap(), &b, &h).unwrap();
        worst_seq = worst_seq.max(max_diff_belief(&seq, &post.mean.to_vec(), &to_mat(&post.cov)));
    }
    let elapsed = t0.elapsed();
    check(
        worst < 1e-8 && worst_seq < 1e-8 && elapsed < Duration::from_secs(1),
        format!("max |update - dense| = {worst:.2e}, max |batch - sequential| = {worst_seq:.2e}, {elapsed:.2?}"),
    )
}

fn dense_loglik(obs: &ObservationSet, h: &HyperParams) -> f64 {
    let d = 2 * obs.players.len();
    let rows = design_rows(obs, d);
    let n = rows.len();
    let prior_var: Vec<f64> = (0..d)
        .map(|i| if i % 2 == 0 { h.sigma_alpha.powi(2) } else { h.sigma_beta.powi(2) })
        .collect();
    let prior_mean: Vec<f64> = (0..d).map(|i| if i % 2 == 0 { h.mu_alpha } else { h.mu_beta }).collect();
    let mut v = vec![vec![0.0; n]; n];
    let mut resid = vec![0.0; n];
    for a in 0..n {
        let (xa, sa) = &rows[a];
        resid[a] = obs.rows[a].response - (0..d).map(|i| xa[i] * prior_mean[i]).sum::<f64>() - sa * h.gamma;
        for b in 0..n {
            let xb = &rows[b].0;
            v[a][b] = (0..d).map(|i| xa[i] * prior_var[i] * xb[i]).sum();
        }
        v[a][a] += h.sigma * h.sigma / obs.rows[a].weight;
    }
    let l = cholesky(&v);
    let z = chol_solve(&l, &resid);
    let quad: f64 = resid.iter().zip(&z).map(|(r, z)| r * z).sum();
    let logdet: f64 = 2.0 * (0..n).map(|i| l[i][i].ln()).sum::<f64>();
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + logdet + quad)
}

fn c3_marginal_likelihood() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut worst_shift) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let s = rng.random_range(1..=2);
        let rows = rng.random_range(1..=30);
        let obs = toy_set(&mut rng, 4, s, rows, "toy");
        let h = HyperParams {
            mu_alpha: 9.0 + normal(&mut rng),
            mu_beta: -9.0 + normal(&mut rng),
            sigma_alpha: rng.random_range(0.5..4.0),
            sigma_beta: rng.random_range(0.5..4.0),
            gamma: 2.0 * normal(&mut rng),
            sigma: rng.random_range(20.0..120.0),
        };
        let ll = log_marginal_likelihood(&h, &obs).map_err(|e| e.to_string())?;
        worst = worst.max((ll - dense_loglik(&obs, &h)).abs());
        let delta = 5.0 * normal(&mut rng);
        let shifted = HyperParams {
            mu_alpha: h.mu_alpha + delta,
            mu_beta: h.mu_beta + delta,
            ..h
        };
        worst_shift = worst_shift.max((log_marginal_likelihood(&shifted, &obs).unwrap() - ll).abs());
    }
    check(
        worst < 1e-8 && worst_shift < 1e-10,
        format!("max |loglik - dense| = {worst:.2e}, max shift change = {worst_shift:.2e}"),
    )
}

fn season_obs(season: &SeasonOutput) -> ObservationSet {
    let ivs: Vec<Interval> = season.logs.iter().flat_map(extract_intervals).collect();
    build_observations(&ivs, None).unwrap()
}

fn c4_hyper_recovery() -> Outcome {
    let t0 = Instant::now();
    // Long intervals keep integer scoring close to the Gaussian model.
    let cfg = SynthConfig {
        sub_rate: 0.02,
        seed: 4,
        ..Default::default()
    };
    let sim = simulate(&cfg).map_err(|e| e.to_string())?;
    let obs = season_obs(&sim.seasons[0]);
    let init = HyperParams {
        sigma_alpha: 2.0,
        sigma_beta: 2.0,
        gamma: 0.0,
        sigma: 90.0,
        ..Default::default()
    };
    let fit = fit_hyperparameters(&[&obs], &init, &FitOptions::default()).map_err(|e| e.to_string())?;
    let se = fit.std_errors.ok_or("no standard errors")?;
    let (h, t) = (fit.hyper, HyperParams::default());
    let z = [
        (h.mu_alpha - t.mu_alpha) / se.mu_alpha,
        (h.mu_beta - t.mu_beta) / se.mu_beta,
        (h.gamma - t.gamma) / se.gamma,
        (h.sigma - t.sigma) / se.sigma,
    ];
    let rel = [
        (h.sigma_alpha - t.sigma_alpha).abs() / t.sigma_alpha,
        (h.sigma_beta - t.sigma_beta).abs() / t.sigma_beta,
    ];
    let elapsed = t0.elapsed();
    check(
        z.iter().all(|z| z.abs() <= 3.0) && rel.iter().all(|r| *r <= 0.25) && elapsed < Duration::from_secs(600),
        format!(
            "{} rows; z(mu_a, mu_b, gamma, sigma) = ({:.2}, {:.2}, {:.2}, {:.2}); sigma_a {:.3} ({:.1}%), sigma_b {:.3} ({:.1}%); {elapsed:.1?}",
            obs.len(),
            z[0],
            z[1],
            z[2],
            z[3],
            h.sigma_alpha,
            100.0 * rel[0],
            h.sigma_beta,
            100.0 * rel[1]
        ),
    )
}

struct League {
    sim: Simulation,
    obs: Vec<ObservationSet>,
}

fn three_season_league() -> League {
    let cfg = SynthConfig {
        players_per_team: 8,
        games_per_pair: 10,
        max_rounds: None,
        seasons: 3,
        seed: 5,
        ..Default::default()
    };
    let sim = simulate(&cfg).unwrap();
    let obs = sim.seasons.iter().map(season_obs).collect();
    League { sim, obs }
}

fn c5_transition_recovery(league: &League) -> Outcome {
    // Exact formula on hand-built beliefs.
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let h = HyperParams::default();
    let mut bitwise = true;
    for _ in 0..10 {
        let k = rng.random_range(1..6);
        let b = random_belief(&mut rng, k);
        let tp = TransitionParams {
            p: rng.random(),
            s_alpha: rng.random_range(0.0..3.0),
            s_beta: rng.random_range(0.0..3.0),
        };
        let out = apply_transition(&b, &tp, &h).map_err(|e| e.to_string())?;
        for i in 0..b.dim() {
            let (mu, s) = if i % 2 == 0 { (h.mu_alpha, tp.s_alpha) } else { (h.mu_beta, tp.s_beta) };
            bitwise &= out.mean[i] == tp.p * b.mean[i] + (1.0 - tp.p) * mu;
            for j in 0..b.dim() {
                let mut want = tp.p * tp.p * b.cov[[i, j]];
                if i == j {
                    want += s * s;
                }
                bitwise &= out.cov[[i, j]] == want;
            }
        }
    }

    let truth = TransitionParams::default();
    let init = TransitionParams {
        p: 0.5,
        s_alpha: 1.0,
        s_beta: 1.0,
    };
    let fit = fit_transition_params(&league.obs, &h, &init, &FitOptions::default()).map_err(|e| e.to_string())?;
    let se = fit.std_errors.ok_or("no standard errors")?;
    let z = [
        (fit.tp.p - truth.p) / se.p,
        (fit.tp.s_alpha - truth.s_alpha) / se.s_alpha,
        (fit.tp.s_beta - truth.s_beta) / se.s_beta,
    ];
    check(
        bitwise && z.iter().all(|z| z.abs() <= 3.0),
        format!(
            "bitwise transition = {bitwise}; p = {:.3} ± {:.3}, s_a = {:.3} ± {:.3}, s_b = {:.3} ± {:.3}; z = ({:.2}, {:.2}, {:.2})",
            fit.tp.p, se.p, fit.tp.s_alpha, se.s_alpha, fit.tp.s_beta, se.s_beta, z[0], z[1], z[2]
        ),
    )
}

fn c6_ability_recovery(league: &League) -> Outcome {
    let h = HyperParams::default();
    let tp = TransitionParams::default();
    let chain = chain_fit(&league.obs, &h, &tp).map_err(|e| e.to_string())?;
    let last = chain.last().ok_or("empty chain")?;
    let truth = &league.sim.truth.seasons[2].abilities;
    let (mut ea, mut ta, mut eb, mut tb) = (vec![], vec![], vec![], vec![]);
    for p in &last.active {
        let m = last.end.marginal(p).unwrap();
        ea.push(m.alpha_mean);
        eb.push(m.beta_mean);
        ta.push(truth[p].0);
        tb.push(truth[p].1);
    }
    let (ra, rb) = (pearson(&ea, &ta), pearson(&eb, &tb));

    let iso = isolated_all(&league.obs, &h, &tp).map_err(|e| e.to_string())?;
    let final_obs = &league.obs[2];
    let single = posterior_update(&prior_belief(final_obs.players.ids(), &h).unwrap(), final_obs, &h).unwrap();
    let mut violations = 0;
    for m in &iso.marginals {
        let s = single.marginal(&m.player).unwrap();
        let slack = 1e-12 * s.alpha_var.max(s.beta_var);
        if m.alpha_var > s.alpha_var + slack || m.beta_var > s.beta_var + slack {
            violations += 1;
        }
    }
    check(
        ra > 0.9 && rb > 0.75 && violations == 0,
        format!(
            "{} players: r(alpha) = {ra:.3}, r(beta) = {rb:.3}; isolated SE above single-season SE for {violations} of {}",
            ea.len(),
            iso.marginals.len()
        ),
    )
}

/// `P(X_i is the largest)` for independent normals by Simpson's rule.
fn quad_best(means: &[f64], sds: &[f64], i: usize) -> f64 {
    let lo = means.iter().zip(sds).map(|(m, s)| m - 10.0 * s).fold(f64::INFINITY, f64::min);
    let hi = means.iter().zip(sds).map(|(m, s)| m + 10.0 * s).fold(f64::NEG_INFINITY, f64::max);
    let n = 200_000;
    let hstep = (hi - lo) / n as f64;
    let f = |x: f64| {
        let mut v = phi((x - means[i]) / sds[i]) / sds[i];
        for j in 0..means.len() {
            if j != i {
                v *= big_phi((x - means[j]) / sds[j]);
            }
        }
        v
    };
    let mut acc = f(lo) + f(hi);
    for k in 1..n {
        acc += f(lo + k as f64 * hstep) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * hstep / 3.0
}

fn c7_monte_carlo() -> Outcome {
    let cases: [([f64; 3], [f64; 3]); 4] = [
        ([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]),
        ([1.0, 0.5, 0.0], [1.0, 2.0, 0.5]),
        ([3.0, 2.5, -1.0], [0.3, 1.5, 4.0]),
        ([0.2, 0.1, 0.4], [0.05, 0.1, 0.2]),
    ];
    let ids: Vec<PlayerId> = (0..3).map(pid).collect();
    let mut worst_z = 0.0f64;
    for (c, (means, sds)) in cases.iter().enumerate() {
        // Combined = α + β; split each mean and variance evenly.
        let mean = Array1::from_shape_fn(6, |k| means[k / 2] / 2.0);
        let cov = Array2::from_shape_fn((6, 6), |(r, q)| if r == q { sds[r / 2].powi(2) / 2.0 } else { 0.0 });
        let b = GaussianBelief::new(PlayerIndex::new(ids.clone()).unwrap(), mean, cov).unwrap();
        let best = prob_best(&b, &ids, 1_000_000, 70 + c as u64).map_err(|e| e.to_string())?;
        for (i, p) in ids.iter().enumerate() {
            let q = quad_best(means, sds, i);
            let z = (best.prob(p).unwrap() - q) / best.mc_se(q);
            worst_z = worst_z.max(z.abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let b = random_belief(&mut rng, 20);
    let mut exact = 0;
    for _ in 0..100 {
        let pick = sample(&mut rng, 20, 2).into_vec();
        let (a, c) = (pid(pick[0]), pid(pick[1]));
        if pairwise_prob(&b, &a, &c).unwrap() + pairwise_prob(&b, &c, &a).unwrap() == 1.0 {
            exact += 1;
        }
    }
    check(
        worst_z <= 3.0 && exact == 100,
        format!("max |MC - quadrature| = {worst_z:.2} MC SE; complementary pairs exact {exact}/100"),
    )
}

fn c8_parser_round_trip() -> Outcome {
    let cfg = SynthConfig {
        n_teams: 10,
        players_per_team: 10,
        games_per_pair: 3,
        max_rounds: None,
        seed: 8,
        ..Default::default()
    };
    let truth = gen_league(&cfg).map_err(|e| e.to_string())?;
    let season = gen_season(&truth, &cfg, 0).map_err(|e| e.to_string())?;
    let games = &season.logs[..100];
    let mut buf = Vec::new();
    write_event_log(games, &mut buf).map_err(|e| e.to_string())?;
    let parsed = parse_event_log(&buf[..]).map_err(|e| e.to_string())?;
    let mut mismatched = 0;
    let mut flagged = 0;
    let mut n_intervals = 0;
    for (k, g) in parsed.games.iter().enumerate() {
        let got = extract_intervals(g);
        let want: Vec<Interval> = season.intervals[k].iter().map(|t| t.interval.clone()).collect();
        n_intervals += want.len();
        if got != want {
            mismatched += 1;
        }
        if crosscheck_boxscore(&got, &season.boxscores[k], DEFAULT_TOLERANCE_SECS).flagged {
            flagged += 1;
        }
    }

    let amb_cfg = SynthConfig {
        ambiguity_rate: 0.10,
        ..cfg
    };
    let amb_truth = gen_league(&amb_cfg).map_err(|e| e.to_string())?;
    let amb = gen_season(&amb_truth, &amb_cfg, 0).map_err(|e| e.to_string())?;
    let (mut excluded, mut total) = (0u64, 0u64);
    for g in &amb.logs[..100] {
        for iv in extract_intervals(g) {
            total += u64::from(iv.duration_ms);
            if iv.excluded() {
                excluded += u64::from(iv.duration_ms);
            }
        }
    }
    let frac = excluded as f64 / total as f64;
    check(
        parsed.games.len() == 100 && parsed.rejected.is_empty() && mismatched == 0 && flagged == 0 && (0.06..=0.14).contains(&frac),
        format!(
            "{} games, {n_intervals} intervals, {mismatched} mismatched, {flagged} flagged; excluded-time fraction at rate 0.10 = {frac:.4}",
            parsed.games.len()
        ),
    )
}

fn names(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("x{j}")).collect()
}

fn random_design(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, k), |_| normal(rng))
}

/// Weighted normal-equations estimate with intercept, and its SEs.
fn normal_equations(x: &Array2<f64>, y: &[f64], se: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (n, k) = x.dim();
    let p = k + 1;
    let mut a = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    for i in 0..n {
        let w = 1.0 / (se[i] * se[i]);
        let row: Vec<f64> = std::iter::once(1.0).chain(x.row(i).iter().copied()).collect();
        for r in 0..p {
            b[r] += w * row[r] * y[i];
            for c in 0..p {
                a[r][c] += w * row[r] * row[c];
            }
        }
    }
    let inv = spd_inverse(&a);
    let beta: Vec<f64> = (0..p).map(|r| (0..p).map(|c| inv[r][c] * b[c]).sum()).collect();
    (beta, (0..p).map(|r| inv[r][r].sqrt()).collect())
}

fn fit_vector(fit: &RegressionFit) -> (Vec<f64>, Vec<f64>) {
    let mut est = vec![fit.intercept.estimate];
    let mut se = vec![fit.intercept.se];
    for c in &fit.coefficients {
        est.push(c.estimate);
        se.push(c.se);
    }
    (est, se)
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Offensive statistics model with one irrelevant covariate.
const PLANTED: [f64; 10] = [0.6, 0.3, 0.4, -0.5, 0.3, 0.5, 0.8, 0.4, 0.0, -0.3];

fn c9_wls() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut ols_err, mut ne_err) = (0.0f64, 0.0f64);
    let (mut equivariant, mut deterministic) = (0, 0);
    for _ in 0..50 {
        let n = rng.random_range(20..80);
        let k = rng.random_range(1..6);
        let x = random_design(&mut rng, n, k);
        let y: Vec<f64> = (0..n).map(|_| 3.0 * normal(&mut rng)).collect();
        let nm = names(k);

        let c = rng.random_range(0.1..5.0);
        let eq = wls_fit(x.view(), &y, &vec![c; n], &nm).map_err(|e| e.to_string())?;
        let (ols, _) = normal_equations(&x, &y, &vec![1.0; n]);
        ols_err = ols_err.max(max_abs(&fit_vector(&eq).0, &ols));

        let se: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
        let fit = wls_fit(x.view(), &y, &se, &nm).unwrap();
        let (want_b, want_se) = normal_equations(&x, &y, &se);
        let (got_b, got_se) = fit_vector(&fit);
        ne_err = ne_err.max(max_abs(&got_b, &want_b)).max(max_abs(&got_se, &want_se));

        let j = rng.random_range(0..k);
        let scale = rng.random_range(0.1..10.0);
        let mut xs = x.clone();
        xs.column_mut(j).mapv_inplace(|v| v * scale);
        let scaled = wls_fit(xs.view(), &y, &se, &nm).unwrap();
        let ok = (0..k).all(|i| {
            let want = fit.coefficients[i].estimate / if i == j { scale } else { 1.0 };
            (scaled.coefficients[i].estimate - want).abs() <= 1e-9 * (1.0 + want.abs())
                && (scaled.coefficients[i].p_value - fit.coefficients[i].p_value).abs() <= 1e-9
        }) && (scaled.intercept.estimate - fit.intercept.estimate).abs() <= 1e-9 * (1.0 + fit.intercept.estimate.abs());
        equivariant += usize::from(ok);

        let mut yb = y.clone();
        for (i, v) in yb.iter_mut().enumerate() {
            *v += 0.8 * x[[i, 0]];
        }
        let a = backward_select(x.view(), &yb, &se, &nm, 0.05).unwrap();
        let b = backward_select(x.view(), &yb, &se, &nm, 0.05).unwrap();
        let mut perm: Vec<usize> = (0..k).collect();
        perm.reverse();
        let xp = Array2::from_shape_fn((n, k), |(r, c)| x[[r, perm[c]]]);
        let np: Vec<String> = perm.iter().map(|&c| nm[c].clone()).collect();
        let p = backward_select(xp.view(), &yb, &se, &np, 0.05).unwrap();
        let set = |f: &RegressionFit| f.selected().into_iter().map(String::from).collect::<BTreeSet<_>>();
        deterministic += usize::from(a == b && set(&a) == set(&p));
    }

    let names10 = names(10);
    let support: BTreeSet<String> = PLANTED
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| names10[j].clone())
        .collect();
    let (mut exact, mut contains) = (0, 0);
    for _ in 0..100 {
        let n = 300;
        let x = random_design(&mut rng, n, 10);
        let se: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 1.0 + (0..10).map(|j| PLANTED[j] * x[[i, j]]).sum::<f64>() + se[i] * normal(&mut rng))
            .collect();
        let fit = backward_select(x.view(), &y, &se, &names10, 0.05).map_err(|e| e.to_string())?;
        let sel: BTreeSet<String> = fit.selected().into_iter().map(String::from).collect();
        exact += usize::from(sel == support);
        contains += usize::from(sel.is_superset(&support));
    }
    check(
        ols_err < 1e-10 && ne_err < 1e-8 && equivariant == 50 && deterministic == 50 && exact >= 90,
        format!(
            "OLS diff {ols_err:.1e}, normal-equations diff {ne_err:.1e}, equivariant {equivariant}/50, deterministic {deterministic}/50, planted support recovered {exact}/100 (all planted kept {contains}/100)"
        ),
    )
}

/// Few players, so a +3 SD defender is rarely beaten on truth alone; large
/// rosters and many games for sharp individual estimates.
fn award_config(seed: u64, seasons: usize) -> SynthConfig {
    SynthConfig {
        n_teams: 3,
        players_per_team: 8,
        games_per_pair: 1000,
        max_rounds: None,
        seasons,
        seed,
        ..Default::default()
    }
}

fn c10_awards() -> Outcome {
    let h = HyperParams::default();
    let tp = TransitionParams::default();
    let mut mip_hits = 0;
    let mip_runs = 10;
    for seed in 0..mip_runs {
        let cfg = award_config(1000 + seed, 2);
        let mut truth = gen_league(&cfg).map_err(|e| e.to_string())?;
        advance_truth(&mut truth, &cfg).map_err(|e| e.to_string())?;
        let returning: Vec<PlayerId> = truth.seasons[1]
            .rostered()
            .into_iter()
            .filter(|p| truth.seasons[0].rostered().contains(p))
            .collect();
        let jumper = returning[seed as usize % returning.len()].clone();
        let (a0, b0) = truth.seasons[0].abilities[&jumper];
        truth.seasons[1].abilities.insert(jumper.clone(), (a0 + 5.0, b0));
        let obs: Vec<ObservationSet> = (0..2).map(|t| season_obs(&gen_season(&truth, &cfg, t).unwrap())).collect();
        let chain = chain_fit(&obs, &h, &tp).map_err(|e| e.to_string())?;
        let iso = isolated_all(&obs, &h, &tp).unwrap();
        let slate = select_awards(&chain, &iso.marginals, None).map_err(|e| e.to_string())?;
        mip_hits += usize::from(slate.mip.as_ref().is_some_and(|a| a.player == jumper));
    }

    let mut dpoy_hits = 0;
    let dpoy_runs = 40;
    for seed in 0..dpoy_runs {
        let cfg = award_config(2000 + seed, 1);
        let mut truth = gen_league(&cfg).map_err(|e| e.to_string())?;
        let planted = truth.seasons[0].rostered()[seed as usize % 24].clone();
        truth.seasons[0].abilities.get_mut(&planted).unwrap().1 = h.mu_beta + 3.0 * h.sigma_beta;
        let obs = vec![season_obs(&gen_season(&truth, &cfg, 0).unwrap())];
        let chain = chain_fit(&obs, &h, &tp).map_err(|e| e.to_string())?;
        let iso = isolated_all(&obs, &h, &tp).unwrap();
        let slate = select_awards(&chain, &iso.marginals, None).map_err(|e| e.to_string())?;
        dpoy_hits += usize::from(slate.dpoy.player == planted);
    }
    check(
        mip_hits == mip_runs as usize && dpoy_hits as f64 >= 0.95 * dpoy_runs as f64,
        format!("MIP picked the jumped player in {mip_hits}/{mip_runs} leagues; planted defender won DPOY in {dpoy_hits}/{dpoy_runs} seeds"),
    )
}

fn run(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let (tag, detail) = match &res {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {n:2} {tag}  {name}: {detail} [{:.1?}]", t0.elapsed());
    res.is_ok()
}

fn main() {
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let want = |n: usize| filter.is_none_or(|f| f == n);
    let mut results = BTreeMap::new();
    let mut go = |n: usize, name: &str, f: &dyn Fn() -> Outcome| {
        if want(n) {
            results.insert(n, run(n, name, f));
        }
    };
    go(1, "forced arithmetic", &c1_forced_arithmetic);
    go(2, "conjugacy oracle", &c2_conjugacy);
    go(3, "marginal-likelihood oracle", &c3_marginal_likelihood);
    go(4, "hyperparameter recovery", &c4_hyper_recovery);
    if want(5) || want(6) {
        let league = three_season_league();
        go(5, "transition recovery", &|| c5_transition_recovery(&league));
        go(6, "ability recovery", &|| c6_ability_recovery(&league));
    }
    go(7, "Monte Carlo vs quadrature", &c7_monte_carlo);
    go(8, "parser round trip", &c8_parser_round_trip);
    go(9, "WLS suite", &c9_wls);
    go(10, "award logic", &c10_awards);
    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !**ok).map(|(n, _)| *n).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({failed:?})") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
