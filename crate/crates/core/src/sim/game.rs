use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use super::config::SynthConfig;
use super::league::{GroundTruth, SeasonTruth};
use super::{rng_for, Purpose};
use crate::error::{Error, Result};
use crate::ids::{GameId, PlayerId, TeamId};
use crate::ingest::{BoxScore, Clock, EventKind, GameEvent, GameLog, Interval, PeriodLineup};

/// Clock resolution of generated events.
const TICK_MS: u32 = 100;
/// Ticks per 12-minute quarter.
const TICKS: u32 = 7200;
const PERIODS: u32 = 4;

/// One generated interval with its true lineups.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthInterval {
    pub interval: Interval,
    /// The log makes this interval's lineup unrecoverable.
    pub ambiguous: bool,
}

#[derive(Debug, Clone)]
pub struct SeasonOutput {
    pub label: String,
    pub logs: Vec<GameLog>,
    pub boxscores: Vec<BoxScore>,
    /// Per game, in log order.
    pub intervals: Vec<Vec<TruthInterval>>,
}

impl SeasonOutput {
    pub fn truth_intervals(&self) -> impl Iterator<Item = &TruthInterval> {
        self.intervals.iter().flatten()
    }
}

/// Round-robin rounds by the circle method: `(home, away)` team indices.
/// Each further cycle swaps home and away. With an odd team count one team
/// rests each round.
pub fn schedule(n_teams: usize, games_per_pair: usize, max_rounds: Option<usize>) -> Vec<Vec<(usize, usize)>> {
    let n = n_teams + n_teams % 2;
    let per_cycle = n - 1;
    let total = (games_per_pair * per_cycle).min(max_rounds.unwrap_or(usize::MAX));
    let mut ring: Vec<usize> = (0..n).collect();
    let mut rounds = Vec::with_capacity(total);
    for r in 0..total {
        if r > 0 && r % per_cycle == 0 {
            ring = (0..n).collect();
        }
        let flip = (r / per_cycle) % 2 == 1;
        let mut games = Vec::with_capacity(n / 2);
        for i in 0..n / 2 {
            let (a, b) = (ring[i], ring[n - 1 - i]);
            if a >= n_teams || b >= n_teams {
                continue;
            }
            // Alternate which end of the ring hosts so home games balance.
            let (h, w) = if (i + r % per_cycle) % 2 == 0 { (a, b) } else { (b, a) };
            games.push(if flip { (w, h) } else { (h, w) });
        }
        rounds.push(games);
        ring[1..].rotate_right(1);
    }
    rounds
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

enum Change {
    Sub { home: bool, slot: usize, bench: usize },
    Phantom { home: bool },
}

struct Boundary {
    tick: u32,
    change: Change,
}

/// Draws the periods' possessions and substitutions and renders the game.
#[allow(clippy::too_many_arguments)]
pub fn gen_game(
    cfg: &SynthConfig,
    season: &SeasonTruth,
    season_idx: usize,
    game_idx: usize,
    home: &TeamId,
    away: &TeamId,
    date: NaiveDate,
) -> Result<(GameLog, BoxScore, Vec<TruthInterval>)> {
    let mut rng = rng_for(cfg.seed, Purpose::Game, season_idx, game_idx);
    let roster = |t: &TeamId| {
        season
            .rosters
            .get(t)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("team {t} has no roster")))
    };
    let rosters = [roster(home)?, roster(away)?];
    // Court and bench as index lists into the roster.
    let mut court: [Vec<usize>; 2] = Default::default();
    let mut bench: [Vec<usize>; 2] = Default::default();
    for s in 0..2 {
        let mut idx: Vec<usize> = (0..rosters[s].len()).collect();
        idx.shuffle(&mut rng);
        court[s] = idx[..5].to_vec();
        bench[s] = idx[5..].to_vec();
    }
    let ids = |s: usize, c: &[usize]| -> Vec<PlayerId> {
        let mut v: Vec<PlayerId> = c.iter().map(|&k| rosters[s][k].clone()).collect();
        v.sort();
        v
    };
    let starters = [ids(0, &court[0]), ids(1, &court[1])];

    let per_team = (cfg.possessions_mean + cfg.possessions_sd * normal(&mut rng)).round().max(4.0) as u32;
    let total_poss = 2 * per_team;
    let game_id = GameId::new(format!("{}-{:05}", season.label, game_idx + 1));
    let h = &cfg.hyper;
    let mut events = Vec::new();
    let mut truth = Vec::new();
    let mut period_lineups = Vec::new();
    let mut on_court_ms: BTreeMap<PlayerId, u64> = BTreeMap::new();
    let team_ids = [home.clone(), away.clone()];

    for period in 1..=PERIODS {
        if period > 1 {
            period_lineups.push(PeriodLineup {
                period,
                home: ids(0, &court[0]),
                away: ids(1, &court[1]),
            });
        }
        // Possession starts, alternating sides, evenly spaced.
        let k = (total_poss * period) / PERIODS - (total_poss * (period - 1)) / PERIODS;
        let first = (period % 2) as usize ^ 1;
        let poss: Vec<(u32, usize)> = (0..k)
            .map(|j| ((j * TICKS) / k, (first + j as usize) % 2))
            .collect();

        let boundaries = draw_boundaries(cfg, &mut rng, &bench)?;
        let phantom_at = boundaries
            .iter()
            .find(|b| matches!(b.change, Change::Phantom { .. }))
            .map(|b| b.tick);

        let starts: Vec<u32> = std::iter::once(0).chain(boundaries.iter().map(|b| b.tick)).collect();
        for (seg, &start) in starts.iter().enumerate() {
            let end = starts.get(seg + 1).copied().unwrap_or(TICKS);
            if seg > 0 {
                let b = &boundaries[seg - 1];
                events.push(apply_change(b, &rosters, &team_ids, &mut court, &mut bench, period));
            }
            let seg_poss: Vec<&(u32, usize)> = poss.iter().filter(|(t, _)| *t >= start && *t < end).collect();
            let mut n = [0u32; 2];
            for (_, s) in &seg_poss {
                n[*s] += 1;
            }
            let abil = |s: usize, f: fn(&(f64, f64)) -> f64| -> f64 {
                court[s].iter().map(|&k| f(&season.abilities[&rosters[s][k]])).sum()
            };
            let mut pts = [0u32; 2];
            for s in 0..2 {
                let mean = abil(s, |x| x.0) - abil(1 - s, |x| x.1) + if s == 0 { h.gamma } else { -h.gamma };
                let z = normal(&mut rng);
                if n[s] > 0 {
                    let nf = f64::from(n[s]);
                    pts[s] = (nf * mean / 100.0 + h.sigma * nf.sqrt() / 100.0 * z).round().max(0.0) as u32;
                }
            }
            // Spread each side's points over its possessions in the segment.
            let mut per_poss: Vec<Vec<u8>> = vec![Vec::new(); seg_poss.len()];
            for s in 0..2 {
                let mine: Vec<usize> = (0..seg_poss.len()).filter(|&i| seg_poss[i].1 == s).collect();
                let mut left = pts[s];
                let mut i = 0;
                while left > 0 {
                    let v = if left == 3 || left == 1 { left } else { 2 };
                    per_poss[mine[i % mine.len()]].push(v as u8);
                    left -= v;
                    i += 1;
                }
            }
            for ((tick, s), values) in seg_poss.iter().map(|x| **x).zip(per_poss) {
                let clock = clock_at(tick);
                events.push(GameEvent {
                    period,
                    clock,
                    team: Some(team_ids[s].clone()),
                    kind: EventKind::PossessionStart,
                });
                for v in values {
                    let shooter = rosters[s][court[s][rng.random_range(0..5)]].clone();
                    events.push(GameEvent {
                        period,
                        clock,
                        team: Some(team_ids[s].clone()),
                        kind: EventKind::Points {
                            value: v,
                            player: Some(shooter),
                        },
                    });
                }
            }
            let duration_ms = (end - start) * TICK_MS;
            for s in 0..2 {
                for &k in &court[s] {
                    *on_court_ms.entry(rosters[s][k].clone()).or_default() += u64::from(duration_ms);
                }
            }
            truth.push(TruthInterval {
                interval: Interval {
                    game_id: game_id.clone(),
                    season: season.label.clone(),
                    idx: truth.len() as u32,
                    home_on_court: ids(0, &court[0]),
                    away_on_court: ids(1, &court[1]),
                    duration_ms,
                    n_home_poss: n[0],
                    n_away_poss: n[1],
                    pts_home: pts[0],
                    pts_away: pts[1],
                    exclusion: None,
                },
                ambiguous: phantom_at.is_some_and(|p| start >= p),
            });
        }
        events.push(GameEvent {
            period,
            clock: Clock::ZERO,
            team: None,
            kind: EventKind::PeriodEnd,
        });
    }

    let log = GameLog {
        game_id: game_id.clone(),
        season: season.label.clone(),
        date: date.format("%Y-%m-%d").to_string(),
        home_team: home.clone(),
        away_team: away.clone(),
        home_starters: starters[0].clone(),
        away_starters: starters[1].clone(),
        period_lineups,
        events,
    };
    let boxscore = BoxScore {
        game_id,
        seconds: on_court_ms.into_iter().map(|(p, ms)| (p, ms as f64 / 1000.0)).collect(),
    };
    Ok((log, boxscore, truth))
}

fn clock_at(tick: u32) -> Clock {
    Clock::from_millis((TICKS - tick) * TICK_MS)
}

/// Substitution times for one period at distinct ticks in `1..TICKS`, plus
/// at most one phantom substitution.
///
/// A phantom names two bench players, so the parser loses that side's
/// lineup until the next period header. It is injected with probability
/// `2r` at a uniform time when `r < 1/2`, and otherwise always, uniformly
/// in the first `2(1 − r)` of the period; either way the expected
/// unrecoverable share of the period is `r`.
fn draw_boundaries(cfg: &SynthConfig, rng: &mut ChaCha8Rng, bench: &[Vec<usize>; 2]) -> Result<Vec<Boundary>> {
    let r = cfg.ambiguity_rate;
    let phantom_tick = if r <= 0.0 {
        None
    } else if r < 0.5 {
        rng.random_bool(2.0 * r).then(|| rng.random_range(1..TICKS))
    } else {
        let hi = ((2.0 * (1.0 - r) * f64::from(TICKS)) as u32).clamp(2, TICKS);
        Some(rng.random_range(1..hi))
    };
    let mut out = Vec::new();
    if let Some(t) = phantom_tick {
        out.push(Boundary {
            tick: t,
            change: Change::Phantom {
                home: rng.random_bool(0.5),
            },
        });
    }
    let mut counts = [0usize; 2];
    if cfg.sub_rate > 0.0 {
        let pois = Poisson::new(cfg.sub_rate * 12.0).map_err(|e| Error::invalid(e.to_string()))?;
        for c in counts.iter_mut() {
            *c = pois.sample(rng) as usize;
        }
    }
    let want = (counts[0] + counts[1]).min(TICKS as usize - 2);
    let ticks: Vec<u32> = sample(rng, TICKS as usize - 1, want)
        .into_iter()
        .map(|t| t as u32 + 1)
        .filter(|t| Some(*t) != phantom_tick)
        .collect();
    let mut sides: Vec<bool> = (0..ticks.len()).map(|i| i < counts[0]).collect();
    sides.shuffle(rng);
    for (t, home) in ticks.into_iter().zip(sides) {
        let s = usize::from(!home);
        out.push(Boundary {
            tick: t,
            change: Change::Sub {
                home,
                slot: rng.random_range(0..5),
                bench: rng.random_range(0..bench[s].len()),
            },
        });
    }
    out.sort_by_key(|b| b.tick);
    Ok(out)
}

fn apply_change(
    b: &Boundary,
    rosters: &[Vec<PlayerId>; 2],
    teams: &[TeamId; 2],
    court: &mut [Vec<usize>; 2],
    bench: &mut [Vec<usize>; 2],
    period: u32,
) -> GameEvent {
    let (s, kind) = match b.change {
        Change::Sub { home, slot, bench: k } => {
            let s = usize::from(!home);
            let out = court[s][slot];
            let inn = bench[s][k];
            court[s][slot] = inn;
            bench[s][k] = out;
            (
                s,
                EventKind::Substitution {
                    player_in: rosters[s][inn].clone(),
                    player_out: rosters[s][out].clone(),
                },
            )
        }
        Change::Phantom { home } => {
            let s = usize::from(!home);
            (
                s,
                EventKind::Substitution {
                    player_in: rosters[s][bench[s][0]].clone(),
                    player_out: rosters[s][bench[s][1]].clone(),
                },
            )
        }
    };
    GameEvent {
        period,
        clock: clock_at(b.tick),
        team: Some(teams[s].clone()),
        kind,
    }
}

/// All games of season `t`, generated in parallel with per-game streams.
pub fn gen_season(truth: &GroundTruth, cfg: &SynthConfig, t: usize) -> Result<SeasonOutput> {
    cfg.validate()?;
    let season = truth
        .seasons
        .get(t)
        .ok_or_else(|| Error::invalid(format!("no truth for season index {t}")))?;
    let teams: Vec<TeamId> = season.rosters.keys().cloned().collect();
    let opening = NaiveDate::from_ymd_opt(cfg.first_year + t as i32, 10, 28)
        .ok_or_else(|| Error::invalid("first_year out of range"))?;
    let games: Vec<(usize, usize, usize)> = schedule(teams.len(), cfg.games_per_pair, cfg.max_rounds)
        .into_iter()
        .enumerate()
        .flat_map(|(r, g)| g.into_iter().map(move |(h, a)| (r, h, a)))
        .collect();
    let out = games
        .par_iter()
        .enumerate()
        .map(|(gi, &(round, h, a))| {
            let date = opening + Days::new(round as u64);
            gen_game(cfg, season, t, gi, &teams[h], &teams[a], date)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut res = SeasonOutput {
        label: season.label.clone(),
        logs: Vec::with_capacity(out.len()),
        boxscores: Vec::with_capacity(out.len()),
        intervals: Vec::with_capacity(out.len()),
    };
    for (l, b, i) in out {
        res.logs.push(l);
        res.boxscores.push(b);
        res.intervals.push(i);
    }
    Ok(res)
}
