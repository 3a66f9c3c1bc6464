//! Subcommand bodies. Each reads its inputs through [`Run::input`] and writes
//! every artifact through [`Run::output`], then records the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use hooprate::chain::IsolatedContext;
use hooprate::gauss::{read_belief, write_belief, BELIEF_FORMAT, BELIEF_VERSION};
use hooprate::ingest::{
    read_boxscores, read_intervals, write_boxscores, write_event_log, write_intervals, DEFAULT_TOLERANCE_SECS,
};
use hooprate::ratings::{read_ratings_csv, ModelTag, RatingKind, RatingsTable};
use hooprate::regress::{
    fit_report, position_subset_fit, read_stats_csv, regress_abilities, write_scatter_csv, write_scatter_svg,
    write_stats_csv, AbilityEstimate, Position, StatsModel,
};
use hooprate::sim::{gen_player_stats, write_truth_csv};
use hooprate::{
    build_observations, chain_fit, crosscheck_boxscore, extract_intervals, fit_hyperparameters,
    fit_transition_params, pairwise_prob, parse_event_log, posterior_update, prior_belief, prob_best, select_awards,
    simulate, FitOptions, GaussianBelief, HyperParams, Interval, ObservationSet, PlayerId, SeasonChainResult,
    TransitionParams,
};
use serde::Serialize;

use crate::config::{ParamSpec, RunConfig};
use crate::output::{sha256_hex, Run};
use crate::{Cli, Command, Inputs, ModelArg};

const INTERVALS_FORMAT: &str = "intervals-csv/1";
const RATINGS_FORMAT: &str = "ratings-csv/1";
const DEFAULT_DRAWS: u64 = 100_000;
const REPORT_ROWS: usize = 20;

/// Resolved configuration plus the manifest for one invocation.
struct Ctx {
    cfg: RunConfig,
    run: Run,
}

pub fn run(cli: Cli, args: Vec<String>) -> Result<()> {
    let mut cfg = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let g = &cli.global;
    if g.seed.is_some() {
        cfg.seed = g.seed;
    }
    if g.seasons.is_some() {
        cfg.seasons.clone_from(&g.seasons);
    }
    if let Some(m) = g.model {
        cfg.model = Some(
            match m {
                ModelArg::Multi => "multi",
                ModelArg::Single => "single",
                ModelArg::Isolated => "isolated",
            }
            .into(),
        );
    }
    if g.out.is_some() {
        cfg.out.clone_from(&g.out);
    }
    if let Some(t) = g.tolerance {
        if !(t.is_finite() && t >= 0.0) {
            bail!("--tolerance must be a non-negative number, got {t}");
        }
        cfg.tolerance = Some(t);
    }
    match &cli.command {
        Command::Ingest(i)
        | Command::Validate(i)
        | Command::FitHyper(i)
        | Command::FitTransition(i)
        | Command::Awards(i)
        | Command::Rate { inputs: i, .. } => apply_inputs(&mut cfg, i),
        Command::Compare { belief, .. } => {
            if belief.is_some() {
                cfg.belief.clone_from(belief);
            }
        }
        Command::RegressStats { stats, ratings } => {
            if stats.is_some() {
                cfg.stats.clone_from(stats);
            }
            if ratings.is_some() {
                cfg.ratings.clone_from(ratings);
            }
        }
        Command::Simulate => {}
    }
    cfg.model()?;

    let config_sha = sha256_hex(&serde_json::to_vec(&cfg)?);
    let run = Run::new(cfg.out_dir(), cli.command.name(), args, config_sha, cfg.seed);
    let mut ctx = Ctx { cfg, run };
    match cli.command {
        Command::Simulate => simulate_cmd(&mut ctx)?,
        Command::Ingest(_) => ingest_cmd(&mut ctx)?,
        Command::Validate(_) => validate_cmd(&mut ctx)?,
        Command::FitHyper(_) => fit_hyper_cmd(&mut ctx)?,
        Command::FitTransition(_) => fit_transition_cmd(&mut ctx)?,
        Command::Rate { all_models, .. } => rate_cmd(&mut ctx, all_models)?,
        Command::Compare { a, b, .. } => compare_cmd(&mut ctx, &a, &b)?,
        Command::Awards(_) => awards_cmd(&mut ctx)?,
        Command::RegressStats { .. } => regress_cmd(&mut ctx)?,
    }
    ctx.run.finish()
}

fn apply_inputs(cfg: &mut RunConfig, i: &Inputs) {
    for (dst, src) in [
        (&mut cfg.logs, &i.logs),
        (&mut cfg.boxscores, &i.boxscores),
        (&mut cfg.intervals, &i.intervals),
    ] {
        if src.is_some() {
            dst.clone_from(src);
        }
    }
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

impl Ctx {
    fn out_file(&self, name: &str) -> PathBuf {
        self.cfg.out_dir().join(name)
    }

    fn model(&self) -> ModelTag {
        self.cfg.model().expect("validated in run")
    }

    fn intervals(&mut self) -> Result<Vec<Interval>> {
        let path = self.cfg.input(self.cfg.intervals.as_ref(), "intervals", Some(self.out_file("intervals.csv")))?;
        let bytes = self.run.input(&path)?;
        self.run.format("intervals", INTERVALS_FORMAT);
        read_intervals(&bytes[..]).with_context(|| format!("reading {}", path.display()))
    }

    /// One observation set per season, in `--seasons` order or sorted by
    /// label.
    fn season_sets(&mut self) -> Result<Vec<ObservationSet>> {
        let ivs = self.intervals()?;
        let present: BTreeSet<&str> = ivs.iter().map(|iv| iv.season.as_str()).collect();
        let labels: Vec<String> = match &self.cfg.seasons {
            Some(s) => {
                if let Some(missing) = s.iter().find(|l| !present.contains(l.as_str())) {
                    bail!("season {missing} has no intervals");
                }
                s.clone()
            }
            None => present.iter().map(|s| s.to_string()).collect(),
        };
        let sets = labels
            .iter()
            .map(|l| build_observations(&ivs, Some(std::slice::from_ref(l))).with_context(|| format!("season {l}")))
            .collect::<Result<Vec<_>>>()?;
        if sets.iter().all(|s| s.rows.is_empty()) {
            return Err(hooprate::Error::NoObservations.into());
        }
        Ok(sets)
    }

    fn hyper(&mut self, sets: &[ObservationSet]) -> Result<HyperParams> {
        match &self.cfg.hyper {
            None => Ok(HyperParams::default()),
            Some(ParamSpec::Values(h)) => {
                h.validate()?;
                Ok(*h)
            }
            Some(ParamSpec::Fit(_)) => {
                let refs: Vec<&ObservationSet> = sets.iter().collect();
                let fit = fit_hyperparameters(&refs, &HyperParams::default(), &FitOptions::default())?;
                log::info!("fitted hyperparameters: {:?}", fit.hyper);
                Ok(fit.hyper)
            }
        }
    }

    fn transition(&mut self, sets: &[ObservationSet], hyper: &HyperParams) -> Result<TransitionParams> {
        match &self.cfg.transition {
            None => Ok(TransitionParams::default()),
            Some(ParamSpec::Values(t)) => {
                t.validate()?;
                Ok(*t)
            }
            Some(ParamSpec::Fit(_)) => {
                let fit = fit_transition_params(sets, hyper, &TransitionParams::default(), &FitOptions::default())?;
                log::info!("fitted transition parameters: {:?}", fit.tp);
                Ok(fit.tp)
            }
        }
    }

    fn chain(&mut self, sets: &[ObservationSet]) -> Result<SeasonChainResult> {
        let hyper = self.hyper(sets)?;
        let tp = if sets.len() > 1 {
            self.transition(sets, &hyper)?
        } else {
            TransitionParams::default()
        };
        Ok(chain_fit(sets, &hyper, &tp)?)
    }
}

fn simulate_cmd(ctx: &mut Ctx) -> Result<()> {
    let mut synth = ctx.cfg.synth.clone().unwrap_or_default();
    if let Some(s) = ctx.cfg.seed {
        synth.seed = s;
    }
    let sim = simulate(&synth)?;
    let logs: Vec<_> = sim.seasons.iter().flat_map(|s| s.logs.iter().cloned()).collect();
    let boxes: Vec<_> = sim.seasons.iter().flat_map(|s| s.boxscores.iter()).collect();
    let truth_ivs: Vec<Interval> = sim
        .seasons
        .iter()
        .flat_map(|s| s.truth_intervals().map(|t| t.interval.clone()))
        .collect();
    let last = synth.seasons - 1;
    let stats = gen_player_stats(&sim.truth, &synth, last)?;

    let mut buf = Vec::new();
    write_event_log(&logs, &mut buf)?;
    ctx.run.output("events.jsonl", &buf)?;
    let mut buf = Vec::new();
    write_boxscores(boxes, &mut buf)?;
    ctx.run.output("boxscores.csv", &buf)?;
    let mut buf = Vec::new();
    write_truth_csv(&sim.truth, &mut buf)?;
    ctx.run.output("truth.csv", &buf)?;
    let mut buf = Vec::new();
    write_stats_csv(&mut buf, &stats)?;
    ctx.run.output("stats.csv", &buf)?;
    let mut buf = Vec::new();
    write_intervals(&truth_ivs, &mut buf)?;
    ctx.run.output("intervals_truth.csv", &buf)?;
    ctx.run.format("intervals", INTERVALS_FORMAT);

    println!(
        "simulated {} season(s), {} games, {} players in the final season (seed {})",
        synth.seasons,
        logs.len(),
        stats.len(),
        synth.seed
    );
    Ok(())
}

#[derive(Serialize)]
struct IngestSummary {
    games: usize,
    rejected: Vec<(String, String)>,
    intervals: usize,
    excluded_intervals: usize,
    total_secs: f64,
    excluded_secs: f64,
    excluded_fraction: f64,
    exclusions_by_reason: BTreeMap<String, usize>,
}

fn ingest_cmd(ctx: &mut Ctx) -> Result<()> {
    let path = ctx.cfg.input(ctx.cfg.logs.as_ref(), "logs", Some(ctx.out_file("events.jsonl")))?;
    let bytes = ctx.run.input(&path)?;
    let parsed = parse_event_log(&bytes[..]).with_context(|| format!("reading {}", path.display()))?;
    for r in &parsed.rejected {
        log::warn!("rejected game {}: {}", r.game_id, r.reason);
    }
    let ivs: Vec<Interval> = parsed.games.iter().flat_map(extract_intervals).collect();
    let mut by_reason = BTreeMap::new();
    let (mut total, mut excluded) = (0.0, 0.0);
    for iv in &ivs {
        total += iv.duration_secs();
        if let Some(r) = iv.exclusion {
            excluded += iv.duration_secs();
            *by_reason.entry(r.code().to_string()).or_insert(0) += 1;
        }
    }
    let summary = IngestSummary {
        games: parsed.games.len(),
        rejected: parsed.rejected.iter().map(|r| (r.game_id.to_string(), r.reason.clone())).collect(),
        intervals: ivs.len(),
        excluded_intervals: by_reason.values().sum(),
        total_secs: total,
        excluded_secs: excluded,
        excluded_fraction: if total > 0.0 { excluded / total } else { 0.0 },
        exclusions_by_reason: by_reason,
    };
    let mut buf = Vec::new();
    write_intervals(&ivs, &mut buf)?;
    ctx.run.output("intervals.csv", &buf)?;
    ctx.run.output("ingest_summary.json", &json_bytes(&summary)?)?;
    ctx.run.format("intervals", INTERVALS_FORMAT);
    println!(
        "{} games ({} rejected), {} intervals, excluded time {:.2}%",
        summary.games,
        summary.rejected.len(),
        summary.intervals,
        100.0 * summary.excluded_fraction
    );
    Ok(())
}

fn validate_cmd(ctx: &mut Ctx) -> Result<()> {
    let ivs = ctx.intervals()?;
    let path = ctx.cfg.input(ctx.cfg.boxscores.as_ref(), "boxscores", Some(ctx.out_file("boxscores.csv")))?;
    let bytes = ctx.run.input(&path)?;
    let boxes = read_boxscores(&bytes[..]).with_context(|| format!("reading {}", path.display()))?;
    let tol = ctx.cfg.tolerance.unwrap_or(DEFAULT_TOLERANCE_SECS);

    let mut by_game: BTreeMap<&str, Vec<Interval>> = BTreeMap::new();
    for iv in &ivs {
        by_game.entry(iv.game_id.as_str()).or_default().push(iv.clone());
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "game_id", "complete", "flagged", "excluded_fraction", "mismatches", "max_abs_diff_s",
    ])?;
    let (mut checked, mut flagged, mut incomplete) = (0, 0, 0);
    for (gid, bs) in &boxes {
        let Some(g) = by_game.get(gid.as_str()) else {
            log::warn!("box score for game {gid} has no intervals");
            continue;
        };
        let rep = crosscheck_boxscore(g, bs, tol);
        checked += 1;
        flagged += usize::from(rep.flagged);
        incomplete += usize::from(!rep.complete);
        let max_diff = rep.mismatches.iter().map(|m| m.abs_diff).fold(0.0, f64::max);
        w.write_record([
            gid.to_string(),
            rep.complete.to_string(),
            rep.flagged.to_string(),
            rep.excluded_fraction.to_string(),
            rep.mismatches.len().to_string(),
            max_diff.to_string(),
        ])?;
    }
    let buf = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    ctx.run.output("validation.csv", &buf)?;
    println!("{checked} games checked, {flagged} flagged, {incomplete} incomplete (tolerance {tol} s)");
    Ok(())
}

#[derive(Serialize)]
struct HyperFile {
    hyper: HyperParams,
}

#[derive(Serialize)]
struct TransitionFile {
    transition: TransitionParams,
}

fn fit_hyper_cmd(ctx: &mut Ctx) -> Result<()> {
    let sets = ctx.season_sets()?;
    let init = match &ctx.cfg.hyper {
        Some(ParamSpec::Values(h)) => *h,
        _ => HyperParams::default(),
    };
    let refs: Vec<&ObservationSet> = sets.iter().collect();
    let fit = fit_hyperparameters(&refs, &init, &FitOptions::default())?;
    ctx.run.output("hyper.toml", toml::to_string(&HyperFile { hyper: fit.hyper })?.as_bytes())?;
    ctx.run.output("hyper_fit.json", &json_bytes(&fit)?)?;
    let h = &fit.hyper;
    println!(
        "mu_alpha {:.3}  sigma_alpha {:.3}  mu_beta {:.3}  sigma_beta {:.3}  gamma {:.3}  sigma {:.3}  loglik {:.3}",
        h.mu_alpha, h.sigma_alpha, h.mu_beta, h.sigma_beta, h.gamma, h.sigma, fit.loglik
    );
    Ok(())
}

fn fit_transition_cmd(ctx: &mut Ctx) -> Result<()> {
    let sets = ctx.season_sets()?;
    let hyper = ctx.hyper(&sets)?;
    let init = match &ctx.cfg.transition {
        Some(ParamSpec::Values(t)) => *t,
        _ => TransitionParams::default(),
    };
    let fit = fit_transition_params(&sets, &hyper, &init, &FitOptions::default())?;
    if !fit.converged {
        log::warn!("transition fit stopped at the iteration limit");
    }
    ctx.run.output(
        "transition.toml",
        toml::to_string(&TransitionFile { transition: fit.tp })?.as_bytes(),
    )?;
    ctx.run.output("transition_fit.json", &json_bytes(&fit)?)?;
    println!(
        "p {:.4}  s_alpha {:.4}  s_beta {:.4}  loglik {:.3}",
        fit.tp.p, fit.tp.s_alpha, fit.tp.s_beta, fit.loglik
    );
    Ok(())
}

/// Ratings and, for the models that have one, the joint belief.
struct ModelFit {
    table: RatingsTable,
    belief: Option<GaussianBelief>,
}

fn fit_model(model: ModelTag, chain: &SeasonChainResult, last_set: &ObservationSet) -> Result<ModelFit> {
    let last = chain.last().ok_or(hooprate::Error::NoObservations)?;
    let (marginals, belief) = match model {
        ModelTag::Multi => (last.end.select(&last.active)?.marginals(), Some(last.end.clone())),
        ModelTag::Single => {
            let prior = prior_belief(last_set.players.ids(), &chain.hyper)?;
            let post = posterior_update(&prior, last_set, &chain.hyper)?;
            (post.select(&last.active)?.marginals(), Some(post))
        }
        ModelTag::Isolated => (IsolatedContext::new(chain)?.all_marginals()?, None),
    };
    Ok(ModelFit {
        table: RatingsTable::from_marginals(&marginals, model)?,
        belief,
    })
}

fn write_model(ctx: &mut Ctx, fit: &ModelFit, draws: u64, seed: u64) -> Result<()> {
    let tag = fit.table.model;
    let mut buf = Vec::new();
    fit.table.write_csv(&mut buf, &BTreeMap::new())?;
    ctx.run.output(&format!("ratings_{tag}.csv"), &buf)?;
    ctx.run.format("ratings", RATINGS_FORMAT);
    if let Some(b) = &fit.belief {
        let mut buf = Vec::new();
        write_belief(b, &mut buf)?;
        ctx.run.output(&format!("belief_{tag}.json"), &buf)?;
        ctx.run.format("belief", &format!("{BELIEF_FORMAT}/{BELIEF_VERSION}"));

        let top: Vec<PlayerId> = fit
            .table
            .ranked(RatingKind::Combined)
            .into_iter()
            .take(10)
            .map(|r| r.player.clone())
            .collect();
        let best = prob_best(b, &top, draws, seed)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["player_id", "prob_best", "mc_se"])?;
        for p in &top {
            let q = best.prob(p).expect("player was sampled");
            w.write_record([p.to_string(), q.to_string(), best.mc_se(q).to_string()])?;
        }
        let buf = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        ctx.run.output(&format!("best_{tag}.csv"), &buf)?;
    }
    Ok(())
}

/// Three model columns side by side, top players by multi-season rank.
fn side_by_side(fits: &[ModelFit]) -> String {
    let mut out = String::new();
    for kind in RatingKind::ALL {
        let _ = writeln!(out, "{kind:?} ratings, centred, mean (se)");
        let _ = write!(out, "{:<16}", "player");
        for f in fits {
            let _ = write!(out, " {:>18}", f.table.model.to_string());
        }
        out.push('\n');
        for r in fits[0].table.ranked(kind).into_iter().take(REPORT_ROWS) {
            let _ = write!(out, "{:<16}", r.player.as_str());
            for f in fits {
                let cell = match f.table.get(&r.player) {
                    Some(x) => {
                        let (m, s) = match kind {
                            RatingKind::Offense => (x.off_mean, x.off_se),
                            RatingKind::Defense => (x.def_mean, x.def_se),
                            RatingKind::Combined => (x.comb_mean, x.comb_se),
                        };
                        format!("{m:.2} ({s:.2})")
                    }
                    None => "-".to_string(),
                };
                let _ = write!(out, " {cell:>18}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

fn rate_cmd(ctx: &mut Ctx, all_models: bool) -> Result<()> {
    let sets = ctx.season_sets()?;
    let chain = ctx.chain(&sets)?;
    let last_set = sets.last().expect("season_sets is non-empty");
    let draws = ctx.cfg.draws.unwrap_or(DEFAULT_DRAWS);
    let seed = ctx.cfg.seed.unwrap_or(0);
    let models = if all_models {
        vec![ModelTag::Multi, ModelTag::Single, ModelTag::Isolated]
    } else {
        vec![ctx.model()]
    };
    let fits = models
        .iter()
        .map(|&m| fit_model(m, &chain, last_set))
        .collect::<Result<Vec<_>>>()?;
    for f in &fits {
        write_model(ctx, f, draws, seed)?;
    }
    let mut buf = Vec::new();
    serde_json::to_writer_pretty(&mut buf, &chain.summary())?;
    buf.push(b'\n');
    ctx.run.output("chain_summary.json", &buf)?;
    if all_models {
        let report = side_by_side(&fits);
        ctx.run.output("ratings_report.txt", report.as_bytes())?;
        print!("{report}");
    } else {
        print!("{}", fits[0].table.report(RatingKind::Combined, REPORT_ROWS));
    }
    Ok(())
}

fn compare_cmd(ctx: &mut Ctx, a: &str, b: &str) -> Result<()> {
    let model = ctx.model();
    if model == ModelTag::Isolated && ctx.cfg.belief.is_none() {
        bail!("the isolated model has no joint belief; use --model multi or single, or pass --belief");
    }
    let fallback = ctx.out_file(&format!("belief_{model}.json"));
    let path = ctx.cfg.input(ctx.cfg.belief.as_ref(), "belief", Some(fallback))?;
    let bytes = ctx.run.input(&path)?;
    let belief = read_belief(&bytes[..]).with_context(|| format!("reading {}", path.display()))?;
    let p = pairwise_prob(&belief, &PlayerId::from(a), &PlayerId::from(b))?;
    println!("P({a} > {b}) = {p}");
    Ok(())
}

fn awards_cmd(ctx: &mut Ctx) -> Result<()> {
    let sets = ctx.season_sets()?;
    let chain = ctx.chain(&sets)?;
    let iso = IsolatedContext::new(&chain)?.all_marginals()?;
    let slate = select_awards(&chain, &iso, None)?;
    let report = slate.report();
    ctx.run.output("awards.json", &json_bytes(&slate)?)?;
    ctx.run.output("awards.txt", report.as_bytes())?;
    print!("{report}");
    Ok(())
}

#[derive(Serialize)]
struct RegressionOutput {
    ratings_model: ModelTag,
    fits: BTreeMap<String, hooprate::RegressionFit>,
    skipped: Vec<String>,
}

fn regress_cmd(ctx: &mut Ctx) -> Result<()> {
    let model = ctx.model();
    let stats_path = ctx.cfg.input(ctx.cfg.stats.as_ref(), "stats", Some(ctx.out_file("stats.csv")))?;
    let ratings_path = ctx.cfg.input(
        ctx.cfg.ratings.as_ref(),
        "ratings",
        Some(ctx.out_file(&format!("ratings_{model}.csv"))),
    )?;
    let stats = read_stats_csv(&ctx.run.input(&stats_path)?[..]).with_context(|| format!("reading {}", stats_path.display()))?;
    let (tag, rows) =
        read_ratings_csv(&ctx.run.input(&ratings_path)?[..]).with_context(|| format!("reading {}", ratings_path.display()))?;
    ctx.run.format("ratings", RATINGS_FORMAT);

    let off: Vec<AbilityEstimate> = rows
        .iter()
        .map(|r| AbilityEstimate { player: r.player.clone(), mean: r.off_mean, se: r.off_se })
        .collect();
    let def: Vec<AbilityEstimate> = rows
        .iter()
        .map(|r| AbilityEstimate { player: r.player.clone(), mean: r.def_mean, se: r.def_se })
        .collect();

    let mut report = String::new();
    let mut out = RegressionOutput {
        ratings_model: tag,
        fits: BTreeMap::new(),
        skipped: Vec::new(),
    };
    for (side, ab, sm) in [("offense", &off, StatsModel::offensive()), ("defense", &def, StatsModel::defensive())] {
        let fit = regress_abilities(&stats, ab, &sm).with_context(|| format!("{side} regression"))?;
        let title = format!("{side}, all players");
        report.push_str(&fit_report(&fit, &title));
        report.push('\n');
        let mut buf = Vec::new();
        write_scatter_csv(&mut buf, &fit)?;
        ctx.run.output(&format!("scatter_{side}.csv"), &buf)?;
        let mut buf = Vec::new();
        write_scatter_svg(&mut buf, &fit, &title)?;
        ctx.run.output(&format!("scatter_{side}.svg"), &buf)?;
        out.fits.insert(side.to_string(), fit);

        for pos in [Position::Guard, Position::Forward] {
            let key = format!("{side}_{pos}");
            match position_subset_fit(&stats, ab, pos, &sm) {
                Ok(fit) => {
                    report.push_str(&fit_report(&fit, &format!("{side}, {pos}s")));
                    report.push('\n');
                    out.fits.insert(key, fit);
                }
                Err(e @ hooprate::Error::SubsetTooSmall { .. }) => {
                    let _ = writeln!(report, "{side}, {pos}s: skipped ({e})\n");
                    out.skipped.push(format!("{key}: {e}"));
                }
                Err(e) => return Err(e).with_context(|| format!("{side} regression on {pos}s")),
            }
        }
    }
    ctx.run.output("regression_report.txt", report.as_bytes())?;
    ctx.run.output("regression.json", &json_bytes(&out)?)?;
    print!("{report}");
    Ok(())
}
