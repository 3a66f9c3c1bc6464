use std::fmt::Write as _;

use serde::Serialize;

use crate::chain::SeasonChainResult;
use crate::error::{Error, Result};
use crate::gauss::{GaussianBelief, PlayerMarginal};
use crate::ids::PlayerId;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Award {
    pub player: PlayerId,
    /// Uncentred posterior mean of the rated quantity.
    pub estimate: f64,
    pub se: f64,
    /// Most-improved only: change in combined mean since the previous season.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AwardSlate {
    pub mvp: Award,
    pub dpoy: Award,
    /// Absent when the final season has no rookies.
    pub rookie: Option<Award>,
    /// Absent when no returning player has a previous-season estimate.
    pub mip: Option<Award>,
    pub notices: Vec<String>,
}

/// Index of the largest score; ties go to the smaller id.
fn argmax<'a, T>(items: impl IntoIterator<Item = (&'a PlayerId, T, f64)>) -> Option<(&'a PlayerId, T)> {
    let mut best: Option<(&PlayerId, T, f64)> = None;
    for (p, t, s) in items {
        let better = match &best {
            None => true,
            Some((bp, _, bs)) => s > *bs || (s == *bs && p < *bp),
        };
        if better {
            best = Some((p, t, s));
        }
    }
    best.map(|(p, t, _)| (p, t))
}

fn combined(b: &GaussianBelief, i: usize) -> (f64, f64) {
    (b.mean[2 * i] + b.mean[2 * i + 1], b.combined_cov(i, i).max(0.0).sqrt())
}

/// Picks the season's awards.
///
/// * MVP: largest isolated-model combined mean.
/// * DPOY: largest isolated-model defensive mean.
/// * ROY: largest multi-season combined mean among final-season rookies.
/// * MIP: largest increase in combined mean between the previous season's
///   chain posterior and this one, over returning players active this season.
///
/// `previous` is the chain fitted on seasons up to the one before; when
/// `None` the penultimate stage of `chain` is used, which is identical for
/// the same parameters. A one-season chain has no rookies and no MIP.
pub fn select_awards(
    chain: &SeasonChainResult,
    isolated: &[PlayerMarginal],
    previous: Option<&SeasonChainResult>,
) -> Result<AwardSlate> {
    let last = chain.last().ok_or(Error::NoObservations)?;
    let mut notices = Vec::new();

    let (mvp_player, mvp) =
        argmax(isolated.iter().map(|m| (&m.player, m, m.combined_mean()))).ok_or(Error::EmptyPlayers)?;
    let mvp = Award {
        player: mvp_player.clone(),
        estimate: mvp.combined_mean(),
        se: mvp.combined_se(),
        delta: None,
    };
    let (dp_player, dp) = argmax(isolated.iter().map(|m| (&m.player, m, m.beta_mean))).ok_or(Error::EmptyPlayers)?;
    let dpoy = Award {
        player: dp_player.clone(),
        estimate: dp.beta_mean,
        se: dp.beta_se(),
        delta: None,
    };

    let end = &last.end;
    let prev_end = match previous {
        Some(p) => p.final_belief(),
        None if chain.stages.len() >= 2 => Some(&chain.stages[chain.stages.len() - 2].end),
        None => None,
    };

    let rookie = if prev_end.is_none() {
        notices.push("single season: rookies undefined, rookie award omitted".to_string());
        None
    } else {
        let pick = argmax(last.rookies.iter().map(|p| {
            let i = end.players.get(p).expect("rookies are indexed");
            let c = combined(end, i);
            (p, c, c.0)
        }));
        if pick.is_none() {
            notices.push("no rookies in the final season, rookie award omitted".to_string());
        }
        pick.map(|(p, (estimate, se))| Award {
            player: p.clone(),
            estimate,
            se,
            delta: None,
        })
    };

    let mip = prev_end.and_then(|prev| {
        let pick = argmax(last.active.iter().filter_map(|p| {
            let j = prev.players.get(p)?;
            if last.rookies.binary_search(p).is_ok() {
                return None;
            }
            let i = end.players.get(p)?;
            let now = combined(end, i);
            let delta = now.0 - combined(prev, j).0;
            Some((p, (now, delta), delta))
        }));
        pick.map(|(p, ((estimate, se), delta))| Award {
            player: p.clone(),
            estimate,
            se,
            delta: Some(delta),
        })
    });
    if prev_end.is_some() && mip.is_none() {
        notices.push("no returning players, most-improved award omitted".to_string());
    }

    Ok(AwardSlate {
        mvp,
        dpoy,
        rookie,
        mip,
        notices,
    })
}

impl AwardSlate {
    /// Plain-text report.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, title: &str, a: &Option<&Award>| match a {
            Some(a) => {
                let _ = write!(out, "{title:<24} {:<16} estimate {:8.3}  se {:6.3}", a.player.as_str(), a.estimate, a.se);
                if let Some(d) = a.delta {
                    let _ = write!(out, "  delta {d:+8.3}");
                }
                out.push('\n');
            }
            None => {
                let _ = writeln!(out, "{title:<24} (none)");
            }
        };
        line(&mut out, "Most valuable player", &Some(&self.mvp));
        line(&mut out, "Defensive player", &Some(&self.dpoy));
        line(&mut out, "Rookie of the year", &self.rookie.as_ref());
        line(&mut out, "Most improved player", &self.mip.as_ref());
        for n in &self.notices {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{SeasonStage, TransitionParams};
    use crate::gauss::{prior_belief, HyperParams};

    fn single_player_chain() -> SeasonChainResult {
        let h = HyperParams::default();
        let p = vec![PlayerId::new("solo")];
        let b = prior_belief(&p, &h).unwrap();
        SeasonChainResult {
            hyper: h,
            tp: TransitionParams::default(),
            stages: vec![SeasonStage {
                label: "s1".into(),
                start: b.clone(),
                end: b,
                rookies: p.clone(),
                active: p,
                inactive: vec![],
                loglik: 0.0,
            }],
        }
    }

    #[test]
    fn singleton_wins_mvp_and_dpoy() {
        let chain = single_player_chain();
        let iso = chain.stages[0].end.marginals();
        let slate = select_awards(&chain, &iso, None).unwrap();
        assert_eq!(slate.mvp.player.as_str(), "solo");
        assert_eq!(slate.dpoy.player.as_str(), "solo");
        assert!(slate.rookie.is_none());
        assert!(slate.mip.is_none());
        assert_eq!(slate.notices.len(), 1);
        assert!(slate.report().contains("Most valuable player"));
    }

    #[test]
    fn argmax_ties_prefer_smaller_id() {
        let (a, b) = (PlayerId::new("b"), PlayerId::new("a"));
        let got = argmax([(&a, (), 1.0), (&b, (), 1.0)]).unwrap();
        assert_eq!(got.0.as_str(), "a");
    }

    #[test]
    fn empty_isolated_is_error() {
        assert!(select_awards(&single_player_chain(), &[], None).is_err());
    }
}
