//! Run configuration: a TOML file whose keys mirror the library's parameter
//! structs, overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hooprate::ratings::ModelTag;
use hooprate::{HyperParams, SynthConfig, TransitionParams};
use serde::{Deserialize, Serialize};

/// The literal `"fit"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitWord {
    #[serde(rename = "fit")]
    Fit,
}

/// Either fixed values or a request to estimate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec<T> {
    Fit(FitWord),
    Values(T),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub logs: Option<PathBuf>,
    pub boxscores: Option<PathBuf>,
    pub intervals: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    pub ratings: Option<PathBuf>,
    pub belief: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub model: Option<String>,
    pub seasons: Option<Vec<String>>,
    /// Defaults to the built-in values when absent.
    pub hyper: Option<ParamSpec<HyperParams>>,
    pub transition: Option<ParamSpec<TransitionParams>>,
    pub synth: Option<SynthConfig>,
    pub draws: Option<u64>,
}

impl RunConfig {
    /// Parses a config file. Relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.logs,
            &mut cfg.boxscores,
            &mut cfg.intervals,
            &mut cfg.stats,
            &mut cfg.ratings,
            &mut cfg.belief,
            &mut cfg.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn model(&self) -> Result<ModelTag> {
        match &self.model {
            None => Ok(ModelTag::default()),
            Some(m) => m.parse().map_err(|_| anyhow::anyhow!("model must be multi, single or isolated, got {m:?}")),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// A required input path that must exist.
    pub fn input(&self, which: Option<&PathBuf>, name: &str, fallback: Option<PathBuf>) -> Result<PathBuf> {
        let p = match which.cloned().or(fallback) {
            Some(p) => p,
            None => bail!("no {name} file given; pass --{name} or set `{name}` in the config"),
        };
        if !p.exists() {
            bail!("{name} file {} does not exist", p.display());
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_fit_and_synth() {
        let cfg: RunConfig = toml::from_str(
            r#"
            seed = 7
            hyper = "fit"
            [transition]
            p = 0.9
            [synth]
            n_teams = 6
            [synth.hyper]
            sigma = 80.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.hyper, Some(ParamSpec::Fit(FitWord::Fit)));
        let Some(ParamSpec::Values(tp)) = cfg.transition else {
            panic!("transition values expected")
        };
        assert_eq!(tp.p, 0.9);
        assert_eq!(tp.s_alpha, TransitionParams::default().s_alpha);
        let synth = cfg.synth.unwrap();
        assert_eq!(synth.n_teams, 6);
        assert_eq!(synth.hyper.sigma, 80.0);
        assert_eq!(synth.hyper.gamma, HyperParams::default().gamma);
    }

    #[test]
    fn rejects_unknown_keys_and_words() {
        assert!(toml::from_str::<RunConfig>("sede = 1").is_err());
        assert!(toml::from_str::<RunConfig>("hyper = \"guess\"").is_err());
        assert!(toml::from_str::<RunConfig>("[hyper]\nsigmaa = 1.0").is_err());
    }

    #[test]
    fn model_selector() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.model().unwrap(), ModelTag::Multi);
        cfg.model = Some("isolated".into());
        assert_eq!(cfg.model().unwrap(), ModelTag::Isolated);
        cfg.model = Some("both".into());
        assert!(cfg.model().is_err());
    }
}
