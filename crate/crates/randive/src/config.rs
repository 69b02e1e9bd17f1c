//! Experiment configuration: one flat JSON document per run.

use std::fmt;
use std::path::{Path, PathBuf};

use randive_core::{MultiplierProposal, SamplerSpec};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Largest replicate count per group. Chain numbers are
/// `group * CHAIN_GROUP_STRIDE + replicate`.
pub const CHAIN_GROUP_STRIDE: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Bimodal,
    Needle,
    Thicktail,
    Shareprice,
    KernelCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 5] =
        [Self::Bimodal, Self::Needle, Self::Thicktail, Self::Shareprice, Self::KernelCheck];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bimodal => "bimodal",
            Self::Needle => "needle",
            Self::Thicktail => "thicktail",
            Self::Shareprice => "shareprice",
            Self::KernelCheck => "kernel-check",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// `(n_iter, burn_in, thin, n_chains)` used when the config leaves them out.
    pub fn defaults(self) -> (usize, usize, usize, usize) {
        match self {
            Self::Bimodal => (50_000, 20_000, 1, 1),
            Self::Needle => (50_000, 20_000, 1, 100),
            Self::Thicktail => (50_000, 10_000, 1, 1000),
            Self::Shareprice => (160_000, 10_000, 5, 1),
            Self::KernelCheck => (1, 0, 1, 1),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn default_seed() -> u64 {
    1
}

fn default_scale() -> f64 {
    1.0
}

fn default_trace_limit() -> usize {
    2
}

fn default_max_lag() -> usize {
    20
}

/// Run configuration. Every field but `experiment` has a default; unknown
/// keys are rejected.
///
/// `sampler` replaces the experiment's sampler list with that one sampler,
/// `proposal` replaces the multiplier density of its dive samplers, and
/// `init` the starting state of every chain. For `shareprice` the state is
/// `(beta, log sigma, log nu, log gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thin: Option<usize>,
    /// Replicates per group before scaling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_chains: Option<usize>,
    #[serde(default = "default_scale")]
    pub scale_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal: Option<MultiplierProposal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<f64>>,
    /// Thick-tail KS study: chains per sampler before scaling (default `n_chains`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_chains: Option<usize>,
    /// Thick-tail KS study: length of each chain (default 1000).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_iter: Option<usize>,
    /// Kernel check: Monte Carlo proposals per rejection estimate (default 10^6).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_mc: Option<usize>,
    /// Trace CSVs are written for the first `trace_limit` replicates of each group.
    #[serde(default = "default_trace_limit")]
    pub trace_limit: usize,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
    /// Share-price data file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub allow_synthetic: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            seed: default_seed(),
            n_iter: None,
            burn_in: None,
            thin: None,
            n_chains: None,
            scale_factor: default_scale(),
            output_dir: None,
            sampler: None,
            proposal: None,
            init: None,
            ks_chains: None,
            ks_iter: None,
            n_mc: None,
            trace_limit: default_trace_limit(),
            max_lag: default_max_lag(),
            data: None,
            allow_synthetic: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn n_iter(&self) -> usize {
        self.n_iter.unwrap_or(self.experiment.defaults().0)
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.experiment.defaults().1)
    }

    pub fn thin(&self) -> usize {
        self.thin.unwrap_or(self.experiment.defaults().2)
    }

    pub fn n_chains(&self) -> usize {
        self.n_chains.unwrap_or(self.experiment.defaults().3)
    }

    pub fn ks_iter(&self) -> usize {
        self.ks_iter.unwrap_or(1000)
    }

    pub fn n_mc(&self) -> usize {
        self.n_mc.unwrap_or(1_000_000)
    }

    /// `ceil(base * scale_factor)`, at least one.
    pub fn scaled(&self, base: usize) -> usize {
        // the small offset keeps 100 * 0.2 at 20 rather than 21
        ((base as f64 * self.scale_factor - 1e-9).ceil() as usize).max(1)
    }

    pub fn replicates(&self) -> usize {
        self.scaled(self.n_chains())
    }

    pub fn ks_replicates(&self) -> usize {
        self.scaled(self.ks_chains.unwrap_or(self.n_chains()))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs").join(self.experiment.name()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if !(self.scale_factor > 0.0 && self.scale_factor <= 1.0) {
            return bad(format!("scale_factor must lie in (0, 1], got {}", self.scale_factor));
        }
        if self.n_chains() == 0 {
            return bad("n_chains must be at least 1".into());
        }
        if let Some(0) = self.ks_chains {
            return bad("ks_chains must be at least 1".into());
        }
        if self.replicates() as u64 >= CHAIN_GROUP_STRIDE || self.ks_replicates() as u64 >= CHAIN_GROUP_STRIDE {
            return bad(format!("at most {} chains per group", CHAIN_GROUP_STRIDE - 1));
        }
        if self.experiment != Experiment::KernelCheck {
            if self.n_iter() == 0 {
                return bad("n_iter must be positive".into());
            }
            if self.burn_in() >= self.n_iter() {
                return bad(format!("burn_in ({}) must be below n_iter ({})", self.burn_in(), self.n_iter()));
            }
            if self.thin() == 0 {
                return bad("thin must be positive".into());
            }
        }
        if self.ks_iter() < 8 {
            return bad("ks_iter must be at least 8".into());
        }
        if self.n_mc() == 0 {
            return bad("n_mc must be positive".into());
        }
        if let Some(p) = &self.proposal {
            p.validate().map_err(|e| HarnessError::Config(format!("proposal: {e}")))?;
        }
        if let Some(init) = &self.init {
            let dim = if self.experiment == Experiment::Shareprice { 4 } else { 1 };
            if init.len() != dim || init.iter().any(|v| !v.is_finite()) {
                return bad(format!("init must hold {dim} finite value(s)"));
            }
        }
        match self.experiment {
            Experiment::Shareprice | Experiment::KernelCheck if self.sampler.is_some() => {
                bad(format!("{} does not take a sampler", self.experiment))
            }
            Experiment::Shareprice if self.proposal.is_some() => bad("shareprice does not take a proposal".into()),
            Experiment::KernelCheck if self.init.is_some() => bad("kernel-check does not take init".into()),
            _ => match &self.sampler {
                Some(SamplerSpec::RdmhMultivariate { .. } | SamplerSpec::RdmhComponentwise { .. }) => {
                    bad("only one-dimensional samplers apply to this experiment".into())
                }
                Some(SamplerSpec::Rdmh { proposal }) => {
                    proposal.validate().map_err(|e| HarnessError::Config(format!("sampler proposal: {e}")))
                }
                Some(
                    SamplerSpec::RwmhNormal { tau: s }
                    | SamplerSpec::RwmhCauchy { scale: s }
                    | SamplerSpec::Lmh { sigma: s },
                ) if !(*s > 0.0 && s.is_finite()) => bad(format!("sampler scale must be positive, got {s}")),
                _ => Ok(()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "needle"}"#).unwrap();
        assert_eq!((c.n_iter(), c.burn_in(), c.thin(), c.n_chains()), (50_000, 20_000, 1, 100));
        assert_eq!(c.seed, 1);
        assert_eq!(c.output_dir(), PathBuf::from("runs/needle"));
        c.validate().unwrap();
    }

    #[test]
    fn scaling_rounds_up() {
        let mut c = ExperimentConfig::new(Experiment::Needle);
        c.scale_factor = 0.2;
        assert_eq!(c.replicates(), 20);
        c.scale_factor = 0.001;
        assert_eq!(c.replicates(), 1);
        c.scale_factor = 0.333;
        assert_eq!(c.replicates(), 34);
        let mut t = ExperimentConfig::new(Experiment::Thicktail);
        t.scale_factor = 0.2;
        t.ks_chains = Some(500);
        assert_eq!((t.replicates(), t.ks_replicates()), (200, 100));
    }

    #[test]
    fn rejects_bad_values() {
        let parse = |s: &str| ExperimentConfig::from_json(s).and_then(|c| c.validate().map(|_| c));
        assert!(parse(r#"{"experiment": "needle", "scale_factor": 0}"#).is_err());
        assert!(parse(r#"{"experiment": "needle", "scale_factor": 1.5}"#).is_err());
        assert!(parse(r#"{"experiment": "needle", "burn_in": 60000}"#).is_err());
        assert!(parse(r#"{"experiment": "needle", "thin": 0}"#).is_err());
        assert!(parse(r#"{"experiment": "needle", "n_chains": 0}"#).is_err());
        assert!(parse(r#"{"experiment": "needel"}"#).is_err());
        assert!(parse(r#"{"experiment": "needle", "n_chain": 3}"#).is_err());
        assert!(parse(r#"{"experiment": "shareprice", "init": [1.0]}"#).is_err());
        assert!(parse(r#"{"experiment": "shareprice", "sampler": {"sampler": "rwmh-normal", "tau": 1}}"#).is_err());
        assert!(parse(r#"{"experiment": "bimodal", "sampler": {"sampler": "rwmh-normal", "tau": -1}}"#).is_err());
        assert!(parse(r#"{"experiment": "bimodal", "proposal": {"kind": "beta-mixture", "gamma": 2, "a1": 1, "b1": 1, "a2": 1, "b2": 1}}"#).is_err());
        assert!(parse(r#"{"experiment": "bimodal", "sampler": {"sampler": "lmh", "scale": 2}}"#).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_name(e.name()), Some(e));
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(json, format!("\"{}\"", e.name()));
        }
    }
}
