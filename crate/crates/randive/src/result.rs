//! What an experiment run produces.

use std::collections::BTreeMap;

use randive_core::diagnostics::{DiagnosticsReport, NormalityTests};
use randive_core::shareprice::PosteriorSummaries;
use randive_core::{SamplerSpec, Trace};
use serde::{Deserialize, Serialize};

use crate::config::Experiment;

/// One pass/fail tolerance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    /// `|value - target| <= tol`.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let passed = (value - target).abs() <= tol;
        Self::new(name, passed, format!("{value:.6} vs {target} +- {tol}"))
    }
}

/// Replicated chains sharing a sampler, target and start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: usize,
    pub name: String,
    pub sampler: SamplerSpec,
    pub init: Vec<f64>,
    pub n_chains: usize,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub estimates: BTreeMap<String, f64>,
    /// Normality tests on the per-chain estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normality: Option<NormalityTests>,
}

impl GroupSummary {
    pub fn estimate(&self, key: &str) -> Option<f64> {
        self.estimates.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    /// Also the chain's RNG stream index.
    pub chain: u64,
    pub group: usize,
    pub replicate: usize,
    /// The per-chain quantity the experiment aggregates.
    pub estimate: f64,
    pub report: DiagnosticsReport,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, f64>,
}

/// A trace to be written as `trace_{chain}.csv`.
#[derive(Debug, Clone)]
pub struct TraceOutput {
    pub chain: u64,
    pub columns: Vec<String>,
    pub trace: Trace,
}

/// Everything in `summary.json`, plus the wall clock and the kept traces,
/// which are written elsewhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: Experiment,
    pub seed: u64,
    pub scale_factor: f64,
    pub groups: Vec<GroupSummary>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub estimates: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior: Option<PosteriorSummaries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_source: Option<String>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub chains: Vec<ChainRecord>,
    #[serde(skip)]
    pub wall_clock_seconds: f64,
    #[serde(skip)]
    pub traces: Vec<TraceOutput>,
}

impl ExperimentResult {
    pub fn new(experiment: Experiment, seed: u64, scale_factor: f64) -> Self {
        Self {
            experiment,
            seed,
            scale_factor,
            groups: Vec::new(),
            estimates: BTreeMap::new(),
            posterior: None,
            data_source: None,
            checks: Vec::new(),
            notes: Vec::new(),
            chains: Vec::new(),
            wall_clock_seconds: 0.0,
            traces: Vec::new(),
        }
    }

    pub fn group(&self, name: &str) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn chains_in(&self, group: usize) -> impl Iterator<Item = &ChainRecord> {
        self.chains.iter().filter(move |c| c.group == group)
    }

    /// `summary.json` contents.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Mean and sample standard deviation (`n - 1`); the sd is zero for one value.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Mean squared error of `values` as estimates of `truth`.
pub fn mse(values: &[f64], truth: f64) -> f64 {
    values.iter().map(|v| (v - truth) * (v - truth)).sum::<f64>() / values.len() as f64
}
