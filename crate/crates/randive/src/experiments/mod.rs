//! The five studies and the chain dispatch they share.

pub mod bimodal;
pub mod kernel;
pub mod needle;
pub mod shareprice;
pub mod thicktail;

use std::collections::BTreeMap;
use std::time::Instant;

use randive_core::diagnostics::DiagnosticsReport;
use randive_core::{run_chain, ChainConfig, SamplerSpec, TargetDensity, Trace};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::{Experiment, ExperimentConfig, CHAIN_GROUP_STRIDE};
use crate::error::{HarnessError, Result};
use crate::io::state_columns;
use crate::result::{mean_sd, ChainRecord, ExperimentResult, GroupSummary, TraceOutput};

/// Runs the configured study. Nothing is written to disk.
///
/// `threads = 0` uses one worker per hardware thread. The result does not
/// depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let ctx = Ctx { config, pool };
    let start = Instant::now();
    let mut result = match config.experiment {
        Experiment::Bimodal => bimodal::run(&ctx),
        Experiment::Needle => needle::run(&ctx),
        Experiment::Thicktail => thicktail::run(&ctx),
        Experiment::Shareprice => shareprice::run(&ctx),
        Experiment::KernelCheck => kernel::run(&ctx),
    }?;
    result.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(result)
}

pub(crate) struct Ctx<'a> {
    pub config: &'a ExperimentConfig,
    pub pool: ThreadPool,
}

impl Ctx<'_> {
    pub fn result(&self) -> ExperimentResult {
        ExperimentResult::new(self.config.experiment, self.config.seed, self.config.scale_factor)
    }
}

/// Replicated chains of one sampler from one start.
#[derive(Debug, Clone)]
pub(crate) struct GroupPlan {
    pub name: String,
    pub spec: SamplerSpec,
    pub init: Vec<f64>,
    pub replicates: usize,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl GroupPlan {
    pub fn new(ctx: &Ctx, name: impl Into<String>, spec: SamplerSpec, init: f64) -> Self {
        let c = ctx.config;
        Self {
            name: name.into(),
            spec,
            init: vec![c.init.as_ref().map_or(init, |v| v[0])],
            replicates: c.replicates(),
            n_iter: c.n_iter(),
            burn_in: c.burn_in(),
            thin: c.thin(),
        }
    }

    pub fn summary(&self, group: usize, estimates: BTreeMap<String, f64>) -> GroupSummary {
        GroupSummary {
            group,
            name: self.name.clone(),
            sampler: self.spec.clone(),
            init: self.init.clone(),
            n_chains: self.replicates,
            n_iter: self.n_iter,
            burn_in: self.burn_in,
            thin: self.thin,
            estimates,
            normality: None,
        }
    }
}

/// What a study keeps from one finished chain.
pub(crate) struct ChainStats {
    pub estimate: f64,
    pub report: DiagnosticsReport,
    pub extras: BTreeMap<String, f64>,
}

struct Job<'a> {
    group: usize,
    replicate: usize,
    plan: &'a GroupPlan,
}

/// Chain number, also its RNG stream index.
pub fn chain_id(group: usize, replicate: usize) -> u64 {
    group as u64 * CHAIN_GROUP_STRIDE + replicate as u64
}

/// Runs every replicate of every group on the pool and returns the chain
/// records in `(group, replicate)` order. Traces of the first `trace_limit`
/// replicates per group are kept for writing.
pub(crate) fn run_groups<T, F>(
    ctx: &Ctx,
    first_group: usize,
    plans: &[GroupPlan],
    target: &T,
    stats: F,
) -> Result<(Vec<ChainRecord>, Vec<TraceOutput>)>
where
    T: TargetDensity + Sync + ?Sized,
    F: Fn(&GroupPlan, &Trace) -> Result<ChainStats> + Sync,
{
    let jobs: Vec<Job> = plans
        .iter()
        .enumerate()
        .flat_map(|(g, plan)| {
            (0..plan.replicates).map(move |replicate| Job { group: first_group + g, replicate, plan })
        })
        .collect();
    let trace_limit = ctx.config.trace_limit;
    let seed = ctx.config.seed;
    let outcomes: Vec<Result<(ChainRecord, Option<TraceOutput>)>> = ctx.pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let chain = chain_id(job.group, job.replicate);
                let p = job.plan;
                let cfg = ChainConfig::new(p.n_iter, p.burn_in, p.thin, p.init.clone(), seed, chain);
                let trace = run_chain(&cfg, &p.spec, target)?;
                let s = stats(p, &trace)?;
                let record = ChainRecord {
                    chain,
                    group: job.group,
                    replicate: job.replicate,
                    estimate: s.estimate,
                    report: s.report,
                    extras: s.extras,
                };
                let kept = (job.replicate < trace_limit).then(|| TraceOutput {
                    chain,
                    columns: state_columns(trace.dim),
                    trace,
                });
                Ok((record, kept))
            })
            .collect()
    });
    let mut records = Vec::with_capacity(outcomes.len());
    let mut traces = Vec::new();
    for o in outcomes {
        let (r, t) = o?;
        records.push(r);
        traces.extend(t);
    }
    Ok((records, traces))
}

/// `acceptance_mean`, `acceptance_sd`, `estimate_mean`, `estimate_sd` over
/// the chains of one group.
pub(crate) fn basic_estimates(chains: &[&ChainRecord], estimate_key: &str) -> BTreeMap<String, f64> {
    let acc: Vec<f64> = chains.iter().map(|c| c.report.acceptance_rate).collect();
    let est: Vec<f64> = chains.iter().map(|c| c.estimate).collect();
    let (am, asd) = mean_sd(&acc);
    let (em, esd) = mean_sd(&est);
    BTreeMap::from([
        ("acceptance_mean".to_string(), am),
        ("acceptance_sd".to_string(), asd),
        (format!("{estimate_key}_mean"), em),
        (format!("{estimate_key}_sd"), esd),
    ])
}

pub(crate) fn group_chains(records: &[ChainRecord], group: usize) -> Vec<&ChainRecord> {
    records.iter().filter(|c| c.group == group).collect()
}
