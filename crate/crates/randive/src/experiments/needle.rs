//! Equal mixture of N(0, 0.01^2) and N(5, 1): how often the sampler finds
//! the narrow spike. The per-chain estimate is the fraction of states with
//! `|x| < 0.05`, whose true value is within `3e-7` of one half.

use std::collections::BTreeMap;

use randive_core::diagnostics::DiagnosticsReport;
use randive_core::target::{needle_mixture, NormalMixture};
use randive_core::{MultiplierProposal, SamplerSpec};

use super::{basic_estimates, group_chains, run_groups, ChainStats, Ctx, GroupPlan};
use crate::error::Result;
use crate::result::{mse, Check, ExperimentResult};

pub const SPIKE_HALF_WIDTH: f64 = 0.05;

/// Multiplier densities compared on this target, with the published mean
/// estimate and acceptance rate for each.
pub fn reference_proposals() -> Vec<(&'static str, MultiplierProposal, f64, f64)> {
    let mix = |g, a, b| MultiplierProposal::symmetric_shapes(g, a, b).expect("valid shapes");
    vec![
        ("uniform", MultiplierProposal::Uniform, 0.5115, 0.3714),
        ("beta-1-1", mix(0.15, 1.0, 1.0), 0.4953, 0.4108),
        ("beta-0.5-1", mix(0.15, 0.5, 1.0), 0.4938, 0.2851),
        ("beta-1-0.5", mix(0.15, 1.0, 0.5), 0.4912, 0.5679),
        ("beta-0.5-0.5", mix(0.5, 0.5, 0.5), 0.5024, 0.3791),
    ]
}

pub(super) fn run(ctx: &Ctx) -> Result<ExperimentResult> {
    let target = needle_mixture();
    let c = ctx.config;
    let reference = c.sampler.is_none() && c.proposal.is_none();
    let plans: Vec<GroupPlan> = match (&c.sampler, c.proposal) {
        (Some(spec), _) => vec![GroupPlan::new(ctx, spec.name(), spec.clone(), 1.0)],
        (None, Some(p)) => vec![GroupPlan::new(ctx, "rdmh", SamplerSpec::Rdmh { proposal: p }, 1.0)],
        (None, None) => reference_proposals()
            .into_iter()
            .map(|(name, p, _, _)| GroupPlan::new(ctx, name, SamplerSpec::Rdmh { proposal: p }, 1.0))
            .collect(),
    };
    let max_lag = c.max_lag;
    let cdf = |x: f64| NormalMixture::cdf(&target, x);
    let (records, traces) = run_groups(ctx, 0, &plans, &target, |_, trace| {
        let xs = trace.coordinate(0);
        let hits = xs.iter().filter(|x| x.abs() < SPIKE_HALF_WIDTH).count();
        Ok(ChainStats {
            estimate: hits as f64 / xs.len() as f64,
            report: DiagnosticsReport::for_trace(trace, 0, max_lag, Some(&cdf))?,
            extras: BTreeMap::new(),
        })
    })?;

    let mut result = ctx.result();
    let truth = target.cdf(SPIKE_HALF_WIDTH) - target.cdf(-SPIKE_HALF_WIDTH);
    result.estimates.insert("p_true".into(), truth);
    for (g, plan) in plans.iter().enumerate() {
        let chains = group_chains(&records, g);
        let mut est = basic_estimates(&chains, "p_hat");
        let p: Vec<f64> = chains.iter().map(|c| c.estimate).collect();
        est.insert("p_hat_mse".into(), mse(&p, truth));
        result.groups.push(plan.summary(g, est));
    }
    if reference {
        for (name, _, p_ref, acc_ref) in reference_proposals() {
            let g = result.group(name).expect("reference group");
            let (p, acc) = (g.estimates["p_hat_mean"], g.estimates["acceptance_mean"]);
            result.checks.push(Check::within(format!("{name} mean p_hat"), p, p_ref, 0.06));
            result.checks.push(Check::within(format!("{name} acceptance"), acc, acc_ref, 0.06));
        }
    }
    result.chains = records;
    result.traces = traces;
    Ok(result)
}
