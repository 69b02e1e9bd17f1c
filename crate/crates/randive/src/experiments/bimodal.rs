//! Equal mixture of N(0, 0.5^2) and N(10, 0.5^2): random walk against dive
//! moves between two well separated modes.

use std::collections::BTreeMap;

use randive_core::diagnostics::DiagnosticsReport;
use randive_core::target::{bimodal_mixture, NormalMixture};
use randive_core::{MultiplierProposal, SamplerSpec};

use super::{basic_estimates, group_chains, run_groups, ChainStats, Ctx, GroupPlan};
use crate::error::Result;
use crate::result::{Check, ExperimentResult};

/// States above this lie in the upper basin.
pub const BASIN_SPLIT: f64 = 5.0;

fn plans(ctx: &Ctx) -> Vec<GroupPlan> {
    let c = ctx.config;
    if let Some(spec) = &c.sampler {
        let x0 = if spec.is_dive() { -2.0 } else { 0.0 };
        return vec![GroupPlan::new(ctx, spec.name(), spec.clone(), x0)];
    }
    let proposal = c.proposal.unwrap_or(MultiplierProposal::Uniform);
    vec![
        GroupPlan::new(ctx, "rwmh-tau2-from0", SamplerSpec::RwmhNormal { tau: 2.0 }, 0.0),
        GroupPlan::new(ctx, "rwmh-tau2-from10", SamplerSpec::RwmhNormal { tau: 2.0 }, 10.0),
        GroupPlan::new(ctx, "rwmh-tau5-from10", SamplerSpec::RwmhNormal { tau: 5.0 }, 10.0),
        GroupPlan::new(ctx, "rdmh-from-2", SamplerSpec::Rdmh { proposal }, -2.0),
    ]
}

pub(super) fn run(ctx: &Ctx) -> Result<ExperimentResult> {
    let target = bimodal_mixture();
    let plans = plans(ctx);
    let max_lag = ctx.config.max_lag;
    let cdf = |x: f64| NormalMixture::cdf(&target, x);
    let (records, traces) = run_groups(ctx, 0, &plans, &target, |_, trace| {
        let xs = trace.coordinate(0);
        let above = xs.iter().filter(|&&x| x > BASIN_SPLIT).count() as f64 / xs.len() as f64;
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(ChainStats {
            estimate: above,
            report: DiagnosticsReport::for_trace(trace, 0, max_lag, Some(&cdf))?,
            extras: BTreeMap::from([("min_state".into(), min), ("max_state".into(), max)]),
        })
    })?;

    let mut result = ctx.result();
    for (g, plan) in plans.iter().enumerate() {
        let chains = group_chains(&records, g);
        let mut est = basic_estimates(&chains, "frac_upper");
        let extreme =
            |k: &str, pick: fn(f64, f64) -> f64, init: f64| chains.iter().map(|c| c.extras[k]).fold(init, pick);
        est.insert("min_state".into(), extreme("min_state", f64::min, f64::INFINITY));
        est.insert("max_state".into(), extreme("max_state", f64::max, f64::NEG_INFINITY));
        let both = chains
            .iter()
            .filter(|c| c.extras["min_state"] < BASIN_SPLIT && c.extras["max_state"] > BASIN_SPLIT)
            .count();
        est.insert("frac_chains_both_basins".into(), both as f64 / chains.len() as f64);
        result.groups.push(plan.summary(g, est));
    }
    if ctx.config.sampler.is_none() {
        result.checks = checks(&result);
    }
    result.chains = records;
    result.traces = traces;
    Ok(result)
}

fn checks(r: &ExperimentResult) -> Vec<Check> {
    let est = |g: &str, k: &str| r.group(g).and_then(|g| g.estimate(k)).unwrap_or(f64::NAN);
    let stay = est("rwmh-tau2-from0", "max_state");
    let both = est("rwmh-tau5-from10", "frac_chains_both_basins");
    vec![
        Check::within("rdmh acceptance", est("rdmh-from-2", "acceptance_mean"), 0.302, 0.03),
        Check::within("rdmh upper basin mass", est("rdmh-from-2", "frac_upper_mean"), 0.5, 0.05),
        Check::new("rwmh tau 2 stays in lower basin", stay < BASIN_SPLIT, format!("max state {stay:.4}")),
        Check::new("rwmh tau 5 visits both basins", both == 1.0, format!("fraction of chains {both}")),
        Check::within("rwmh tau 5 acceptance", est("rwmh-tau5-from10", "acceptance_mean"), 0.143, 0.03),
    ]
}
