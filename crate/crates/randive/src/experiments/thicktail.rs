//! Symmetric target with tails decaying like `|x|^-4`: finite variance, so
//! chain means should look normal across replicates, and an infinite fourth
//! moment that the Langevin drift handles badly.
//!
//! Two parts: long chains whose means are tested for normality, and short
//! chains whose empirical distribution is compared with the exact CDF.

use std::collections::BTreeMap;

use randive_core::diagnostics::{normality_tests, DiagnosticsReport};
use randive_core::target::{thick_tailed, thick_tailed_cdf};
use randive_core::{Error, MultiplierProposal, SamplerSpec};

use super::{basic_estimates, group_chains, run_groups, ChainStats, Ctx, GroupPlan};
use crate::error::Result;
use crate::result::{mean_sd, mse, Check, ExperimentResult};

pub fn reference_samplers(proposal: MultiplierProposal) -> Vec<(&'static str, SamplerSpec)> {
    vec![
        ("rdmh", SamplerSpec::Rdmh { proposal }),
        ("rwmh-normal", SamplerSpec::RwmhNormal { tau: 1.5 }),
        ("rwmh-cauchy", SamplerSpec::RwmhCauchy { scale: 1.0 }),
        ("lmh-2", SamplerSpec::Lmh { sigma: 2.0 }),
        ("lmh-3", SamplerSpec::Lmh { sigma: 3.0 }),
        ("lmh-4", SamplerSpec::Lmh { sigma: 4.0 }),
    ]
}

pub(super) fn run(ctx: &Ctx) -> Result<ExperimentResult> {
    let c = ctx.config;
    let target = thick_tailed();
    let samplers: Vec<(String, SamplerSpec)> = match &c.sampler {
        Some(spec) => vec![(spec.name().to_string(), spec.clone())],
        None => {
            reference_samplers(c.proposal.unwrap_or_default()).into_iter().map(|(n, s)| (n.to_string(), s)).collect()
        }
    };
    let long: Vec<GroupPlan> = samplers.iter().map(|(n, s)| GroupPlan::new(ctx, n.clone(), s.clone(), 1.0)).collect();
    let short: Vec<GroupPlan> = samplers
        .iter()
        .map(|(n, s)| GroupPlan {
            replicates: c.ks_replicates(),
            n_iter: c.ks_iter(),
            burn_in: 0,
            thin: 1,
            ..GroupPlan::new(ctx, format!("ks-{n}"), s.clone(), 1.0)
        })
        .collect();
    let max_lag = c.max_lag;
    let cdf = |x: f64| thick_tailed_cdf(x);
    let stats = |_: &GroupPlan, trace: &randive_core::Trace| {
        let report = DiagnosticsReport::for_trace(trace, 0, max_lag, Some(&cdf))?;
        Ok(ChainStats { estimate: report.ergodic_mean, report, extras: BTreeMap::new() })
    };
    let (mut records, mut traces) = run_groups(ctx, 0, &long, &target, stats)?;
    let (ks_records, ks_traces) = run_groups(ctx, long.len(), &short, &target, |p, trace| {
        let mut s = stats(p, trace)?;
        s.estimate = s.report.ks_stat.expect("cdf given");
        Ok(s)
    })?;
    records.extend(ks_records);
    traces.extend(ks_traces);

    let mut result = ctx.result();
    for (g, plan) in long.iter().enumerate() {
        let chains = group_chains(&records, g);
        let means: Vec<f64> = chains.iter().map(|c| c.estimate).collect();
        let mut est = basic_estimates(&chains, "chain_mean");
        est.insert("chain_mean_mse".into(), mse(&means, 0.0));
        let ks: Vec<f64> = chains.iter().filter_map(|c| c.report.ks_stat).collect();
        est.insert("ks_mean".into(), mean_sd(&ks).0);
        let mut summary = plan.summary(g, est);
        summary.normality = match normality_tests(&means) {
            Ok(t) => Some(t),
            Err(Error::SampleTooSmall { .. } | Error::DegenerateSeries) => {
                result.notes.push(format!("{}: no normality tests on {} chain means", plan.name, means.len()));
                None
            }
            Err(e) => return Err(e.into()),
        };
        result.groups.push(summary);
    }
    for (i, plan) in short.iter().enumerate() {
        let g = long.len() + i;
        let chains = group_chains(&records, g);
        let mut est = basic_estimates(&chains, "ks");
        let p: Vec<f64> = chains.iter().filter_map(|c| c.report.ks_pvalue).collect();
        est.insert("ks_pvalue_mean".into(), mean_sd(&p).0);
        result.groups.push(plan.summary(g, est));
    }
    if c.sampler.is_none() {
        result.checks = checks(&result);
    }
    result.chains = records;
    result.traces = traces;
    Ok(result)
}

fn checks(r: &ExperimentResult) -> Vec<Check> {
    let est = |g: &str, k: &str| r.group(g).and_then(|g| g.estimate(k)).unwrap_or(f64::NAN);
    let normality = |g: &str| r.group(g).and_then(|g| g.normality);
    let mut out = vec![Check::within("rdmh acceptance", est("rdmh", "acceptance_mean"), 0.664, 0.03)];
    out.push(match normality("rdmh") {
        Some(t) => Check::new(
            "rdmh chain means normal",
            t.ad_p > 0.05 && t.cvm_p > 0.05 && t.lillie_p > 0.05,
            format!("p-values AD {:.4} CvM {:.4} Lilliefors {:.4}, all must exceed 0.05", t.ad_p, t.cvm_p, t.lillie_p),
        ),
        None => Check::new("rdmh chain means normal", false, "too few chains to test"),
    });
    out.push(match normality("lmh-2") {
        Some(t) => Check::new(
            "lmh-2 chain means not normal",
            t.min_p() < 0.01,
            format!(
                "p-values AD {:.4} CvM {:.4} Lilliefors {:.4}, smallest must be below 0.01",
                t.ad_p, t.cvm_p, t.lillie_p
            ),
        ),
        None => Check::new("lmh-2 chain means not normal", false, "too few chains to test"),
    });
    let ks = est("ks-rdmh", "ks_mean");
    out.push(Check::new("rdmh mean ks", (0.012..=0.032).contains(&ks), format!("{ks:.6} in [0.012, 0.032]")));
    let (kn, kl) = (est("ks-rwmh-normal", "ks_mean"), est("ks-lmh-2", "ks_mean"));
    out.push(Check::new(
        "mean ks ordering",
        ks < kn && kn < kl,
        format!("rdmh {ks:.4} < rwmh-normal {kn:.4} < lmh-2 {kl:.4}"),
    ));
    out
}
