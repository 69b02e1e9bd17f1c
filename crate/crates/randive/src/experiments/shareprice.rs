//! Skewed Student-t model for daily returns, sampled with componentwise
//! dive sweeps over `(beta, log sigma, log nu, log gamma)`.

use std::collections::BTreeMap;

use randive_core::diagnostics::DiagnosticsReport;
use randive_core::shareprice::{
    default_init, run_shareprice_analysis, shareprice_proposals, synthetic_returns, PriceSeries, ShareAnalysisConfig,
    SkewTParams,
};
use randive_core::{RngStream, SamplerSpec};

use super::{Ctx, GroupPlan};
use crate::error::{HarnessError, Result};
use crate::io::load_prices;
use crate::result::{ChainRecord, Check, ExperimentResult, TraceOutput};

/// Generating parameters `(beta, sigma, nu, gamma)` of the synthetic series.
pub const SYNTHETIC_TRUTH: (f64, f64, f64, f64) = (0.005, 0.009, 8.0, 0.7);
pub const SYNTHETIC_LEN: usize = 500;
/// RNG stream for the synthetic returns, kept clear of the chain streams.
const DATA_STREAM: u64 = u64::MAX;

/// Reference posterior means and standard deviations for the Abbey National
/// price series, in the order beta, sigma, nu, gamma.
pub const REFERENCE_POSTERIOR: [(&str, f64, f64); 4] =
    [("beta", 0.0066, 0.0029), ("sigma", 0.0091, 0.0018), ("nu", 8.0119, 7.05), ("gamma", 0.6745, 0.1408)];

const NO_DATA: &str =
    "shareprice needs a price file (--data or \"data\"); pass --allow-synthetic to run on generated data";

pub const TRACE_COLUMNS: [&str; 4] = ["beta", "sigma_t", "nu_t", "gamma_t"];

fn synthetic(seed: u64) -> Result<PriceSeries> {
    let (beta, sigma, nu, gamma) = SYNTHETIC_TRUTH;
    let mut rng = RngStream::new(seed, DATA_STREAM);
    let returns = synthetic_returns(SYNTHETIC_LEN, beta, sigma, nu, gamma, &mut rng)?;
    Ok(PriceSeries::from_returns(&returns)?)
}

pub(super) fn run(ctx: &Ctx) -> Result<ExperimentResult> {
    let c = ctx.config;
    let mut result = ctx.result();
    let data = match &c.data {
        Some(path) => {
            result.data_source = Some(path.display().to_string());
            load_prices(path)?
        }
        None if c.allow_synthetic => {
            let (b, s, n, g) = SYNTHETIC_TRUTH;
            result.data_source = Some("synthetic".into());
            result.notes.push(format!(
                "no price file given; using {SYNTHETIC_LEN} synthetic returns from beta {b}, sigma {s}, nu {n}, gamma {g}"
            ));
            synthetic(c.seed)?
        }
        None => return Err(HarnessError::Config(NO_DATA.into())),
    };
    let init = c.init.as_deref().map_or_else(|| default_init(data.returns()), SkewTParams::from_slice);
    let analysis_config = ShareAnalysisConfig {
        n_iter: c.n_iter(),
        burn_in: c.burn_in(),
        thin: c.thin(),
        seed: c.seed,
        stream_index: 0,
        init: Some(init),
        ..ShareAnalysisConfig::default()
    };
    let analysis = ctx.pool.install(|| run_shareprice_analysis(&data, &analysis_config))?;
    let s = analysis.summaries;

    let plan = GroupPlan {
        name: "rdmh-cw".into(),
        spec: SamplerSpec::RdmhComponentwise { proposals: shareprice_proposals().to_vec() },
        init: init.to_array().to_vec(),
        replicates: 1,
        n_iter: c.n_iter(),
        burn_in: c.burn_in(),
        thin: c.thin(),
    };
    let mut est = BTreeMap::new();
    for (name, p) in [("beta", s.beta), ("sigma", s.sigma), ("nu", s.nu), ("gamma", s.gamma)] {
        est.insert(format!("{name}_mean"), p.mean);
        est.insert(format!("{name}_sd"), p.sd);
    }
    est.insert("acceptance_mean".into(), analysis.trace.acceptance_rate);
    est.insert("n_returns".into(), data.returns().len() as f64);
    if let Some(rates) = &analysis.trace.coordinate_acceptance {
        for (col, r) in TRACE_COLUMNS.iter().zip(rates) {
            est.insert(format!("acceptance_{col}"), *r);
        }
    }
    result.groups.push(plan.summary(0, est));
    result.posterior = Some(s);

    if c.data.is_some() {
        let means = [s.beta.mean, s.sigma.mean, s.nu.mean, s.gamma.mean];
        for ((name, mean, sd), got) in REFERENCE_POSTERIOR.into_iter().zip(means) {
            result.checks.push(Check::within(format!("{name} posterior mean"), got, mean, 3.0 * sd));
        }
    } else {
        let truth = SYNTHETIC_TRUTH.0;
        let z = (s.beta.mean - truth) / s.beta.sd;
        result.checks.push(Check::new(
            "synthetic beta recovered",
            z.abs() <= 3.0,
            format!("mean {:.6} sd {:.6} truth {truth}, {z:.3} sds away", s.beta.mean, s.beta.sd),
        ));
    }

    result.chains.push(ChainRecord {
        chain: 0,
        group: 0,
        replicate: 0,
        estimate: s.beta.mean,
        report: DiagnosticsReport::for_trace(&analysis.trace, 0, c.max_lag, None)?,
        extras: BTreeMap::new(),
    });
    if c.trace_limit > 0 {
        result.traces.push(TraceOutput {
            chain: 0,
            columns: TRACE_COLUMNS.iter().map(|s| s.to_string()).collect(),
            trace: analysis.trace,
        });
    }
    Ok(result)
}
