//! Numerical probes of the dive kernel on the thick-tailed target: detailed
//! balance, limits of the rejection probability, normalisation of the
//! proposal density, and the drift bounds used in the ergodicity argument.

use randive_core::diagnostics::{detailed_balance_error, proposal_kernel_mass, rejection_prob_estimate};
use randive_core::proposal::{drift_bound_phi, drift_bound_psi};
use randive_core::target::thick_tailed;
use randive_core::{MultiplierProposal, RngStream};
use rayon::prelude::*;

use super::Ctx;
use crate::error::Result;
use crate::result::{Check, ExperimentResult};

pub const BALANCE_PAIRS: usize = 1000;
pub const BOUND_DRAWS: usize = 100_000;
pub const RHO_POINTS: [f64; 4] = [1e4, -1e4, 1e-4, -1e-4];
pub const MASS_POINTS: [f64; 3] = [0.1, 1.0, 10.0];
const PSI_EXPONENTS: [f64; 4] = [2.0, 4.0, 10.0, f64::INFINITY];

/// Nonzero state with log-normal magnitude and random sign.
fn random_state(rng: &mut RngStream) -> f64 {
    let mag = (2.0 * rng.sample_normal(0.0, 1.0).expect("unit normal")).exp();
    if rng.uniform01() < 0.5 {
        -mag
    } else {
        mag
    }
}

pub(super) fn run(ctx: &Ctx) -> Result<ExperimentResult> {
    let c = ctx.config;
    let target = thick_tailed();
    let g = c.proposal.unwrap_or_default();
    let mut result = ctx.result();

    let mut rng = RngStream::new(c.seed, 0);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    while pairs < BALANCE_PAIRS {
        let (x, y) = (random_state(&mut rng), random_state(&mut rng));
        if x.abs() == y.abs() {
            continue;
        }
        worst = worst.max(detailed_balance_error(x, y, &target, &g)?);
        pairs += 1;
    }
    result.estimates.insert("balance_max_rel_error".into(), worst);

    let n_mc = c.n_mc();
    let rho: Vec<f64> = ctx.pool.install(|| {
        RHO_POINTS
            .par_iter()
            .enumerate()
            .map(|(i, &x)| rejection_prob_estimate(x, &target, &g, n_mc, &mut RngStream::new(c.seed, 1 + i as u64)))
            .collect::<std::result::Result<_, _>>()
    })?;
    for (x, r) in RHO_POINTS.iter().zip(&rho) {
        result.estimates.insert(format!("rho_at_{x:e}"), *r);
    }

    let mass: Vec<f64> = MASS_POINTS.iter().map(|&x| proposal_kernel_mass(x, &g, 1e-12)).collect();
    let mass_err = mass.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
    for (x, m) in MASS_POINTS.iter().zip(&mass) {
        result.estimates.insert(format!("kernel_mass_at_{x}"), *m);
    }

    let mut rng = RngStream::new(c.seed, 1 + RHO_POINTS.len() as u64);
    let (mut phi_max, mut psi_max, mut violations) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0usize);
    for _ in 0..BOUND_DRAWS {
        let e = g.sample(&mut rng);
        let s = rng.uniform01();
        let phi = drift_bound_phi(s, e);
        phi_max = phi_max.max(phi);
        violations += usize::from(phi >= 1.0);
        for p in PSI_EXPONENTS {
            let upper = if p.is_finite() { 0.5 - 0.5 / p } else { 0.5 };
            let psi = drift_bound_psi(p, upper * rng.uniform01(), e);
            psi_max = psi_max.max(psi);
            violations += usize::from(psi >= 1.0);
        }
    }
    result.estimates.insert("phi_max".into(), phi_max);
    result.estimates.insert("psi_max".into(), psi_max);

    result.checks.push(Check::new(
        "detailed balance",
        worst < 1e-12,
        format!("max relative error {worst:.3e} over {BALANCE_PAIRS} pairs, below 1e-12"),
    ));
    if g == MultiplierProposal::Uniform {
        result.checks.push(Check::within("rho at +1e4", rho[0], 0.375, 0.01));
        result.checks.push(Check::within("rho at -1e4", rho[1], 0.375, 0.01));
        result.checks.push(Check::within("rho at +1e-4", rho[2], 0.25, 0.01));
        result.checks.push(Check::within("rho at -1e-4", rho[3], 0.25, 0.01));
    } else {
        result.notes.push("rho limits are only checked for the uniform multiplier".into());
    }
    result.checks.push(Check::new(
        "kernel mass",
        mass_err <= 1e-6,
        format!("largest |mass - 1| {mass_err:.3e} at x in {MASS_POINTS:?}, at most 1e-6"),
    ));
    result.checks.push(Check::new(
        "drift bounds",
        violations == 0,
        format!("{violations} of {BOUND_DRAWS} draws reach 1; max phi {phi_max:.6}, max psi {psi_max:.6}"),
    ));
    Ok(result)
}
