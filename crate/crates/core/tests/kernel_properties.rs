use randive_core::diagnostics::{ks_distance, proposal_kernel_density};
use randive_core::math::integrate_tanh_sinh;
use randive_core::sampler::{rdmh_accept_log, rdmh_step, DiveDirection};
use randive_core::target::{thick_tailed, thick_tailed_cdf, ThickTailed};
use randive_core::{MultiplierProposal, RngStream, TargetDensity};

fn alpha(x: f64, y: f64, t: &ThickTailed) -> f64 {
    let (eps, dir) = if y.abs() < x.abs() { (y / x, DiveDirection::Inner) } else { (x / y, DiveDirection::Outer) };
    rdmh_accept_log(x, y, eps, dir, t).unwrap().exp()
}

fn random_state(r: &mut RngStream) -> f64 {
    let mag = (2.0 * r.sample_normal(0.0, 1.0).unwrap()).exp();
    if r.uniform01() < 0.5 {
        -mag
    } else {
        mag
    }
}

fn max_balance_error(g: &MultiplierProposal, seed: u64) -> f64 {
    let t = thick_tailed();
    let mut r = RngStream::new(seed, 0);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 1000 {
        let (x, y) = (random_state(&mut r), random_state(&mut r));
        if x.abs() == y.abs() {
            continue;
        }
        let fwd = t.log_density1(x).exp() * proposal_kernel_density(x, y, g) * alpha(x, y, &t);
        let back = t.log_density1(y).exp() * proposal_kernel_density(y, x, g) * alpha(y, x, &t);
        worst = worst.max((fwd - back).abs() / fwd.max(back));
        checked += 1;
    }
    worst
}

#[test]
fn detailed_balance_thick_tailed_uniform() {
    let worst = max_balance_error(&MultiplierProposal::Uniform, 101);
    assert!(worst < 1e-12, "max relative error {worst}");
}

#[test]
fn detailed_balance_beta_mixture() {
    let g = MultiplierProposal::beta_mixture(0.3, 0.5, 1.0, 2.0, 0.5).unwrap();
    let worst = max_balance_error(&g, 102);
    assert!(worst < 1e-12, "max relative error {worst}");
}

#[test]
fn stationarity_one_step_from_exact_draws() {
    let t = thick_tailed();
    let g = MultiplierProposal::Uniform;
    let mut draws = RngStream::new(103, 0);
    let mut steps = RngStream::new(103, 1);
    let moved: Vec<f64> = (0..10_000)
        .map(|_| {
            let x = t.sample_exact(&mut draws);
            rdmh_step(x, &t, &g, &mut steps).unwrap().0
        })
        .collect();
    let ks = ks_distance(&moved, thick_tailed_cdf).unwrap();
    assert!(ks.pvalue > 1e-3, "{ks:?}");
}

#[test]
fn multiplier_draws_chi_square() {
    // 50 equal-width bins on (-1, 1); expected counts from the density by
    // quadrature; chi2(49) upper 0.001 point is 85.3506
    const CRIT: f64 = 85.350_564_608_593_05;
    let props = [
        MultiplierProposal::Uniform,
        MultiplierProposal::symmetric_shapes(0.15, 0.5, 1.0).unwrap(),
        MultiplierProposal::symmetric_shapes(0.5, 0.5, 0.5).unwrap(),
        MultiplierProposal::beta_mixture(0.2, 3.0, 0.5, 3.0, 0.5).unwrap(),
    ];
    let n = 200_000;
    for (k, p) in props.iter().enumerate() {
        let mut r = RngStream::new(104, k as u64);
        let mut counts = [0usize; 50];
        for _ in 0..n {
            let e = p.sample(&mut r);
            counts[(((e + 1.0) * 25.0) as usize).min(49)] += 1;
        }
        let mut chi2 = 0.0;
        for (b, &c) in counts.iter().enumerate() {
            let lo = -1.0 + b as f64 / 25.0;
            let hi = lo + 1.0 / 25.0;
            let prob = integrate_tanh_sinh(|e| p.density(e), lo, hi, 1e-12).value;
            let want = prob * n as f64;
            chi2 += (c as f64 - want).powi(2) / want;
        }
        assert!(chi2 < CRIT, "{p:?}: chi2 = {chi2}");
    }
}
