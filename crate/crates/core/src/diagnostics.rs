//! Kernel probes and chain diagnostics.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{integrate, integrate_tanh_sinh, kolmogorov_sf, normal_cdf, normal_log_cdf};
use crate::proposal::MultiplierProposal;
use crate::rng::RngStream;
use crate::sampler::{propose_dive, rdmh_accept_log, DiveDirection, Trace};
use crate::target::TargetDensity;

/// Density of the dive proposal at `y` from `x`:
/// `g(y/x) / (2|x|)` for `|y| < |x|`, `g(x/y) |x| / (2 y^2)` for
/// `|y| > |x|`, and zero on `|y| = |x|`.
pub fn proposal_kernel_density(x: f64, y: f64, proposal: &MultiplierProposal) -> f64 {
    let (ax, ay) = (x.abs(), y.abs());
    if x == 0.0 || y == 0.0 || ax == ay {
        0.0
    } else if ay < ax {
        0.5 * proposal.density(y / x) / ax
    } else {
        0.5 * proposal.density(x / y) * ax / (y * y)
    }
}

/// Total mass of `y -> q(x -> y)` by quadrature. The inner pieces are
/// integrated over `(-|x|, 0)` and `(0, |x|)`; the outer pieces over
/// `|y| > |x|` after substituting `y = +-|x| / t`, `t` in `(0, 1)`.
pub fn proposal_kernel_mass(x: f64, proposal: &MultiplierProposal, tol: f64) -> f64 {
    let ax = x.abs();
    let q = |y: f64| proposal_kernel_density(x, y, proposal);
    let inner = integrate_tanh_sinh(q, -ax, 0.0, tol).value + integrate_tanh_sinh(q, 0.0, ax, tol).value;
    let outer = |sign: f64| {
        integrate_tanh_sinh(
            |t| {
                let y = sign * ax / t;
                q(y) * ax / (t * t)
            },
            0.0,
            1.0,
            tol,
        )
        .value
    };
    inner + outer(1.0) + outer(-1.0)
}

/// Monte Carlo estimate of the rejection probability at `x`, averaging
/// `1 - alpha` over `n_mc` proposed dives.
pub fn rejection_prob_estimate<T: TargetDensity + ?Sized>(
    x: f64,
    target: &T,
    proposal: &MultiplierProposal,
    n_mc: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    if x == 0.0 || !x.is_finite() {
        return Err(Error::InvalidParameter { name: "x", value: x });
    }
    let lp_x = target.log_density1(x);
    if !lp_x.is_finite() {
        return Err(Error::InvalidState(alloc::format!("log density is {lp_x} at {x}")));
    }
    let mut sum = 0.0;
    for _ in 0..n_mc {
        let (outcome, _) = propose_dive(x, lp_x, target, proposal, rng);
        sum += 1.0 - libm::exp(outcome.log_alpha);
    }
    Ok((sum / n_mc as f64).clamp(0.0, 1.0))
}

/// Relative gap `|f - b| / max(f, b)` between the flows
/// `pi(x) q(x -> y) alpha(x, y)` and `pi(y) q(y -> x) alpha(y, x)`.
pub fn detailed_balance_error<T: TargetDensity + ?Sized>(
    x: f64,
    y: f64,
    target: &T,
    proposal: &MultiplierProposal,
) -> Result<f64> {
    if x == 0.0 || y == 0.0 || x.abs() == y.abs() {
        return Err(Error::Domain(alloc::format!("no dive between {x} and {y}")));
    }
    let flow = |from: f64, to: f64| -> Result<f64> {
        let (eps, dir) =
            if to.abs() < from.abs() { (to / from, DiveDirection::Inner) } else { (from / to, DiveDirection::Outer) };
        let alpha = libm::exp(rdmh_accept_log(from, to, eps, dir, target)?.min(0.0));
        Ok(libm::exp(target.log_density1(from)) * proposal_kernel_density(from, to, proposal) * alpha)
    };
    let (f, b) = (flow(x, y)?, flow(y, x)?);
    if f == 0.0 && b == 0.0 {
        return Ok(0.0);
    }
    Ok((f - b).abs() / f.max(b))
}

/// Sample autocorrelations at lags `0..=max_lag`, with the biased `1/n`
/// autocovariance.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= max_lag {
        return Err(Error::SampleTooSmall { needed: max_lag + 1, got: n });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0: f64 = centred.iter().map(|d| d * d).sum();
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::DegenerateSeries);
    }
    Ok((0..=max_lag)
        .map(|k| centred[..n - k].iter().zip(&centred[k..]).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KsResult {
    pub stat: f64,
    pub pvalue: f64,
}

/// Kolmogorov-Smirnov distance `sup |F_n - F|` and its asymptotic p-value.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsResult> {
    let n = sample.len();
    if n == 0 {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    let stat = d.clamp(0.0, 1.0);
    Ok(KsResult { stat, pvalue: kolmogorov_sf(libm::sqrt(nf) * stat) })
}

/// Composite normality tests with mean and variance estimated from the
/// sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalityTests {
    pub ad_stat: f64,
    pub ad_p: f64,
    pub cvm_stat: f64,
    pub cvm_p: f64,
    pub lillie_stat: f64,
    pub lillie_p: f64,
}

impl NormalityTests {
    pub fn min_p(&self) -> f64 {
        self.ad_p.min(self.cvm_p).min(self.lillie_p)
    }
}

/// Anderson-Darling, Cramer-von Mises and Lilliefors tests. Needs at least
/// eight values and a positive sample variance.
pub fn normality_tests(sample: &[f64]) -> Result<NormalityTests> {
    let n = sample.len();
    if n < 8 {
        return Err(Error::SampleTooSmall { needed: 8, got: n });
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    let sd = libm::sqrt(var);
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::DegenerateSeries);
    }
    let mut z: Vec<f64> = sample.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let p: Vec<f64> = z.iter().map(|&v| normal_cdf(v)).collect();

    let (ad_stat, ad_p) = anderson_darling(&z);
    let (cvm_stat, cvm_p) = cramer_von_mises(&p);
    let (lillie_stat, lillie_p) = lilliefors(&p);
    Ok(NormalityTests { ad_stat, ad_p, cvm_stat, cvm_p, lillie_stat, lillie_p })
}

fn anderson_darling(z: &[f64]) -> (f64, f64) {
    let n = z.len();
    let nf = n as f64;
    let h: f64 = (0..n).map(|i| (2 * i + 1) as f64 * (normal_log_cdf(z[i]) + normal_log_cdf(-z[n - 1 - i]))).sum();
    let a = -nf - h / nf;
    let aa = (1.0 + 0.75 / nf + 2.25 / (nf * nf)) * a;
    let p = if aa < 0.2 {
        1.0 - libm::exp(-13.436 + 101.14 * aa - 223.73 * aa * aa)
    } else if aa < 0.34 {
        1.0 - libm::exp(-8.318 + 42.796 * aa - 59.938 * aa * aa)
    } else if aa < 0.6 {
        libm::exp(0.9177 - 4.279 * aa - 1.38 * aa * aa)
    } else if aa < 10.0 {
        libm::exp(1.2937 - 5.709 * aa + 0.0186 * aa * aa)
    } else {
        3.7e-24
    };
    (a, p.clamp(0.0, 1.0))
}

fn cramer_von_mises(p: &[f64]) -> (f64, f64) {
    let nf = p.len() as f64;
    let w = 1.0 / (12.0 * nf)
        + p.iter()
            .enumerate()
            .map(|(i, &pi)| {
                let d = pi - (2 * i + 1) as f64 / (2.0 * nf);
                d * d
            })
            .sum::<f64>();
    let ww = (1.0 + 0.5 / nf) * w;
    let pv = if ww < 0.0275 {
        1.0 - libm::exp(-13.953 + 775.5 * ww - 12542.61 * ww * ww)
    } else if ww < 0.051 {
        1.0 - libm::exp(-5.903 + 179.546 * ww - 1515.29 * ww * ww)
    } else if ww < 0.092 {
        libm::exp(0.886 - 31.62 * ww + 10.897 * ww * ww)
    } else if ww < 1.1 {
        libm::exp(1.111 - 34.242 * ww + 12.832 * ww * ww)
    } else {
        7.37e-10
    };
    (w, pv.clamp(0.0, 1.0))
}

fn lilliefors(p: &[f64]) -> (f64, f64) {
    let n = p.len();
    let nf = n as f64;
    let (mut d_plus, mut d_minus) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (i, &pi) in p.iter().enumerate() {
        d_plus = d_plus.max((i + 1) as f64 / nf - pi);
        d_minus = d_minus.max(pi - i as f64 / nf);
    }
    let k = d_plus.max(d_minus);
    let (kd, nd) = if n <= 100 { (k, nf) } else { (k * libm::pow(nf / 100.0, 0.49), 100.0) };
    let mut pv = libm::exp(
        -7.01256 * kd * kd * (nd + 2.78019) + 2.99587 * kd * libm::sqrt(nd + 2.78019) - 0.122119
            + 0.974598 / libm::sqrt(nd)
            + 1.67997 / nd,
    );
    if pv > 0.1 {
        let s = libm::sqrt(nf);
        let kk = (s - 0.01 + 0.85 / s) * k;
        let poly = |c: [f64; 5]| c[0] + kk * (c[1] + kk * (c[2] + kk * (c[3] + kk * c[4])));
        pv = if kk <= 0.302 {
            1.0
        } else if kk <= 0.5 {
            poly([2.76773, -19.828315, 80.709644, -138.55152, 81.218052])
        } else if kk <= 0.9 {
            poly([-4.901232, 40.662806, -97.490286, 94.029866, -32.355711])
        } else if kk <= 1.31 {
            poly([6.198765, -19.558097, 23.186922, -12.024956, 2.355583])
        } else {
            0.0
        };
    }
    (k, pv.clamp(0.0, 1.0))
}

/// Mean of `h` over the recorded states of a trace.
pub fn ergodic_mean<H: Fn(&[f64]) -> f64>(trace: &Trace, h: H) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    Ok(trace.iter_states().map(h).sum::<f64>() / trace.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsReport {
    pub acceptance_rate: f64,
    /// Empty when the recorded series is constant.
    pub acf: Vec<f64>,
    pub ergodic_mean: f64,
    pub ks_stat: Option<f64>,
    pub ks_pvalue: Option<f64>,
    pub normality: Option<NormalityTests>,
}

impl DiagnosticsReport {
    /// Report on coordinate `coord` of a trace. `cdf` adds the KS distance
    /// against that distribution.
    pub fn for_trace(trace: &Trace, coord: usize, max_lag: usize, cdf: Option<&dyn Fn(f64) -> f64>) -> Result<Self> {
        let values = trace.coordinate(coord);
        let ergodic_mean = ergodic_mean(trace, |s| s[coord])?;
        let acf = match acf(&values, max_lag.min(values.len().saturating_sub(1))) {
            Ok(a) => a,
            Err(Error::DegenerateSeries) => Vec::new(),
            Err(e) => return Err(e),
        };
        let ks = cdf.map(|f| ks_distance(&values, f)).transpose()?;
        Ok(Self {
            acceptance_rate: trace.acceptance_rate,
            acf,
            ergodic_mean,
            ks_stat: ks.map(|k| k.stat),
            ks_pvalue: ks.map(|k| k.pvalue),
            normality: None,
        })
    }
}

/// [`proposal_kernel_mass`] with adaptive Gauss-Kronrod on the four pieces,
/// infinite ranges mapped internally. Only suited to `g` without endpoint
/// singularities.
pub fn proposal_kernel_mass_gk(x: f64, proposal: &MultiplierProposal, tol: f64) -> f64 {
    let ax = x.abs();
    let q = |y: f64| proposal_kernel_density(x, y, proposal);
    integrate(q, f64::NEG_INFINITY, -ax, tol).value
        + integrate(q, -ax, 0.0, tol).value
        + integrate(q, 0.0, ax, tol).value
        + integrate(q, ax, f64::INFINITY, tol).value
}
