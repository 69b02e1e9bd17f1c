//! Special functions and one-dimensional quadrature.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

/// `log(exp(a) + exp(b))` without overflow; `-inf` when both are `-inf`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + libm::log1p(libm::exp(-(a - b).abs()))
}

/// `log(sum(exp(v)))` over a slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    let s: f64 = values.iter().map(|&v| libm::exp(v - m)).sum();
    m + libm::log(s)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `log(Phi(z))`, accurate deep in the lower tail.
pub fn normal_log_cdf(z: f64) -> f64 {
    if z > -30.0 {
        libm::log(normal_cdf(z))
    } else {
        // Mills ratio expansion.
        let z2 = z * z;
        let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
        -0.5 * z2 - libm::log(-z) - 0.5 * libm::log(2.0 * PI) + libm::log(series)
    }
}

/// Inverse of the standard normal CDF for `p` in (0, 1). Acklam's rational
/// approximation followed by one Halley step.
pub fn normal_quantile(p: f64) -> f64 {
    if !(p > 0.0 && p < 1.0) {
        return match p {
            0.0 => f64::NEG_INFINITY,
            1.0 => f64::INFINITY,
            _ => f64::NAN,
        };
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < 0.02425 {
        tail(libm::sqrt(-2.0 * libm::log(p)))
    } else if p > 1.0 - 0.02425 {
        -tail(libm::sqrt(-2.0 * libm::log1p(-p)))
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * SQRT_2PI * libm::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

/// Normal log-density with standard deviation `sd`.
#[inline]
pub fn normal_log_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - libm::log(sd * SQRT_2PI)
}

/// Log-density of Beta(a, b) on (0, 1); `-inf` outside.
pub fn beta_log_pdf(x: f64, a: f64, b: f64) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        return f64::NEG_INFINITY;
    }
    (a - 1.0) * libm::log(x) + (b - 1.0) * libm::log1p(-x) - ln_beta(a, b)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Survival function of the asymptotic Kolmogorov distribution,
/// `P(K > lambda)`.
///
/// Uses the alternating series `2 sum (-1)^(k-1) exp(-2 k^2 lambda^2)`
/// (100 terms) above 1.18 and the Jacobi theta form of the CDF below, where
/// the alternating series converges too slowly.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let w = PI * PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for j in 0..100 {
            let k = (2 * j + 1) as f64;
            let term = libm::exp(-k * k * w);
            cdf += term;
            if term < 1e-300 {
                break;
            }
        }
        cdf *= libm::sqrt(2.0 * PI) / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * libm::exp(-2.0 * k * k * lambda * lambda);
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

// 15-point Gauss-Kronrod abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of a quadrature: value and an estimate of the absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Adaptive Gauss-Kronrod quadrature on `[a, b]`. Either bound may be
/// infinite; infinite ranges are mapped onto finite ones first.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0 };
    }
    if a > b {
        let q = integrate(f, b, a, tol);
        return Quadrature { value: -q.value, error: q.error };
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(&mut f, a, b, tol),
        // x = a + t / (1 - t), t in [0, 1)
        (true, false) => adaptive(
            &mut |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            },
            0.0,
            1.0,
            tol,
        ),
        (false, true) => adaptive(
            &mut |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - t;
                f(b - t / s) / (s * s)
            },
            0.0,
            1.0,
            tol,
        ),
        // x = t / (1 - t^2), t in (-1, 1)
        (false, false) => adaptive(
            &mut |t: f64| {
                let s = 1.0 - t * t;
                if s <= 0.0 {
                    return 0.0;
                }
                f(t / s) * (1.0 + t * t) / (s * s)
            },
            -1.0,
            1.0,
            tol,
        ),
    }
}

fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> Quadrature {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gauss_kronrod(f, a, b);
    let mut pieces: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    pieces.push((a, b, v, e));
    let mut total = v;
    let mut err = e;
    while err > tol.max(tol * total.abs()) && pieces.len() < MAX_INTERVALS {
        // split the interval with the largest error
        let (idx, _) =
            pieces
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, pv, pe) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            pieces.push((lo, hi, pv, 0.0));
            err -= pe;
            continue;
        }
        let (v1, e1) = gauss_kronrod(f, lo, mid);
        let (v2, e2) = gauss_kronrod(f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    // re-sum to shed accumulated rounding from the running updates
    let value = pieces.iter().map(|p| p.2).sum();
    let error = pieces.iter().map(|p| p.3).sum();
    Quadrature { value, error }
}

/// Tanh-sinh (double exponential) quadrature on a finite `[a, b]`.
///
/// Tolerates integrable singularities at either endpoint: `f` is never
/// evaluated at `a` or `b` themselves.
pub fn integrate_tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    const T_MAX: f64 = 6.5;
    const MAX_LEVEL: u32 = 12;
    let width = b - a;
    let half_pi = 0.5 * PI;

    // Node at parameter t: returns (f(x) * weight) or 0 if the node rounds
    // onto an endpoint.
    let mut node = |t: f64| -> f64 {
        let u = half_pi * libm::sinh(t);
        let cu = libm::cosh(u);
        // distance from the nearer endpoint, as a fraction of the width
        let near = 1.0 / (libm::exp(2.0 * u.abs()) + 1.0);
        if near == 0.0 || !near.is_finite() {
            return 0.0;
        }
        let x = if t < 0.0 { a + width * near } else { b - width * near };
        if x <= a || x >= b {
            return 0.0;
        }
        let w = 0.5 * width * half_pi * libm::cosh(t) / (cu * cu);
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };

    let mut h = 1.0;
    let mut sum = node(0.0);
    let mut k = 1.0;
    while k * h <= T_MAX {
        sum += node(k * h) + node(-k * h);
        k += 1.0;
    }
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        // only the new odd-indexed nodes
        let mut k = 1.0;
        while k * h <= T_MAX {
            sum += node(k * h) + node(-k * h);
            k += 2.0;
        }
        let next = sum * h;
        error = (next - estimate).abs();
        estimate = next;
        if error <= tol.max(tol * estimate.abs()) {
            break;
        }
    }
    Quadrature { value: estimate, error }
}

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;

    #[test]
    fn log_add_exp_handles_infinities() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert!((log_add_exp(0.0, 0.0) - LN_2).abs() < 1e-15);
        assert!((log_add_exp(-1000.0, 0.0)).abs() < 1e-15);
        assert!((log_sum_exp(&[1.0, 2.0, 3.0]) - 3.407_605_964_444_38).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_matches_reference() {
        // scipy.stats.kstwobign.sf
        let cases = [
            (0.3, 0.999_990_694_198_665_5),
            (0.5, 0.963_945_243_664_875_1),
            (1.0, 0.269_999_671_677_354_56),
            (1.36, 0.049_485_876_755_377_876),
            (2.0, 0.000_670_925_255_779_695_3),
        ];
        for (lam, want) in cases {
            assert!((kolmogorov_sf(lam) - want).abs() < 1e-10, "lambda {lam}");
        }
    }

    #[test]
    fn normal_log_cdf_is_continuous_at_switch() {
        let lo = normal_log_cdf(-30.0 - 1e-9);
        let hi = normal_log_cdf(-30.0 + 1e-9);
        assert!((lo - hi).abs() < 1e-6);
        assert!((normal_log_cdf(0.0) + LN_2).abs() < 1e-15);
    }

    #[test]
    fn quadrature_rules() {
        let q = integrate(|x| libm::exp(-0.5 * x * x), f64::NEG_INFINITY, f64::INFINITY, 1e-12);
        assert!((q.value - SQRT_2PI).abs() < 1e-10);
        let q = integrate(|x| 1.0 / (1.0 + x * x), 0.0, f64::INFINITY, 1e-12);
        assert!((q.value - 0.5 * PI).abs() < 1e-10);
        // x^-1/2 on (0, 1] integrates to 2
        let q = integrate_tanh_sinh(|x| 1.0 / libm::sqrt(x), 0.0, 1.0, 1e-12);
        assert!((q.value - 2.0).abs() < 1e-9, "{q:?}");
        // symmetric, so only the half with the singularity at zero is needed;
        // near one the spacing of doubles hides mass of order sqrt(eps)
        let q = integrate_tanh_sinh(|x| libm::exp(beta_log_pdf(x, 0.5, 0.5)), 0.0, 0.5, 1e-12);
        assert!((2.0 * q.value - 1.0).abs() < 1e-9, "{q:?}");
    }

    #[test]
    fn normal_quantile_reference() {
        for &(p, want) in &[
            (0.975, 1.959_963_984_540_054),
            (1e-10, -6.361_340_902_404_056),
            (0.3, -0.524_400_512_708_040_7),
            (0.5, 0.0),
        ] {
            assert!((normal_quantile(p) - want).abs() < 1e-12, "{p}");
        }
        assert_eq!(normal_quantile(0.0), f64::NEG_INFINITY);
        assert!(normal_quantile(1.5).is_nan());
    }
}
