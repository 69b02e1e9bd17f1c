//! Target densities, evaluated in log space.
//!
//! A state of zero density is `-inf`. Mixtures go through log-sum-exp so
//! that narrow components do not underflow away from their peak.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{log_add_exp, normal_log_pdf};
use crate::rng::RngStream;

/// Tail exponent `p` of the target: `pi(x) / pi(x e) -> |e|^p` as
/// `|x| -> inf`. Light (e.g. Gaussian) tails are `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailExponent {
    Finite(f64),
    Infinite,
}

/// Unnormalised log-density on `R^dim`.
pub trait TargetDensity {
    fn dim(&self) -> usize;

    fn log_density(&self, x: &[f64]) -> f64;

    /// Writes the gradient of the log-density into `out` and returns `true`,
    /// or returns `false` if the target has no gradient.
    fn grad_log_density(&self, _x: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    fn has_gradient(&self) -> bool {
        false
    }

    fn tail_exponent(&self) -> Option<TailExponent> {
        None
    }

    fn label(&self) -> &str;

    #[inline]
    fn log_density1(&self, x: f64) -> f64 {
        self.log_density(core::slice::from_ref(&x))
    }

    fn grad_log_density1(&self, x: f64) -> Option<f64> {
        let mut g = [0.0];
        self.grad_log_density(core::slice::from_ref(&x), &mut g).then_some(g[0])
    }
}

impl<T: TargetDensity + ?Sized> TargetDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
    fn grad_log_density(&self, x: &[f64], out: &mut [f64]) -> bool {
        (**self).grad_log_density(x, out)
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
    fn tail_exponent(&self) -> Option<TailExponent> {
        (**self).tail_exponent()
    }
    fn label(&self) -> &str {
        (**self).label()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Finite mixture of univariate normals.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMixture {
    components: Vec<MixtureComponent>,
    log_weights: Vec<f64>,
    label: String,
}

impl NormalMixture {
    /// Components are `(weight, mean, standard deviation)`; weights are
    /// normalised to sum to one.
    pub fn new(label: impl Into<String>, components: &[(f64, f64, f64)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidConfig("mixture needs at least one component".into()));
        }
        let mut total = 0.0;
        for &(w, m, s) in components {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter { name: "weight", value: w });
            }
            if !m.is_finite() {
                return Err(Error::InvalidParameter { name: "mean", value: m });
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidParameter { name: "sd", value: s });
            }
            total += w;
        }
        let components: Vec<MixtureComponent> =
            components.iter().map(|&(w, m, s)| MixtureComponent { weight: w / total, mean: m, sd: s }).collect();
        let log_weights = components.iter().map(|c| libm::log(c.weight)).collect();
        Ok(Self { components, log_weights, label: label.into() })
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    fn component_logs(&self, x: f64) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().zip(&self.log_weights).map(move |(c, lw)| lw + normal_log_pdf(x, c.mean, c.sd))
    }

    /// Normalised CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * crate::math::normal_cdf((x - c.mean) / c.sd)).sum()
    }
}

impl TargetDensity for NormalMixture {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let x = x[0];
        if x.is_nan() {
            return f64::NEG_INFINITY;
        }
        self.component_logs(x).fold(f64::NEG_INFINITY, log_add_exp)
    }

    fn grad_log_density(&self, x: &[f64], out: &mut [f64]) -> bool {
        let x0 = x[0];
        let total = self.log_density(x);
        out[0] = self
            .components
            .iter()
            .zip(self.component_logs(x0))
            .map(|(c, l)| libm::exp(l - total) * (c.mean - x0) / (c.sd * c.sd))
            .sum();
        true
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn tail_exponent(&self) -> Option<TailExponent> {
        Some(TailExponent::Infinite)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Two well separated normals at 0 and 10, equal weights, each with
/// variance 0.25.
pub fn bimodal_mixture() -> NormalMixture {
    NormalMixture::new("bimodal", &[(0.5, 0.0, 0.5), (0.5, 10.0, 0.5)]).expect("valid mixture")
}

/// Needle-in-a-haystack mixture: `N(0, 1e-4)` (variance) and `N(5, 1)`,
/// equal weights.
pub fn needle_mixture() -> NormalMixture {
    NormalMixture::new("needle", &[(0.5, 0.0, 0.01), (0.5, 5.0, 1.0)]).expect("valid mixture")
}

/// `pi(x) = (2 / pi) (1 + x^2)^-2`: a Student-t with three degrees of freedom
/// scaled by `1 / sqrt(3)`. Mean 0, variance 1, tail exponent 4.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThickTailed;

const LN_2_OVER_PI: f64 = -0.451_582_705_289_454_9;

impl ThickTailed {
    /// Exact draw from the normalised density.
    pub fn sample_exact(&self, rng: &mut RngStream) -> f64 {
        rng.sample_student_t(3.0).expect("df > 0") / libm::sqrt(3.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        thick_tailed_cdf(x)
    }
}

impl TargetDensity for ThickTailed {
    fn dim(&self) -> usize {
        1
    }

    #[inline]
    fn log_density(&self, x: &[f64]) -> f64 {
        let x = x[0];
        if x.is_nan() {
            return f64::NEG_INFINITY;
        }
        let ax = x.abs();
        if ax < 1e150 {
            LN_2_OVER_PI - 2.0 * libm::log1p(x * x)
        } else {
            // x^2 would overflow
            LN_2_OVER_PI - 4.0 * libm::log(ax)
        }
    }

    fn grad_log_density(&self, x: &[f64], out: &mut [f64]) -> bool {
        let x = x[0];
        out[0] = -4.0 * x / (1.0 + x * x);
        true
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn tail_exponent(&self) -> Option<TailExponent> {
        Some(TailExponent::Finite(4.0))
    }

    fn label(&self) -> &str {
        "thicktail"
    }
}

pub fn thick_tailed() -> ThickTailed {
    ThickTailed
}

/// CDF of [`ThickTailed`]:
/// `arctan(x) / pi + 1/2 + sin(2 arctan(x)) / (2 pi)`.
pub fn thick_tailed_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    let t = libm::atan(x);
    (t / PI + 0.5 + libm::sin(2.0 * t) / (2.0 * PI)).clamp(0.0, 1.0)
}

type LogFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Target built from closures.
pub struct FnTarget {
    dim: usize,
    label: String,
    log_density: alloc::boxed::Box<LogFn>,
    gradient: Option<alloc::boxed::Box<GradFn>>,
    tail: Option<TailExponent>,
}

impl FnTarget {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        log_density: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { dim, label: label.into(), log_density: alloc::boxed::Box::new(log_density), gradient: None, tail: None }
    }

    pub fn with_gradient(mut self, grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.gradient = Some(alloc::boxed::Box::new(grad));
        self
    }

    pub fn with_tail_exponent(mut self, tail: TailExponent) -> Self {
        self.tail = Some(tail);
        self
    }
}

impl core::fmt::Debug for FnTarget {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnTarget").field("label", &self.label).field("dim", &self.dim).finish()
    }
}

impl TargetDensity for FnTarget {
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        let v = (self.log_density)(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
    fn grad_log_density(&self, x: &[f64], out: &mut [f64]) -> bool {
        match &self.gradient {
            Some(g) => {
                g(x, out);
                true
            }
            None => false,
        }
    }
    fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }
    fn tail_exponent(&self) -> Option<TailExponent> {
        self.tail
    }
    fn label(&self) -> &str {
        &self.label
    }
}
