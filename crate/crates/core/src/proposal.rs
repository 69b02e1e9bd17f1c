//! Multiplier densities `g` on `(-1, 1) \ {0}` for the dive samplers.

use crate::error::{Error, Result};
use crate::math::{beta_log_pdf, integrate_tanh_sinh};
use crate::rng::RngStream;

/// Density of the random multiplier `e`.
///
/// `BetaMixture` puts weight `gamma` on `-e ~ Beta(a1, b1)` and `1 - gamma`
/// on `e ~ Beta(a2, b2)`. `Uniform` is the `gamma = 1/2`, all-shapes-one
/// member of that family.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)
)]
pub enum MultiplierProposal {
    #[default]
    Uniform,
    BetaMixture {
        gamma: f64,
        a1: f64,
        b1: f64,
        a2: f64,
        b2: f64,
    },
}

/// Exponent `s0` with `int |e|^-s0 g(e) de < inf`, and that integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityWitness {
    pub s0: f64,
    pub integral: f64,
}

impl MultiplierProposal {
    pub fn beta_mixture(gamma: f64, a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self> {
        let p = Self::BetaMixture { gamma, a1, b1, a2, b2 };
        p.validate()?;
        Ok(p)
    }

    /// Same Beta shapes on both branches, positive branch weighted `1 - gamma`.
    pub fn symmetric_shapes(gamma: f64, a: f64, b: f64) -> Result<Self> {
        Self::beta_mixture(gamma, a, b, a, b)
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::BetaMixture { gamma, a1, b1, a2, b2 } = *self {
            if !(gamma > 0.0 && gamma < 1.0) {
                return Err(Error::InvalidParameter { name: "gamma", value: gamma });
            }
            for (name, v) in [("a1", a1), ("b1", b1), ("a2", a2), ("b2", b2)] {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidParameter { name, value: v });
                }
            }
        }
        Ok(())
    }

    /// Probability of a negative multiplier.
    pub fn negative_weight(&self) -> f64 {
        match *self {
            Self::Uniform => 0.5,
            Self::BetaMixture { gamma, .. } => gamma,
        }
    }

    /// Draws `e` in `(-1, 1) \ {0}`. Exact zeros and `+-1` are redrawn.
    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        loop {
            let e = match *self {
                Self::Uniform => 2.0 * rng.uniform01() - 1.0,
                Self::BetaMixture { gamma, a1, b1, a2, b2 } => {
                    if rng.uniform01() < gamma {
                        -rng.beta_unchecked(a1, b1)
                    } else {
                        rng.beta_unchecked(a2, b2)
                    }
                }
            };
            if e != 0.0 && e.abs() < 1.0 {
                return e;
            }
        }
    }

    pub fn log_density(&self, e: f64) -> f64 {
        if !(e > -1.0 && e < 1.0) || e == 0.0 {
            return f64::NEG_INFINITY;
        }
        match *self {
            Self::Uniform => -core::f64::consts::LN_2,
            Self::BetaMixture { gamma, a1, b1, a2, b2 } => {
                if e < 0.0 {
                    libm::log(gamma) + beta_log_pdf(-e, a1, b1)
                } else {
                    libm::log1p(-gamma) + beta_log_pdf(e, a2, b2)
                }
            }
        }
    }

    pub fn density(&self, e: f64) -> f64 {
        libm::exp(self.log_density(e))
    }

    /// `int |e|^power g(e) de` over both branches, by quadrature.
    pub fn abs_moment(&self, power: f64) -> f64 {
        let neg = integrate_tanh_sinh(|t| libm::pow(t, power) * self.density(-t), 0.0, 1.0, 1e-13);
        let pos = integrate_tanh_sinh(|t| libm::pow(t, power) * self.density(t), 0.0, 1.0, 1e-13);
        neg.value + pos.value
    }

    /// Exponent `s0 = min(1/2, a_min / 2)` for which `|e|^-s0 g(e)` is
    /// integrable near zero, with the integral checked by quadrature.
    /// `None` if the quadrature does not come back finite.
    pub fn regularity_witness(&self) -> Option<RegularityWitness> {
        let s0 = match *self {
            Self::Uniform => 0.5,
            Self::BetaMixture { a1, a2, .. } => (0.5 * a1.min(a2)).min(0.5),
        };
        let integral = self.abs_moment(-s0);
        (integral.is_finite() && integral > 0.0).then_some(RegularityWitness { s0, integral })
    }
}

/// `|e|^s + |e|^(1-s) - |e|`, which stays below one for `s` in `(0, 1)`.
pub fn drift_bound_phi(s: f64, e: f64) -> f64 {
    let a = e.abs();
    libm::pow(a, s) + libm::pow(a, 1.0 - s) - a
}

/// `|e|^(ps) + |e|^(p - ps - 1) - |e|^(p-1)`, below one for
/// `0 < s < 1/2 - 1/(2p)`. Identically zero for `p = inf`.
pub fn drift_bound_psi(p: f64, s: f64, e: f64) -> f64 {
    if p == f64::INFINITY {
        return 0.0;
    }
    let a = e.abs();
    libm::pow(a, p * s) + libm::pow(a, p - p * s - 1.0) - libm::pow(a, p - 1.0)
}
