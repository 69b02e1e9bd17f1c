//! Reproducible random streams and the elementary samplers built on them.
//!
//! Every chain owns one [`RngStream`], keyed by a shared 64-bit seed and the
//! chain's stream index. The generator is ChaCha8 with the stream index
//! selecting an independent keystream, so the output depends only on
//! `(seed, stream_index)` and not on the platform or thread layout.

use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_index);
        Self { seed, stream_index, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw strictly inside (0, 1). Zero is rejected and redrawn;
    /// one cannot occur on the 53-bit grid.
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        loop {
            let u = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if u > 0.0 {
                return u;
            }
        }
    }

    #[inline]
    pub(crate) fn standard_normal(&mut self) -> f64 {
        // Marsaglia polar method; the second variate is discarded so that
        // the stream carries no hidden state.
        loop {
            let a = 2.0 * self.uniform01() - 1.0;
            let b = 2.0 * self.uniform01() - 1.0;
            let s = a * a + b * b;
            if s < 1.0 && s > 0.0 {
                return a * libm::sqrt(-2.0 * libm::log(s) / s);
            }
        }
    }

    pub fn sample_normal(&mut self, mu: f64, sigma: f64) -> Result<f64> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter { name: "sigma", value: sigma });
        }
        Ok(mu + sigma * self.standard_normal())
    }

    /// Gamma(shape, 1) by Marsaglia and Tsang; shapes below one use the
    /// `Gamma(a + 1) * U^(1/a)` boost.
    pub fn sample_gamma(&mut self, shape: f64) -> Result<f64> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::InvalidParameter { name: "shape", value: shape });
        }
        Ok(self.gamma_unchecked(shape))
    }

    pub(crate) fn gamma_unchecked(&mut self, shape: f64) -> f64 {
        if shape < 1.0 {
            let g = self.gamma_unchecked(shape + 1.0);
            return g * libm::pow(self.uniform01(), 1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / libm::sqrt(9.0 * d);
        loop {
            let x = self.standard_normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.uniform01();
            if libm::log(u) < 0.5 * x * x + d - d * v + d * libm::log(v) {
                return d * v;
            }
        }
    }

    /// Beta(a, b) as `X / (X + Y)` with independent `X ~ Gamma(a)` and
    /// `Y ~ Gamma(b)`.
    pub fn sample_beta(&mut self, a: f64, b: f64) -> Result<f64> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter { name: "a", value: a });
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter { name: "b", value: b });
        }
        Ok(self.beta_unchecked(a, b))
    }

    pub(crate) fn beta_unchecked(&mut self, a: f64, b: f64) -> f64 {
        let x = self.gamma_unchecked(a);
        let y = self.gamma_unchecked(b);
        x / (x + y)
    }

    pub fn sample_cauchy(&mut self, loc: f64, scale: f64) -> Result<f64> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter { name: "scale", value: scale });
        }
        Ok(loc + scale * self.standard_cauchy())
    }

    #[inline]
    pub(crate) fn standard_cauchy(&mut self) -> f64 {
        libm::tan(PI * (self.uniform01() - 0.5))
    }

    /// Student-t with `df` degrees of freedom.
    pub fn sample_student_t(&mut self, df: f64) -> Result<f64> {
        if !(df > 0.0) || !df.is_finite() {
            return Err(Error::InvalidParameter { name: "df", value: df });
        }
        let z = self.standard_normal();
        let chi2 = 2.0 * self.gamma_unchecked(0.5 * df);
        Ok(z / libm::sqrt(chi2 / df))
    }
}
