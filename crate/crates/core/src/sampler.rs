//! Metropolis-Hastings transitions and the chain driver.
//!
//! All acceptance arithmetic is done with log-densities; `min(ratio, 1)`
//! becomes `min(log_ratio, 0)`. A proposal that lands on a non-finite
//! value, or on exactly zero for the dive samplers, gets `log_alpha = -inf`
//! and is rejected.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::proposal::MultiplierProposal;
use crate::rng::RngStream;
use crate::target::TargetDensity;

/// Inner dives shrink the state (`x e`), outer dives grow it (`x / e`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiveDirection {
    Inner,
    Outer,
}

impl DiveDirection {
    /// `u < 1/2` selects an inner dive.
    #[inline]
    pub fn from_uniform(u: f64) -> Self {
        if u < 0.5 {
            Self::Inner
        } else {
            Self::Outer
        }
    }

    #[inline]
    pub fn apply(self, x: f64, eps: f64) -> f64 {
        match self {
            Self::Inner => x * eps,
            Self::Outer => x / eps,
        }
    }

    /// Log-Jacobian of the dive map: `log|e|` inner, `-log|e|` outer.
    #[inline]
    fn log_jacobian(self, eps: f64) -> f64 {
        match self {
            Self::Inner => libm::log(eps.abs()),
            Self::Outer => -libm::log(eps.abs()),
        }
    }
}

/// One proposed dive and its log acceptance probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiveOutcome {
    pub proposed: f64,
    pub direction: DiveDirection,
    pub log_alpha: f64,
}

#[inline]
fn clamp_log_alpha(log_ratio: f64) -> f64 {
    if log_ratio.is_nan() {
        f64::NEG_INFINITY
    } else {
        log_ratio.min(0.0)
    }
}

#[inline]
fn valid_dive_state(y: f64) -> bool {
    y != 0.0 && y.is_finite()
}

fn check_multiplier(eps: f64) -> Result<()> {
    if eps > -1.0 && eps < 1.0 && eps != 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "eps", value: eps })
    }
}

fn current_log_density<T: TargetDensity + ?Sized>(target: &T, x: &[f64]) -> Result<f64> {
    let lp = target.log_density(x);
    if lp.is_finite() {
        Ok(lp)
    } else {
        Err(Error::InvalidState(format!("log density of `{}` is {lp} at {x:?}", target.label())))
    }
}

fn check_nonzero(x: &[f64]) -> Result<()> {
    if x.iter().any(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::InvalidState(format!("dive samplers need finite nonzero coordinates, got {x:?}")));
    }
    Ok(())
}

/// Log acceptance probability of a one-dimensional dive from `x` to
/// `x_prime` with multiplier `eps`:
/// `min(0, log pi(x') - log pi(x) +- log|eps|)`, plus for inner dives,
/// minus for outer.
pub fn rdmh_accept_log<T: TargetDensity + ?Sized>(
    x: f64,
    x_prime: f64,
    eps: f64,
    direction: DiveDirection,
    target: &T,
) -> Result<f64> {
    check_nonzero(&[x])?;
    check_multiplier(eps)?;
    let lp_x = current_log_density(target, &[x])?;
    if !valid_dive_state(x_prime) {
        return Ok(f64::NEG_INFINITY);
    }
    let lp_y = target.log_density1(x_prime);
    Ok(clamp_log_alpha(lp_y - lp_x + direction.log_jacobian(eps)))
}

/// State after one transition, with its cached log-density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: f64,
    pub log_density: f64,
    pub accepted: bool,
}

/// Proposes a dive from `x` (log-density `lp_x`) without deciding on it.
pub fn propose_dive<T: TargetDensity + ?Sized>(
    x: f64,
    lp_x: f64,
    target: &T,
    proposal: &MultiplierProposal,
    rng: &mut RngStream,
) -> (DiveOutcome, f64) {
    let eps = proposal.sample(rng);
    let direction = DiveDirection::from_uniform(rng.uniform01());
    let proposed = direction.apply(x, eps);
    if !valid_dive_state(proposed) {
        return (DiveOutcome { proposed, direction, log_alpha: f64::NEG_INFINITY }, f64::NEG_INFINITY);
    }
    let lp_y = target.log_density1(proposed);
    let log_alpha = clamp_log_alpha(lp_y - lp_x + direction.log_jacobian(eps));
    (DiveOutcome { proposed, direction, log_alpha }, lp_y)
}

/// One RDMH transition from a state whose log-density is already known.
#[inline]
pub fn rdmh_transition<T: TargetDensity + ?Sized>(
    x: f64,
    lp_x: f64,
    target: &T,
    proposal: &MultiplierProposal,
    rng: &mut RngStream,
) -> Step {
    let (outcome, lp_y) = propose_dive(x, lp_x, target, proposal, rng);
    // separate uniform for the accept decision
    if libm::log(rng.uniform01()) < outcome.log_alpha {
        Step { state: outcome.proposed, log_density: lp_y, accepted: true }
    } else {
        Step { state: x, log_density: lp_x, accepted: false }
    }
}

/// One RDMH step on the real line. Returns the next state and whether the
/// dive was accepted.
pub fn rdmh_step<T: TargetDensity + ?Sized>(
    x: f64,
    target: &T,
    proposal: &MultiplierProposal,
    rng: &mut RngStream,
) -> Result<(f64, bool)> {
    check_nonzero(&[x])?;
    let lp_x = current_log_density(target, &[x])?;
    let s = rdmh_transition(x, lp_x, target, proposal, rng);
    Ok((s.state, s.accepted))
}

fn proposal_for(proposals: &[MultiplierProposal], i: usize) -> &MultiplierProposal {
    if proposals.len() == 1 {
        &proposals[0]
    } else {
        &proposals[i]
    }
}

/// Joint RDMH move on `R^k`. `x` is overwritten with the next state and
/// `lp_x` with its log-density; `scratch` must have length `k`.
pub fn rdmh_mv_transition<T: TargetDensity + ?Sized>(
    x: &mut [f64],
    lp_x: &mut f64,
    scratch: &mut [f64],
    target: &T,
    proposals: &[MultiplierProposal],
    rng: &mut RngStream,
) -> bool {
    let mut log_jac = 0.0;
    let mut valid = true;
    for i in 0..x.len() {
        let eps = proposal_for(proposals, i).sample(rng);
        let direction = DiveDirection::from_uniform(rng.uniform01());
        scratch[i] = direction.apply(x[i], eps);
        valid &= valid_dive_state(scratch[i]);
        // Jacobian magnitude |prod_I e_i / prod_notI e_j|
        log_jac += direction.log_jacobian(eps);
    }
    let (log_alpha, lp_y) = if valid {
        let lp_y = target.log_density(scratch);
        (clamp_log_alpha(lp_y - *lp_x + log_jac), lp_y)
    } else {
        (f64::NEG_INFINITY, f64::NEG_INFINITY)
    };
    if libm::log(rng.uniform01()) < log_alpha {
        x.copy_from_slice(scratch);
        *lp_x = lp_y;
        true
    } else {
        false
    }
}

/// Joint RDMH step on `R^k` with one multiplier per coordinate. A single
/// proposal is shared by all coordinates.
pub fn rdmh_step_multivariate<T: TargetDensity + ?Sized>(
    x: &[f64],
    target: &T,
    proposals: &[MultiplierProposal],
    rng: &mut RngStream,
) -> Result<(Vec<f64>, bool)> {
    check_proposal_count(proposals, x.len())?;
    check_nonzero(x)?;
    let mut lp = current_log_density(target, x)?;
    let mut next = x.to_vec();
    let mut scratch = vec![0.0; x.len()];
    let accepted = rdmh_mv_transition(&mut next, &mut lp, &mut scratch, target, proposals, rng);
    Ok((next, accepted))
}

/// Updates each coordinate in turn with a one-dimensional dive against the
/// joint density, holding the others at their newest values. Writes the
/// per-coordinate accept flags into `accepted`.
pub fn rdmh_cw_transition<T: TargetDensity + ?Sized>(
    x: &mut [f64],
    lp_x: &mut f64,
    scratch: &mut [f64],
    accepted: &mut [bool],
    target: &T,
    proposals: &[MultiplierProposal],
    rng: &mut RngStream,
) {
    scratch.copy_from_slice(x);
    for i in 0..x.len() {
        let eps = proposal_for(proposals, i).sample(rng);
        let direction = DiveDirection::from_uniform(rng.uniform01());
        let yi = direction.apply(x[i], eps);
        let (log_alpha, lp_y) = if valid_dive_state(yi) {
            scratch[i] = yi;
            let lp_y = target.log_density(scratch);
            (clamp_log_alpha(lp_y - *lp_x + direction.log_jacobian(eps)), lp_y)
        } else {
            (f64::NEG_INFINITY, f64::NEG_INFINITY)
        };
        accepted[i] = libm::log(rng.uniform01()) < log_alpha;
        if accepted[i] {
            x[i] = yi;
            *lp_x = lp_y;
        } else {
            scratch[i] = x[i];
        }
    }
}

/// One component-wise RDMH sweep.
pub fn rdmh_componentwise_sweep<T: TargetDensity + ?Sized>(
    x: &[f64],
    target: &T,
    proposals: &[MultiplierProposal],
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    check_proposal_count(proposals, x.len())?;
    check_nonzero(x)?;
    let mut lp = current_log_density(target, x)?;
    let mut next = x.to_vec();
    let mut scratch = vec![0.0; x.len()];
    let mut flags = vec![false; x.len()];
    rdmh_cw_transition(&mut next, &mut lp, &mut scratch, &mut flags, target, proposals, rng);
    Ok(next)
}

fn check_proposal_count(proposals: &[MultiplierProposal], dim: usize) -> Result<()> {
    if proposals.len() == 1 || proposals.len() == dim {
        for p in proposals {
            p.validate()?;
        }
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{} proposals for a {dim}-dimensional target", proposals.len())))
    }
}

/// Symmetric random-walk increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RwIncrement {
    /// `N(0, tau^2)`
    Normal {
        tau: f64,
    },
    Cauchy {
        scale: f64,
    },
}

impl RwIncrement {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::Normal { tau } if !(tau > 0.0 && tau.is_finite()) => {
                Err(Error::InvalidParameter { name: "tau", value: tau })
            }
            Self::Cauchy { scale } if !(scale > 0.0 && scale.is_finite()) => {
                Err(Error::InvalidParameter { name: "scale", value: scale })
            }
            _ => Ok(()),
        }
    }

    #[inline]
    fn draw(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Self::Normal { tau } => tau * rng.standard_normal(),
            Self::Cauchy { scale } => scale * rng.standard_cauchy(),
        }
    }
}

#[inline]
pub fn rwmh_transition<T: TargetDensity + ?Sized>(
    x: f64,
    lp_x: f64,
    target: &T,
    increment: &RwIncrement,
    rng: &mut RngStream,
) -> Step {
    let y = x + increment.draw(rng);
    let lp_y = if y.is_finite() { target.log_density1(y) } else { f64::NEG_INFINITY };
    let log_alpha = clamp_log_alpha(lp_y - lp_x);
    if libm::log(rng.uniform01()) < log_alpha {
        Step { state: y, log_density: lp_y, accepted: true }
    } else {
        Step { state: x, log_density: lp_x, accepted: false }
    }
}

/// Random walk Metropolis step `y = x + increment`.
pub fn rwmh_step<T: TargetDensity + ?Sized>(
    x: f64,
    target: &T,
    increment: &RwIncrement,
    rng: &mut RngStream,
) -> Result<(f64, bool)> {
    increment.validate()?;
    let lp_x = current_log_density(target, &[x])?;
    let s = rwmh_transition(x, lp_x, target, increment, rng);
    Ok((s.state, s.accepted))
}

/// Mean of the Langevin proposal, `x + (sigma^2 / 2) grad log pi(x)`.
#[inline]
pub fn langevin_mean(x: f64, grad: f64, sigma: f64) -> f64 {
    x + 0.5 * sigma * sigma * grad
}

/// Langevin state: position, log-density and gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinState {
    pub x: f64,
    pub log_density: f64,
    pub grad: f64,
}

impl LangevinState {
    pub fn new<T: TargetDensity + ?Sized>(target: &T, x: f64) -> Result<Self> {
        let log_density = current_log_density(target, &[x])?;
        let grad = target.grad_log_density1(x).ok_or_else(|| Error::MissingGradient(target.label().into()))?;
        Ok(Self { x, log_density, grad })
    }
}

#[inline]
pub fn lmh_transition<T: TargetDensity + ?Sized>(
    state: LangevinState,
    target: &T,
    sigma: f64,
    rng: &mut RngStream,
) -> (LangevinState, bool) {
    let fwd_mean = langevin_mean(state.x, state.grad, sigma);
    let z = rng.standard_normal();
    let y = fwd_mean + sigma * z;
    let mut log_alpha = f64::NEG_INFINITY;
    let mut next = state;
    if y.is_finite() {
        let lp_y = target.log_density1(y);
        let grad_y = target.grad_log_density1(y).unwrap_or(f64::NAN);
        let back = (state.x - langevin_mean(y, grad_y, sigma)) / sigma;
        // log q(x | y) - log q(y | x); the normalising constants cancel
        let log_q_ratio = -0.5 * back * back + 0.5 * z * z;
        log_alpha = clamp_log_alpha(lp_y - state.log_density + log_q_ratio);
        next = LangevinState { x: y, log_density: lp_y, grad: grad_y };
    }
    if libm::log(rng.uniform01()) < log_alpha {
        (next, true)
    } else {
        (state, false)
    }
}

/// Metropolis-adjusted Langevin step with proposal
/// `N(x + (sigma^2/2) grad log pi(x), sigma^2)`.
pub fn lmh_step<T: TargetDensity + ?Sized>(x: f64, target: &T, sigma: f64, rng: &mut RngStream) -> Result<(f64, bool)> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter { name: "sigma", value: sigma });
    }
    if !target.has_gradient() {
        return Err(Error::MissingGradient(target.label().into()));
    }
    let state = LangevinState::new(target, x)?;
    let (next, accepted) = lmh_transition(state, target, sigma, rng);
    Ok((next.x, accepted))
}

/// Which transition kernel drives a chain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "sampler", deny_unknown_fields)
)]
pub enum SamplerSpec {
    #[cfg_attr(feature = "serde", serde(rename = "rdmh"))]
    Rdmh {
        #[cfg_attr(feature = "serde", serde(default))]
        proposal: MultiplierProposal,
    },
    #[cfg_attr(feature = "serde", serde(rename = "rdmh-mv"))]
    RdmhMultivariate { proposals: Vec<MultiplierProposal> },
    #[cfg_attr(feature = "serde", serde(rename = "rdmh-cw"))]
    RdmhComponentwise { proposals: Vec<MultiplierProposal> },
    #[cfg_attr(feature = "serde", serde(rename = "rwmh-normal"))]
    RwmhNormal { tau: f64 },
    #[cfg_attr(feature = "serde", serde(rename = "rwmh-cauchy"))]
    RwmhCauchy { scale: f64 },
    #[cfg_attr(feature = "serde", serde(rename = "lmh"))]
    Lmh {
        #[cfg_attr(feature = "serde", serde(alias = "scale"))]
        sigma: f64,
    },
}

impl SamplerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rdmh { .. } => "rdmh",
            Self::RdmhMultivariate { .. } => "rdmh-mv",
            Self::RdmhComponentwise { .. } => "rdmh-cw",
            Self::RwmhNormal { .. } => "rwmh-normal",
            Self::RwmhCauchy { .. } => "rwmh-cauchy",
            Self::Lmh { .. } => "lmh",
        }
    }

    pub fn is_dive(&self) -> bool {
        matches!(self, Self::Rdmh { .. } | Self::RdmhMultivariate { .. } | Self::RdmhComponentwise { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub init: Vec<f64>,
    pub seed: u64,
    pub stream_index: u64,
}

impl ChainConfig {
    pub fn new(n_iter: usize, burn_in: usize, thin: usize, init: Vec<f64>, seed: u64, stream_index: u64) -> Self {
        Self { n_iter, burn_in, thin, init, seed, stream_index }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::InvalidConfig("n_iter must be positive".into()));
        }
        if self.burn_in >= self.n_iter {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be below n_iter ({})",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be positive".into()));
        }
        if self.init.is_empty() {
            return Err(Error::InvalidConfig("init is empty".into()));
        }
        Ok(())
    }

    /// Number of states a chain with this configuration records.
    pub fn recorded_len(&self) -> usize {
        (self.n_iter - self.burn_in).div_ceil(self.thin)
    }
}

/// Recorded output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dim: usize,
    /// Post burn-in, thinned states, row-major `len x dim`.
    pub states: Vec<f64>,
    /// Accept flag of every step, before burn-in and thinning. For
    /// component-wise sweeps a step counts as accepted if any coordinate
    /// moved.
    pub accepted: Vec<bool>,
    pub acceptance_rate: f64,
    /// Per-coordinate acceptance rates of component-wise sweeps.
    pub coordinate_acceptance: Option<Vec<f64>>,
    pub config: ChainConfig,
    pub sampler: SamplerSpec,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_states(&self) -> core::slice::ChunksExact<'_, f64> {
        self.states.chunks_exact(self.dim)
    }

    /// All recorded values of coordinate `j`.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.iter_states().map(|s| s[j]).collect()
    }
}

struct Recorder {
    burn_in: usize,
    thin: usize,
    states: Vec<f64>,
    accepted: Vec<bool>,
}

impl Recorder {
    fn new(config: &ChainConfig, dim: usize) -> Self {
        Self {
            burn_in: config.burn_in,
            thin: config.thin,
            states: Vec::with_capacity(config.recorded_len() * dim),
            accepted: Vec::with_capacity(config.n_iter),
        }
    }

    #[inline]
    fn record(&mut self, t: usize, state: &[f64], accepted: bool) {
        self.accepted.push(accepted);
        if t >= self.burn_in && (t - self.burn_in).is_multiple_of(self.thin) {
            self.states.extend_from_slice(state);
        }
    }
}

/// Runs one chain. Step `t` (0-based) produces state `x_{t+1}`; states from
/// steps `t >= burn_in` with `(t - burn_in) % thin == 0` are recorded.
/// The acceptance rate covers all `n_iter` steps.
pub fn run_chain<T: TargetDensity + ?Sized>(config: &ChainConfig, sampler: &SamplerSpec, target: &T) -> Result<Trace> {
    config.validate()?;
    let dim = target.dim();
    if config.init.len() != dim {
        return Err(Error::InvalidConfig(format!(
            "init has {} coordinates, target `{}` has {dim}",
            config.init.len(),
            target.label()
        )));
    }
    if sampler.is_dive() {
        check_nonzero(&config.init)?;
    }
    let mut rng = RngStream::new(config.seed, config.stream_index);
    let mut rec = Recorder::new(config, dim);
    let mut coordinate_acceptance = None;

    match sampler {
        SamplerSpec::Rdmh { proposal } => {
            require_dim(sampler, dim, 1)?;
            proposal.validate()?;
            let mut x = config.init[0];
            let mut lp = current_log_density(target, &[x])?;
            for t in 0..config.n_iter {
                let s = rdmh_transition(x, lp, target, proposal, &mut rng);
                x = s.state;
                lp = s.log_density;
                rec.record(t, &[x], s.accepted);
            }
        }
        SamplerSpec::RdmhMultivariate { proposals } => {
            check_proposal_count(proposals, dim)?;
            let mut x = config.init.clone();
            let mut lp = current_log_density(target, &x)?;
            let mut scratch = vec![0.0; dim];
            for t in 0..config.n_iter {
                let acc = rdmh_mv_transition(&mut x, &mut lp, &mut scratch, target, proposals, &mut rng);
                rec.record(t, &x, acc);
            }
        }
        SamplerSpec::RdmhComponentwise { proposals } => {
            check_proposal_count(proposals, dim)?;
            let mut x = config.init.clone();
            let mut lp = current_log_density(target, &x)?;
            let mut scratch = vec![0.0; dim];
            let mut flags = vec![false; dim];
            let mut counts = vec![0usize; dim];
            for t in 0..config.n_iter {
                rdmh_cw_transition(&mut x, &mut lp, &mut scratch, &mut flags, target, proposals, &mut rng);
                for (c, &f) in counts.iter_mut().zip(&flags) {
                    *c += f as usize;
                }
                rec.record(t, &x, flags.iter().any(|&f| f));
            }
            coordinate_acceptance = Some(counts.iter().map(|&c| c as f64 / config.n_iter as f64).collect());
        }
        SamplerSpec::RwmhNormal { tau } => {
            run_rw(config, &RwIncrement::Normal { tau: *tau }, target, &mut rng, &mut rec, sampler)?
        }
        SamplerSpec::RwmhCauchy { scale } => {
            run_rw(config, &RwIncrement::Cauchy { scale: *scale }, target, &mut rng, &mut rec, sampler)?
        }
        SamplerSpec::Lmh { sigma } => {
            require_dim(sampler, dim, 1)?;
            if !(*sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidParameter { name: "sigma", value: *sigma });
            }
            if !target.has_gradient() {
                return Err(Error::MissingGradient(target.label().into()));
            }
            let mut state = LangevinState::new(target, config.init[0])?;
            for t in 0..config.n_iter {
                let (next, acc) = lmh_transition(state, target, *sigma, &mut rng);
                state = next;
                rec.record(t, &[state.x], acc);
            }
        }
    }

    let accepted_count = rec.accepted.iter().filter(|&&a| a).count();
    Ok(Trace {
        dim,
        states: rec.states,
        acceptance_rate: accepted_count as f64 / config.n_iter as f64,
        accepted: rec.accepted,
        coordinate_acceptance,
        config: config.clone(),
        sampler: sampler.clone(),
    })
}

fn run_rw<T: TargetDensity + ?Sized>(
    config: &ChainConfig,
    increment: &RwIncrement,
    target: &T,
    rng: &mut RngStream,
    rec: &mut Recorder,
    sampler: &SamplerSpec,
) -> Result<()> {
    require_dim(sampler, target.dim(), 1)?;
    increment.validate()?;
    let mut x = config.init[0];
    let mut lp = current_log_density(target, &[x])?;
    for t in 0..config.n_iter {
        let s = rwmh_transition(x, lp, target, increment, rng);
        x = s.state;
        lp = s.log_density;
        rec.record(t, &[x], s.accepted);
    }
    Ok(())
}

fn require_dim(sampler: &SamplerSpec, dim: usize, want: usize) -> Result<()> {
    if dim == want {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("sampler `{}` needs a {want}-dimensional target, got {dim}", sampler.name())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::{bimodal_mixture, thick_tailed, FnTarget};

    fn std_normal_shape() -> FnTarget {
        FnTarget::new("normal", 1, |x: &[f64]| -0.5 * x[0] * x[0]).with_gradient(|x, g| g[0] = -x[0])
    }

    fn flat() -> FnTarget {
        FnTarget::new("flat", 1, |_: &[f64]| 0.0)
    }

    #[test]
    fn accept_log_examples() {
        let t = std_normal_shape();
        let a = rdmh_accept_log(1.0, 0.5, 0.5, DiveDirection::Inner, &t).unwrap();
        assert!((libm::exp(a) - 0.727_495_707_309_100_6).abs() < 1e-12);
        let a = rdmh_accept_log(1.0, 2.0, 0.5, DiveDirection::Outer, &t).unwrap();
        assert!((libm::exp(a) - 0.446_260_320_296_859_6).abs() < 1e-12);
        // e -> 1 from below: x' -> x and |e| -> 1
        let e = 1.0 - 1e-12;
        let a = rdmh_accept_log(1.3, 1.3 * e, e, DiveDirection::Inner, &t).unwrap();
        assert!(libm::exp(a) > 1.0 - 1e-9);
    }

    #[test]
    fn accept_log_rejects_null_state() {
        let t = FnTarget::new("half", 1, |x: &[f64]| if x[0] > 0.0 { 0.0 } else { f64::NEG_INFINITY });
        assert!(matches!(rdmh_accept_log(-1.0, -0.5, 0.5, DiveDirection::Inner, &t), Err(Error::InvalidState(_))));
        assert!(rdmh_accept_log(0.0, 0.0, 0.5, DiveDirection::Inner, &t).is_err());
        assert!(rdmh_accept_log(1.0, 0.5, 1.0, DiveDirection::Inner, &t).is_err());
    }

    #[test]
    fn uniform_target_inner_dive_accepts_with_abs_eps() {
        // flat on [-10, 10]; every inner dive from |x| < 10 stays inside
        let t = FnTarget::new("box", 1, |x: &[f64]| if x[0].abs() <= 10.0 { 0.0 } else { f64::NEG_INFINITY });
        for &(x, e) in &[(3.0, 0.25), (-7.0, -0.6), (9.9, 0.999)] {
            let a = rdmh_accept_log(x, x * e, e, DiveDirection::Inner, &t).unwrap();
            assert!((libm::exp(a) - libm::fabs(e)).abs() < 1e-15);
        }
    }

    #[test]
    fn outer_overflow_is_rejected() {
        let t = thick_tailed();
        let x = 1e300;
        let e = 1e-10;
        let a = rdmh_accept_log(x, x / e, e, DiveDirection::Outer, &t).unwrap();
        assert_eq!(a, f64::NEG_INFINITY);
    }

    #[test]
    fn mv_example_two_dims() {
        let t = FnTarget::new("n2", 2, |x: &[f64]| -0.5 * (x[0] * x[0] + x[1] * x[1]));
        let lr = (-0.125 - 0.125) - (-0.5 - 0.5) + 2.0 * libm::log(0.5);
        assert!((lr - (-0.636_294_361_119_890_6)).abs() < 1e-12);
        assert!((libm::exp(lr) - 0.529_250_004_153_168_7).abs() < 1e-12);
        // run the transition with a stream and check the accept rule by replaying it
        let mut r = RngStream::new(3, 0);
        let mut x = [1.0, 1.0];
        let mut lp = t.log_density(&x);
        let mut scratch = [0.0; 2];
        let props = [MultiplierProposal::Uniform];
        let mut replay = r.clone();
        let acc = rdmh_mv_transition(&mut x, &mut lp, &mut scratch, &t, &props, &mut replay);
        let e0 = props[0].sample(&mut r);
        let d0 = DiveDirection::from_uniform(r.uniform01());
        let e1 = props[0].sample(&mut r);
        let d1 = DiveDirection::from_uniform(r.uniform01());
        let y = [d0.apply(1.0, e0), d1.apply(1.0, e1)];
        let la = (t.log_density(&y) + 1.0 + d0.log_jacobian(e0) + d1.log_jacobian(e1)).min(0.0);
        assert_eq!(acc, libm::log(r.uniform01()) < la);
        if acc {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn mv_all_inner_on_flat_box_accepts_with_product() {
        let t = FnTarget::new(
            "box2",
            2,
            |x: &[f64]| {
                if x.iter().all(|v| v.abs() <= 5.0) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            },
        );
        // empirical check: P(accept | all inner) = E[prod |e_i|] = 1/4 for uniform e
        let mut r = RngStream::new(8, 0);
        let props = [MultiplierProposal::Uniform];
        let (mut n_inner, mut n_acc) = (0usize, 0usize);
        for _ in 0..400_000 {
            let mut probe = r.clone();
            props[0].sample(&mut probe);
            let u0 = probe.uniform01();
            props[0].sample(&mut probe);
            let u1 = probe.uniform01();
            let mut x = [2.0, -3.0];
            let mut lp = 0.0;
            let mut scratch = [0.0; 2];
            let acc = rdmh_mv_transition(&mut x, &mut lp, &mut scratch, &t, &props, &mut r);
            if u0 < 0.5 && u1 < 0.5 {
                n_inner += 1;
                n_acc += acc as usize;
            }
        }
        let rate = n_acc as f64 / n_inner as f64;
        assert!((rate - 0.25).abs() < 0.006, "{rate}");
    }

    #[test]
    fn k1_multivariate_matches_scalar() {
        let t = thick_tailed();
        let p = [MultiplierProposal::symmetric_shapes(0.3, 2.0, 1.0).unwrap()];
        let mut r1 = RngStream::new(99, 4);
        let mut r2 = RngStream::new(99, 4);
        let mut x = 0.7;
        let mut xv = alloc::vec![0.7];
        for _ in 0..10_000 {
            let (nx, a1) = rdmh_step(x, &t, &p[0], &mut r1).unwrap();
            let (nv, a2) = rdmh_step_multivariate(&xv, &t, &p, &mut r2).unwrap();
            assert_eq!(a1, a2);
            assert_eq!(nx.to_bits(), nv[0].to_bits());
            x = nx;
            xv = nv;
        }
    }

    #[test]
    fn k1_componentwise_matches_scalar() {
        let t = thick_tailed();
        let p = [MultiplierProposal::Uniform];
        let mut r1 = RngStream::new(5, 0);
        let mut r2 = RngStream::new(5, 0);
        let mut x = -2.0;
        let mut xv = alloc::vec![-2.0];
        for _ in 0..5_000 {
            x = rdmh_step(x, &t, &p[0], &mut r1).unwrap().0;
            xv = rdmh_componentwise_sweep(&xv, &t, &p, &mut r2).unwrap();
            assert_eq!(x.to_bits(), xv[0].to_bits());
        }
    }

    #[test]
    fn componentwise_product_target_factorises() {
        // coordinate-0 decisions do not depend on the value of coordinate 1
        let t = FnTarget::new("prod", 2, |x: &[f64]| -2.0 * libm::log1p(x[0] * x[0]) - 0.5 * x[1] * x[1]);
        let p = [MultiplierProposal::Uniform];
        for seed in 0..200 {
            let mut ra = RngStream::new(seed, 0);
            let mut rb = RngStream::new(seed, 0);
            let a = rdmh_componentwise_sweep(&[1.5, 0.3], &t, &p, &mut ra).unwrap();
            let b = rdmh_componentwise_sweep(&[1.5, -2.0], &t, &p, &mut rb).unwrap();
            assert_eq!(a[0].to_bits(), b[0].to_bits());
        }
    }

    #[test]
    fn zero_coordinate_is_invalid() {
        let t = FnTarget::new("n2", 2, |x: &[f64]| -0.5 * (x[0] * x[0] + x[1] * x[1]));
        let mut r = RngStream::new(1, 0);
        let p = [MultiplierProposal::Uniform];
        assert!(matches!(rdmh_step_multivariate(&[1.0, 0.0], &t, &p, &mut r), Err(Error::InvalidState(_))));
        assert!(rdmh_componentwise_sweep(&[0.0, 1.0], &t, &p, &mut r).is_err());
        assert!(rdmh_step(0.0, &thick_tailed(), &p[0], &mut r).is_err());
    }

    #[test]
    fn rwmh_flat_always_accepts() {
        let t = flat();
        let mut r = RngStream::new(2, 0);
        let mut x = 0.0;
        for inc in [RwIncrement::Normal { tau: 3.0 }, RwIncrement::Cauchy { scale: 1.0 }] {
            for _ in 0..1000 {
                let (nx, acc) = rwmh_step(x, &t, &inc, &mut r).unwrap();
                assert!(acc);
                x = nx;
            }
        }
        assert!(rwmh_step(0.0, &t, &RwIncrement::Normal { tau: 0.0 }, &mut r).is_err());
    }

    #[test]
    fn langevin_mean_for_normal_shape() {
        // sigma^2 = 2: drift (sigma^2/2)(-x) = -x, so the mean is exactly 0
        let t = std_normal_shape();
        for &x in &[-3.0, 0.5, 7.25] {
            let g = t.grad_log_density1(x).unwrap();
            assert!(langevin_mean(x, g, libm::sqrt(2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn lmh_drift_free_reduces_to_rw_ratio() {
        // constant gradient zero: forward and backward Gaussian factors cancel
        let t = FnTarget::new("flat", 1, |_: &[f64]| 0.0).with_gradient(|_, g| g[0] = 0.0);
        let mut r = RngStream::new(4, 0);
        for _ in 0..1000 {
            assert!(lmh_step(0.3, &t, 1.0, &mut r).unwrap().1);
        }
    }

    #[test]
    fn lmh_needs_gradient() {
        let mut r = RngStream::new(4, 0);
        assert!(matches!(lmh_step(0.3, &flat(), 1.0, &mut r), Err(Error::MissingGradient(_))));
        let cfg = ChainConfig::new(10, 0, 1, alloc::vec![0.3], 1, 0);
        assert!(run_chain(&cfg, &SamplerSpec::Lmh { sigma: 1.0 }, &flat()).is_err());
    }

    #[test]
    fn chain_bookkeeping() {
        let t = thick_tailed();
        let spec = SamplerSpec::Rdmh { proposal: MultiplierProposal::Uniform };
        let cfg = ChainConfig::new(10, 0, 1, alloc::vec![1.0], 1, 0);
        let tr = run_chain(&cfg, &spec, &t).unwrap();
        assert_eq!(tr.len(), 10);
        assert_eq!(tr.accepted.len(), 10);
        let cfg = ChainConfig::new(100, 10, 7, alloc::vec![1.0], 1, 0);
        let tr = run_chain(&cfg, &spec, &t).unwrap();
        assert_eq!(tr.len(), cfg.recorded_len());
        assert_eq!(tr.len(), 13);
        let mean = tr.accepted.iter().filter(|&&a| a).count() as f64 / 100.0;
        assert_eq!(tr.acceptance_rate, mean);
    }

    #[test]
    fn chain_config_errors() {
        let t = thick_tailed();
        let spec = SamplerSpec::Rdmh { proposal: MultiplierProposal::Uniform };
        for cfg in [
            ChainConfig::new(0, 0, 1, alloc::vec![1.0], 1, 0),
            ChainConfig::new(10, 10, 1, alloc::vec![1.0], 1, 0),
            ChainConfig::new(10, 0, 0, alloc::vec![1.0], 1, 0),
            ChainConfig::new(10, 0, 1, alloc::vec![], 1, 0),
            ChainConfig::new(10, 0, 1, alloc::vec![1.0, 2.0], 1, 0),
        ] {
            assert!(run_chain(&cfg, &spec, &t).is_err(), "{cfg:?}");
        }
        let cfg = ChainConfig::new(10, 0, 1, alloc::vec![0.0], 1, 0);
        assert!(matches!(run_chain(&cfg, &spec, &t), Err(Error::InvalidState(_))));
        // RWMH may start at zero
        assert!(run_chain(&cfg, &SamplerSpec::RwmhNormal { tau: 1.0 }, &t).is_ok());
        let b = bimodal_mixture();
        let cfg = ChainConfig::new(10, 0, 1, alloc::vec![1e200], 1, 0);
        // the squared distance overflows
        assert!(matches!(run_chain(&cfg, &spec, &b), Err(Error::InvalidState(_))));
    }

    #[test]
    fn chains_are_deterministic() {
        let t = bimodal_mixture();
        let spec = SamplerSpec::Rdmh { proposal: MultiplierProposal::Uniform };
        let cfg = ChainConfig::new(2000, 100, 2, alloc::vec![-2.0], 77, 3);
        assert_eq!(run_chain(&cfg, &spec, &t).unwrap(), run_chain(&cfg, &spec, &t).unwrap());
    }
}
