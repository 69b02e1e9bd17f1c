//! Random dive Metropolis-Hastings (RDMH) on the real line and on `R^k`,
//! together with random walk and Langevin baselines, the target densities used
//! to compare them, and the chain diagnostics needed to judge the results.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the experiment runner live in the `randive` crate.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod math;
pub mod proposal;
pub mod rng;
pub mod sampler;
pub mod shareprice;
pub mod target;

pub use error::{Error, Result};
pub use proposal::MultiplierProposal;
pub use rng::RngStream;
pub use sampler::{run_chain, ChainConfig, SamplerSpec, Trace};
pub use target::{TailExponent, TargetDensity};
