//! Experiment runner for the random dive samplers: JSON configuration,
//! parallel replicated chains, trace CSVs and run summaries.
//!
//! ```no_run
//! use randive::{run_experiment, write_outputs, Experiment, ExperimentConfig};
//!
//! let mut config = ExperimentConfig::new(Experiment::Bimodal);
//! config.seed = 7;
//! let result = run_experiment(&config, 0).unwrap();
//! write_outputs(&result, &config, 0, &config.output_dir()).unwrap();
//! assert!(result.all_passed());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod output;
pub mod result;

pub use config::{Experiment, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use experiments::{chain_id, run_experiment};
pub use output::write_outputs;
pub use result::{Check, ExperimentResult, GroupSummary};
