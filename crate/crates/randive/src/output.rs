//! Writing a finished run to its output directory.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::io::{write_chains_csv, write_json, write_trace_csv};
use crate::result::ExperimentResult;

/// `manifest.json`: what was run and how long it took.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub experiment: &'a str,
    pub seed: u64,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub config: &'a ExperimentConfig,
    pub files: Vec<String>,
}

/// Writes `trace_{chain}.csv` for every kept trace, `chains.csv`,
/// `summary.json` and `manifest.json` into `dir`, creating it if needed.
/// Returns the paths written. `threads = 0` is recorded as the default
/// pool size.
pub fn write_outputs(
    result: &ExperimentResult,
    config: &ExperimentConfig,
    threads: usize,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut files = Vec::new();
    for t in &result.traces {
        let path = dir.join(format!("trace_{}.csv", t.chain));
        write_trace_csv(&path, &t.trace, &t.columns)?;
        files.push(path);
    }
    if !result.chains.is_empty() {
        let path = dir.join("chains.csv");
        write_chains_csv(&path, &result.chains)?;
        files.push(path);
    }
    let summary = dir.join("summary.json");
    std::fs::write(&summary, result.to_json()).map_err(|e| HarnessError::io(&summary, e))?;
    files.push(summary);
    let manifest_path = dir.join("manifest.json");
    let mut names: Vec<String> =
        files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect();
    names.push("manifest.json".into());
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        experiment: result.experiment.name(),
        seed: result.seed,
        threads: if threads == 0 { rayon::current_num_threads() } else { threads },
        wall_clock_seconds: result.wall_clock_seconds,
        config,
        files: names,
    };
    write_json(&manifest_path, &manifest)?;
    files.push(manifest_path);
    Ok(files)
}
