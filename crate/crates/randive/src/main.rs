use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use randive::{run_experiment, write_outputs, Experiment, ExperimentConfig, ExperimentResult, HarnessError};

/// Run a random dive MCMC study and write its traces and summary.
#[derive(Debug, Parser)]
#[command(name = "randive", version)]
struct Cli {
    /// bimodal, needle, thicktail, shareprice or kernel-check
    #[arg(value_parser = parse_experiment)]
    experiment: Experiment,
    /// JSON config file; without it the study runs with its defaults
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shrinks replicate counts, in (0, 1]
    #[arg(long)]
    scale: Option<f64>,
    /// Worker threads (default: one per hardware thread)
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (default: runs/<experiment>)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Price file for shareprice
    #[arg(long)]
    data: Option<PathBuf>,
    /// Let shareprice fall back to generated data when no price file is given
    #[arg(long)]
    allow_synthetic: bool,
    /// Exit with status 3 if any tolerance check fails
    #[arg(long)]
    check: bool,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    Experiment::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
        format!("unknown experiment {s:?}; expected one of {}", names.join(", "))
    })
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(cli.experiment),
    };
    if config.experiment != cli.experiment {
        return Err(HarnessError::Config(format!(
            "command line asks for {} but the config file is for {}",
            cli.experiment, config.experiment
        )));
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(scale) = cli.scale {
        config.scale_factor = scale;
    }
    if let Some(out) = &cli.out {
        config.output_dir = Some(out.clone());
    }
    if let Some(data) = &cli.data {
        config.data = Some(data.clone());
    }
    config.allow_synthetic |= cli.allow_synthetic;
    config.validate()?;
    Ok(config)
}

fn report(result: &ExperimentResult) {
    println!("{} seed {} scale {}", result.experiment, result.seed, result.scale_factor);
    for g in &result.groups {
        let fields: Vec<String> = g.estimates.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
        println!("  {} ({} chains): {}", g.name, g.n_chains, fields.join(" "));
        if let Some(t) = g.normality {
            println!("    normality p-values: AD {:.4} CvM {:.4} Lilliefors {:.4}", t.ad_p, t.cvm_p, t.lillie_p);
        }
    }
    for (k, v) in &result.estimates {
        println!("  {k} = {v:.6e}");
    }
    if let Some(p) = &result.posterior {
        for (name, s) in [("beta", p.beta), ("sigma", p.sigma), ("nu", p.nu), ("gamma", p.gamma)] {
            println!("  {name}: mean {:.6} sd {:.6}", s.mean, s.sd);
        }
    }
    for c in &result.checks {
        println!("  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("  wall clock {:.2} s", result.wall_clock_seconds);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.unwrap_or(0);
    let run = || -> Result<ExperimentResult, HarnessError> {
        let config = configure(&cli)?;
        let result = run_experiment(&config, threads)?;
        for note in &result.notes {
            eprintln!("warning: {note}");
        }
        let dir = config.output_dir();
        write_outputs(&result, &config, threads, &dir)?;
        report(&result);
        println!("  outputs in {}", dir.display());
        Ok(result)
    };
    match run() {
        Ok(result) if cli.check && !result.all_passed() => ExitCode::from(3),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
