use std::collections::BTreeMap;
use std::path::Path;

use randive::io::{load_prices, read_trace_csv, write_trace_csv};
use randive::{chain_id, run_experiment, write_outputs, Experiment, ExperimentConfig, HarnessError};
use randive_core::target::{thick_tailed, FnTarget};
use randive_core::{run_chain, ChainConfig, MultiplierProposal, SamplerSpec};

fn small_needle(scale: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Experiment::Needle);
    c.n_iter = Some(3000);
    c.burn_in = Some(1000);
    c.thin = Some(3);
    c.scale_factor = scale;
    c
}

#[test]
fn unknown_config_key_is_rejected() {
    let err = ExperimentConfig::from_json(r#"{"experiment": "bimodal", "n_iters": 10}"#).unwrap_err();
    assert!(matches!(err, HarnessError::Config(_)));
    assert!(err.to_string().contains("n_iters"), "{err}");
    assert_eq!(err.exit_code(), 2);
    let err = ExperimentConfig::from_json(r#"{"experiment": "bimodal", "sampler": {"sampler": "rdmh", "tau": 1}}"#);
    assert!(err.is_err());
}

#[test]
fn sampler_and_proposal_specs_round_trip() {
    let specs = [
        SamplerSpec::Rdmh { proposal: MultiplierProposal::Uniform },
        SamplerSpec::Rdmh { proposal: MultiplierProposal::beta_mixture(0.2, 2.0, 1.0, 3.0, 0.5).unwrap() },
        SamplerSpec::RdmhComponentwise { proposals: vec![MultiplierProposal::Uniform; 2] },
        SamplerSpec::RwmhNormal { tau: 1.5 },
        SamplerSpec::RwmhCauchy { scale: 1.0 },
        SamplerSpec::Lmh { sigma: 2.0 },
    ];
    for s in specs {
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<SamplerSpec>(&json).unwrap(), s, "{json}");
    }
    let p: MultiplierProposal =
        serde_json::from_str(r#"{"kind": "beta-mixture", "gamma": 0.15, "a1": 0.5, "b1": 1, "a2": 0.5, "b2": 1}"#)
            .unwrap();
    assert_eq!(p, MultiplierProposal::symmetric_shapes(0.15, 0.5, 1.0).unwrap());
    let s: SamplerSpec = serde_json::from_str(r#"{"sampler": "rdmh"}"#).unwrap();
    assert_eq!(s, SamplerSpec::Rdmh { proposal: MultiplierProposal::Uniform });
}

#[test]
fn three_state_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let cfg = ChainConfig::new(3, 0, 1, vec![0.7], 5, 0);
    let trace = run_chain(&cfg, &SamplerSpec::Rdmh { proposal: MultiplierProposal::Uniform }, &thick_tailed()).unwrap();
    write_trace_csv(&path, &trace, &["state".to_string()]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().next(), Some("iter,state,accepted"));
    let back = read_trace_csv(&path).unwrap();
    assert_eq!(back.iters, [1, 2, 3]);
    assert_eq!(back.accepted, trace.accepted);
    for (a, b) in back.states.iter().zip(&trace.states) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn thinned_multivariate_trace_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let target = FnTarget::new("gauss2", 2, |x: &[f64]| -0.5 * (x[0] * x[0] + 1e6 * x[1] * x[1]));
    let cfg = ChainConfig::new(1000, 100, 7, vec![1.0, 1e-3], 9, 4);
    let spec = SamplerSpec::RdmhMultivariate { proposals: vec![MultiplierProposal::Uniform] };
    let trace = run_chain(&cfg, &spec, &target).unwrap();
    let cols = ["beta", "sigma_t"].map(String::from);
    write_trace_csv(&path, &trace, &cols).unwrap();
    let back = read_trace_csv(&path).unwrap();
    assert_eq!(back.columns, cols);
    assert_eq!(back.len(), trace.len());
    assert!(back.states.iter().zip(&trace.states).all(|(a, b)| a.to_bits() == b.to_bits()));
    for (k, &it) in back.iters.iter().enumerate() {
        assert_eq!(it as usize, 100 + 7 * k + 1);
        assert_eq!(back.accepted[k], trace.accepted[it as usize - 1]);
    }
    assert!(write_trace_csv(&path, &trace, &["x".to_string()]).is_err());
}

#[test]
fn shareprice_trace_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::new(Experiment::Shareprice);
    c.allow_synthetic = true;
    c.n_iter = Some(600);
    c.burn_in = Some(100);
    let r = run_experiment(&c, 1).unwrap();
    write_outputs(&r, &c, 1, dir.path()).unwrap();
    let t = read_trace_csv(&dir.path().join("trace_0.csv")).unwrap();
    assert_eq!(t.columns, ["beta", "sigma_t", "nu_t", "gamma_t"]);
    assert_eq!(t.len(), 100);
    let text = std::fs::read_to_string(dir.path().join("trace_0.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("iter,beta,sigma_t,nu_t,gamma_t,accepted"));
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn price_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let s = load_prices(&write(d, "a.txt", "100\n102\n96.9\n")).unwrap();
    assert_eq!(s.returns().len(), 2);
    assert!((s.returns()[0] - 0.02).abs() < 1e-15);
    assert!((s.returns()[1] + 0.05).abs() < 1e-15);

    let s = load_prices(&write(d, "b.csv", "date,price\n1,100\n2,100\n")).unwrap();
    assert_eq!(s.returns(), &[0.0]);

    let fifty: String = (0..50).map(|i| format!("{}\n", 300.0 + (i as f64).sin())).collect();
    assert_eq!(load_prices(&write(d, "c.txt", &fifty)).unwrap().returns().len(), 49);
    let fifty_csv = format!("price\n{fifty}");
    assert_eq!(load_prices(&write(d, "c.csv", &fifty_csv)).unwrap().returns().len(), 49);

    let line_of = |name: &str, text: &str| match load_prices(&write(d, name, text)) {
        Err(HarnessError::Parse { line, .. }) => line,
        other => panic!("{name}: expected a parse error, got {other:?}"),
    };
    assert_eq!(line_of("d.txt", "100\n101\nabc\n"), 3);
    assert_eq!(line_of("e.txt", "100\n\n-4\n"), 3);
    assert_eq!(line_of("f.csv", "price\n100\n0\n"), 3);
    assert_eq!(line_of("g.csv", "date,close\n1,100\n"), 1);
    assert!(matches!(load_prices(&write(d, "h.txt", "100\n")), Err(HarnessError::Parse { .. })));
    assert!(matches!(load_prices(&d.join("missing.txt")), Err(HarnessError::Io { .. })));
}

#[test]
fn summary_is_independent_of_thread_count() {
    let c = small_needle(0.05);
    let one = run_experiment(&c, 1).unwrap().to_json();
    let many = run_experiment(&c, 4).unwrap().to_json();
    assert_eq!(one, many);
}

#[test]
fn scale_changes_only_the_number_of_chains() {
    let small = run_experiment(&small_needle(0.03), 2).unwrap();
    let large = run_experiment(&small_needle(0.06), 2).unwrap();
    assert_eq!(small.groups[0].n_chains, 3);
    assert_eq!(large.groups[0].n_chains, 6);
    for c in &small.chains {
        let twin = large.chains.iter().find(|d| d.chain == c.chain).unwrap();
        assert_eq!(c, twin);
    }
    let by_chain = |r: &randive::ExperimentResult| -> BTreeMap<u64, Vec<f64>> {
        r.traces.iter().map(|t| (t.chain, t.trace.states.clone())).collect()
    };
    let (a, b) = (by_chain(&small), by_chain(&large));
    assert!(!a.is_empty());
    for (k, v) in &a {
        assert_eq!(Some(v), b.get(k));
    }
}

#[test]
fn stream_index_is_the_chain_number() {
    let c = small_needle(0.02);
    let r = run_experiment(&c, 1).unwrap();
    let rec = r.chains.iter().find(|c| c.group == 3 && c.replicate == 1).unwrap();
    assert_eq!(rec.chain, chain_id(3, 1));
    let g = &r.groups[3];
    let cfg = ChainConfig::new(g.n_iter, g.burn_in, g.thin, g.init.clone(), c.seed, rec.chain);
    let trace = run_chain(&cfg, &g.sampler, &randive_core::target::needle_mixture()).unwrap();
    let hits = trace.states.iter().filter(|x| x.abs() < 0.05).count() as f64 / trace.len() as f64;
    assert_eq!(hits, rec.estimate);
}

#[test]
fn aggregates_recompute_from_chains_csv() {
    let dir = tempfile::tempdir().unwrap();
    let c = small_needle(0.05);
    let r = run_experiment(&c, 0).unwrap();
    write_outputs(&r, &c, 0, dir.path()).unwrap();
    let mut rdr = csv::Reader::from_path(dir.path().join("chains.csv")).unwrap();
    let mut per_group: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let e = per_group.entry(rec[1].parse().unwrap()).or_default();
        e.0.push(rec[3].parse().unwrap());
        e.1.push(rec[4].parse().unwrap());
    }
    assert_eq!(per_group.len(), 5);
    for g in &r.groups {
        let (p, acc) = &per_group[&g.group];
        let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        assert_eq!(mean(p), g.estimates["p_hat_mean"]);
        assert_eq!(mean(acc), g.estimates["acceptance_mean"]);
    }
    let summary: randive::ExperimentResult =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.groups, r.groups);
    assert_eq!(summary.chains, r.chains);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["config"]["experiment"], "needle");
    assert!(manifest["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    assert!(!std::fs::read_to_string(dir.path().join("summary.json")).unwrap().contains("wall_clock"));
}

#[test]
fn trace_limit_bounds_written_traces() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_needle(0.05);
    c.trace_limit = 1;
    let r = run_experiment(&c, 0).unwrap();
    let files = write_outputs(&r, &c, 0, dir.path()).unwrap();
    let traces = files.iter().filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("trace_")).count();
    assert_eq!(traces, 5);
    assert!(dir.path().join(format!("trace_{}.csv", chain_id(4, 0))).exists());
}

#[test]
fn unwritable_output_dir_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let mut c = ExperimentConfig::new(Experiment::KernelCheck);
    c.n_mc = Some(1000);
    let r = run_experiment(&c, 1).unwrap();
    let err = write_outputs(&r, &c, 1, &blocker.join("sub")).unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }), "{err}");
}

#[test]
fn sampler_override_runs_one_group_without_checks() {
    let mut c = ExperimentConfig::new(Experiment::Thicktail);
    c.sampler = Some(SamplerSpec::RwmhCauchy { scale: 1.0 });
    c.n_iter = Some(2000);
    c.burn_in = Some(500);
    c.n_chains = Some(10);
    c.ks_iter = Some(200);
    let r = run_experiment(&c, 0).unwrap();
    let names: Vec<_> = r.groups.iter().map(|g| g.name.as_str()).collect();
    assert_eq!(names, ["rwmh-cauchy", "ks-rwmh-cauchy"]);
    assert!(r.checks.is_empty());
    assert!(r.groups[0].normality.is_some());
    assert_eq!(r.groups[1].n_iter, 200);
}

#[test]
fn shareprice_without_data_is_a_config_error() {
    let c = ExperimentConfig::new(Experiment::Shareprice);
    let err = run_experiment(&c, 1).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
}

#[test]
fn shareprice_reads_a_price_file() {
    let dir = tempfile::tempdir().unwrap();
    let prices: String = (0..50).map(|i| format!("{}\n", 200.0 * (1.0 + 0.01 * (1.7 * i as f64).sin()))).collect();
    let path = write(dir.path(), "prices.txt", &prices);
    let mut c = ExperimentConfig::new(Experiment::Shareprice);
    c.data = Some(path.clone());
    c.n_iter = Some(2000);
    c.burn_in = Some(500);
    let r = run_experiment(&c, 1).unwrap();
    assert_eq!(r.data_source.as_deref(), Some(path.to_str().unwrap()));
    assert_eq!(r.groups[0].estimates["n_returns"], 49.0);
    let names: Vec<_> = r.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["beta posterior mean", "sigma posterior mean", "nu posterior mean", "gamma posterior mean"]);
}
