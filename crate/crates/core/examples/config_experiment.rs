//! End-to-end experiment from a query file and a CSV, the same path the
//! `probe` binary takes. Writes per-trial metrics to a CSV file.
//!
//! `cargo run --release --example config_experiment [out.csv]`

use std::path::PathBuf;

use probe_core::harness::{run_experiment, Algorithm, Params, RunConfig};

fn main() -> probe_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("probe_results.csv"));
    for (algorithm, query) in [
        (Algorithm::Probe, "occupancy.json"),
        (Algorithm::Naive, "occupancy.json"),
        (Algorithm::ProbeEnt, "occupancy.toml"),
    ] {
        let config = RunConfig {
            algorithm,
            query: dir.join(query),
            data: dir.join("occupancy.csv"),
            params: Params::default(),
            trials: 100,
            seed: 11,
            z: None,
            out: Some(out.clone()),
        };
        let r = run_experiment(&config)?;
        println!(
            "{algorithm:<10} {query:<15} answered {:>3}/{}  ε={:.3}  FNR={:.4}  FPR={:.4}",
            r.answered.trials, r.all.trials, r.answered.epsilon, r.answered.fnr, r.answered.fpr
        );
    }
    println!("last run's rows are in {}", out.display());
    Ok(())
}
