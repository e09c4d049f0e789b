//! One run of the two-phase mechanism on a compound query, printing the
//! per-leaf trace: the phase-one runs, the false-positive estimates, and the
//! phase-two reruns at a narrower uncertain region.
//!
//! `cargo run --release --example two_phase`

use std::path::PathBuf;

use probe_core::dp::RandomSource;
use probe_core::engine::{naive, probe, Budget, NaiveConfig, Outcome, ProbeConfig};
use probe_core::harness::{measure_rates, QueryConfig};

fn main() -> probe_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let cfg = QueryConfig::load(dir.join("occupancy.json"))?;
    let (query, _) = cfg.bind_csv(dir.join("occupancy.csv"), None)?;
    let truth = query.true_answer();
    println!("query {}  k={}  true positives={}", query.compiled.tree, query.k, truth.len());

    let budget = Budget::default();
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let r = probe(&query, &budget, &ProbeConfig::default(), &mut RandomSource::new(seed, 0))?;
    for run in &r.runs {
        println!(
            "  phase {} leaf {:<7} u={:>7.3} β={:.5} ε={:.4}",
            run.phase, run.atomic_id, run.u, run.beta, run.epsilon
        );
    }
    for e in &r.estimates {
        println!(
            "  after phase {} leaf {:<7} f_est={:>6.2} f_max={:>5.2} r_est={:>6.1}",
            e.phase, e.atomic_id, e.estimate.f_est, e.f_max, e.estimate.r_est
        );
    }
    match &r.outcome {
        Outcome::Answered(set) => {
            let (fnr, fpr) = measure_rates(set, &truth, query.k);
            println!("answered {} groups, ε={:.4}, FNR={fnr:.3}, FPR={fpr:.3}", set.len(), r.epsilon);
        }
        Outcome::Denied(why) => println!("denied ({why:?}) after spending ε={:.4}", r.epsilon),
    }

    let n = naive(&query, budget.beta, budget.epsilon_max, &NaiveConfig::default(), &mut RandomSource::new(seed, 0))?;
    let (fnr, fpr) = measure_rates(&n.reported(), &truth, query.k);
    println!("naive baseline: ε={:.4}, FNR={fnr:.3}, FPR={fpr:.3}", n.epsilon);
    Ok(())
}
