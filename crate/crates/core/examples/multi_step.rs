//! The multi-step variant on a flat conjunction: each sub-query may stop
//! early, and the unused part of β moves to the sub-queries after it. Also
//! prints the predicate-wise budget ledger and its min-entropy.
//!
//! `cargo run --release --example multi_step`

use probe_core::data::{BoundAtomic, BoundQuery};
use probe_core::dp::RandomSource;
use probe_core::engine::Budget;
use probe_core::ent::{ent_probe, entropy_bounds, min_entropy_exact, min_entropy_greedy, EntConfig};
use probe_core::query::{minimize_tree, parse_query, AtomicQuery, ValueRange};

fn main() -> probe_core::Result<()> {
    let k = 60;
    let range = ValueRange::new(0.0, 100.0);
    // `a` is far from its threshold everywhere; `b` and `c` are not.
    let a: Vec<f64> = (0..k).map(|j| if j % 3 == 0 { 100.0 } else { 0.0 }).collect();
    let b: Vec<f64> = (0..k).map(|j| if j % 2 == 0 { 95.0 } else { (j % 9) as f64 }).collect();
    let c: Vec<f64> = (0..k).map(|j| (j * 13 % 100) as f64).collect();
    let atomics = vec![
        BoundAtomic::from_values(AtomicQuery::count("a", 50.0, range), a)?,
        BoundAtomic::from_values(AtomicQuery::count("b", 80.0, range), b)?,
        BoundAtomic::from_values(AtomicQuery::count("c", 85.0, range), c)?,
    ];
    let compiled = minimize_tree(&parse_query("a AND b AND c", &["a", "b", "c"])?)?;
    let query = BoundQuery::new(compiled, atomics)?;

    let config = EntConfig { m: 3, ..EntConfig::default() };
    let r = ent_probe(&query, &Budget::default(), &config, &mut RandomSource::new(5, 0))?;
    for t in &r.subqueries {
        println!(
            "sub-query {} ({}) residual β={:.5} assigned={:.5} used={:.5} steps={} ε={:?}{}",
            t.position,
            t.atomic_id,
            t.beta_residual,
            t.beta_assigned,
            t.beta_used,
            t.iterations,
            t.epsilons.iter().map(|e| (e * 1e4).round() / 1e4).collect::<Vec<_>>(),
            if t.skipped { " (skipped)" } else { "" }
        );
    }
    match r.outcome.answer() {
        Some(s) => println!("answered {} groups (truth {})", s.len(), query.true_answer().len()),
        None => println!("denied: {:?}", r.outcome),
    }
    println!("ε={:.4} of {}", r.epsilon, r.epsilon_max);

    let (lo, hi) = entropy_bounds(&r.ledger.entries);
    println!(
        "ledger max ε={:.4}; min-entropy greedy={:.4} nats (uniform would be {:.4})",
        r.ledger.max(),
        min_entropy_greedy(&lo, &hi)?,
        (k as f64).ln()
    );

    // Small ledgers can be solved exactly.
    let small = [0.4, 0.1, 0.9, 0.0, 0.25];
    let (lo, hi) = entropy_bounds(&small);
    println!(
        "ledger {small:?}: exact={:.6} greedy={:.6}",
        min_entropy_exact(&lo, &hi)?,
        min_entropy_greedy(&lo, &hi)?
    );
    Ok(())
}
