//! The threshold-shift Laplace mechanism on a single atomic query: the
//! privacy cost for a given region width, and an empirical check that
//! true positives are missed at most a β fraction of the time.
//!
//! `cargo run --release --example threshold_shift`

use probe_core::data::BoundAtomic;
use probe_core::dp::{laplace_tail, tslm, tslm_epsilon, RandomSource};
use probe_core::query::{AtomicQuery, ValueRange};

fn main() -> probe_core::Result<()> {
    let beta = 0.05;
    for u in [2.0, 5.0, 10.0, 30.0] {
        let eps = tslm_epsilon(1.0, beta, u);
        println!("u={u:>4}: ε={eps:.4}  P[miss at threshold]={:.4}", laplace_tail(1.0, eps, u));
    }

    // Ten groups just above the threshold: the worst case for misses.
    let c = 50.0;
    let mut values = vec![c + 1e-6; 10];
    values.extend((0..30).map(|i| i as f64));
    let atomic = BoundAtomic::from_values(AtomicQuery::count("hits", c, ValueRange::new(0.0, 100.0)), values)?;
    let truth = atomic.truth_set();

    let trials = 20_000;
    let u = 10.0;
    let (mut missed, mut false_pos) = (0usize, 0usize);
    let mut rng = RandomSource::new(42, 0);
    for _ in 0..trials {
        let out = tslm(&atomic, u, beta, &mut rng)?;
        missed += truth.difference(&out.reported).count();
        false_pos += out.reported.difference(&truth).count();
    }
    let fnr = missed as f64 / (trials * truth.len()) as f64;
    let fp = false_pos as f64 / trials as f64;
    println!("boundary groups over {trials} runs at u={u}: FNR={fnr:.4} (bound {beta}), mean FPs={fp:.2}");
    Ok(())
}
