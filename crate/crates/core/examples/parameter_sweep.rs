//! Monte Carlo comparison of all four mechanisms on synthetic data while
//! sweeping β.
//!
//! `cargo run --release --example parameter_sweep [trials]`

use probe_core::data::{bind, BoundQuery};
use probe_core::harness::{run_trials, summarize, Algorithm, Layout, MetricSpec, Params, SynthSpec};
use probe_core::query::{minimize_tree, parse_query, AtomicQuery, Comparator, Filter, Literal, ValueRange};

fn fixture() -> probe_core::Result<BoundQuery> {
    let spec = SynthSpec {
        grid: vec![20, 10],
        metrics: vec![
            MetricSpec { name: "load".into(), layout: Layout::straddle(70, 15, 100, 0.1, 0.3) },
            MetricSpec { name: "errors".into(), layout: Layout::straddle(60, 15, 100, 0.1, 0.4) },
        ],
    };
    let data = probe_core::harness::synth_dataset(&spec, 3)?;
    let atomic = |id: &str, metric: &str, c: f64| {
        AtomicQuery::count(id, c, ValueRange::new(0.0, 100.0))
            .with_filter(Filter::all().and("metric", Comparator::Eq, Literal::Text(metric.into())))
    };
    let declared = vec![atomic("load", "load", 70.0), atomic("errors", "errors", 60.0)];
    let compiled = minimize_tree(&parse_query("load OR errors", &["load", "errors"])?)?;
    bind(&data, &compiled, &declared, &spec.domain())
}

fn main() -> probe_core::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let query = fixture()?;
    println!("k={} true positives={} trials={trials}", query.k, query.true_answer().len());
    println!("{:<12} {:>6} {:>8} {:>7} {:>7} {:>7}", "algorithm", "β", "mean ε", "FNR", "FPR", "denied");
    for alg in Algorithm::ALL {
        for beta in [0.025, 0.05, 0.1, 0.15] {
            let mut params = Params::default();
            params.budget.beta = beta;
            let rows = run_trials(&query, alg, &params, trials, 7)?;
            let (ans, all) = summarize(&rows);
            println!(
                "{:<12} {beta:>6} {:>8.4} {:>7.4} {:>7.4} {:>7.3}",
                alg.to_string(),
                ans.epsilon,
                ans.fnr,
                ans.fpr,
                all.denial_rate
            );
        }
    }
    Ok(())
}
