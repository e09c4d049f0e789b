//! Load a CSV, enumerate the group-by predicates and compute exact
//! per-group aggregates and the non-private answer of a query.
//!
//! `cargo run --example csv_ground_truth`

use std::path::PathBuf;

use probe_core::data::{exact_aggregate, infer_schema, load_csv};
use probe_core::harness::QueryConfig;

fn main() -> probe_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let csv = dir.join("occupancy.csv");
    let schema = infer_schema(&csv)?;
    for c in &schema.columns {
        println!("column {:<8} {:?}", c.name, c.ty);
    }
    let data = load_csv(&csv, &schema)?;
    println!("{} rows", data.len());

    let cfg = QueryConfig::load(dir.join("occupancy.json"))?;
    let domain = cfg.domain(&data)?;
    println!("{} predicates over {:?}", domain.k(), domain.group_columns);

    for atomic in cfg.atomic_queries()? {
        let agg = exact_aggregate(&data, &atomic, &domain)?;
        let above = agg.values.iter().filter(|v| **v > 0.0).count();
        let preview: Vec<String> = agg.values.iter().take(6).map(|v| format!("{v:.1}")).collect();
        println!("  {:<7} non-zero in {above:>3} groups, first: {}", atomic.id, preview.join(" "));
    }

    let (bound, _) = cfg.bind(&data, None)?;
    let truth = bound.true_answer();
    println!("`{}` holds for {} of {} groups", cfg.expression, truth.len(), bound.k);
    for &j in truth.iter().take(5) {
        let cell: Vec<String> = domain.predicates[j].iter().map(|v| v.to_string()).collect();
        println!("  {}", cell.join(" / "));
    }
    Ok(())
}
