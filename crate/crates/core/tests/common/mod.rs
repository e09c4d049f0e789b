#![allow(dead_code)]

use probe_core::data::{bind, BoundAtomic, BoundQuery};
use probe_core::harness::{synth_dataset, Layout, MetricSpec, SynthSpec};
use probe_core::query::{
    minimize_tree, parse_query, AtomicQuery, CompiledQuery, Comparator, Filter, Literal, ValueRange,
};

pub const RANGE: ValueRange = ValueRange { lo: 0.0, hi: 100.0 };

pub fn count_atomic(id: &str, c: f64, values: Vec<f64>) -> BoundAtomic {
    BoundAtomic::from_values(AtomicQuery::count(id, c, RANGE), values).unwrap()
}

/// Binds `expr` over atomics given as `(id, threshold, exact values)`.
/// Minimizes unless `raw`.
pub fn query_from_values(expr: &str, atomics: Vec<(&str, f64, Vec<f64>)>, raw: bool) -> BoundQuery {
    let ids: Vec<&str> = atomics.iter().map(|a| a.0).collect();
    let tree = parse_query(expr, &ids).unwrap();
    let compiled = if raw { CompiledQuery::from_tree(tree) } else { minimize_tree(&tree).unwrap() };
    let bound = compiled
        .atomics
        .iter()
        .map(|id| {
            let (_, c, v) = atomics.iter().find(|a| a.0 == id).unwrap();
            count_atomic(id, *c, v.clone())
        })
        .collect();
    BoundQuery::new(compiled, bound).unwrap()
}

/// Generates a synthetic table with one metric per atomic and binds `expr`
/// through the data engine. Every atomic counts the rows of its metric and
/// uses threshold `c` on the range [0, 100].
pub fn synth_query(grid: Vec<usize>, layouts: Vec<(&str, Layout)>, c: f64, expr: &str, seed: u64) -> BoundQuery {
    let spec = SynthSpec {
        grid,
        metrics: layouts
            .iter()
            .map(|(name, layout)| MetricSpec {
                name: name.to_string(),
                layout: layout.clone(),
            })
            .collect(),
    };
    let data = synth_dataset(&spec, seed).unwrap();
    let declared: Vec<AtomicQuery> = layouts
        .iter()
        .map(|(name, _)| {
            AtomicQuery::count(*name, c, RANGE).with_filter(Filter::all().and(
                "metric",
                Comparator::Eq,
                Literal::Text(name.to_string()),
            ))
        })
        .collect();
    let ids: Vec<&str> = layouts.iter().map(|l| l.0).collect();
    let compiled = minimize_tree(&parse_query(expr, &ids).unwrap()).unwrap();
    bind(&data, &compiled, &declared, &spec.domain()).unwrap()
}

/// Binomial 3σ slack around a rate `p` over `n` trials.
pub fn three_sigma(p: f64, n: usize) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}
