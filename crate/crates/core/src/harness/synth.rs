//! Seeded synthetic datasets with controllable mass near thresholds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnType, Dataset, PredicateDomain, Schema, Value};
use crate::error::{invalid, Result};

/// A share of the groups whose counts are drawn uniformly from `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub fraction: f64,
    pub lo: u32,
    pub hi: u32,
}

impl Band {
    pub fn new(fraction: f64, lo: u32, hi: u32) -> Self {
        Self { fraction, lo, hi }
    }
}

/// How per-group counts of one metric are laid out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Exact count per group, in grid order.
    Counts(Vec<u32>),
    /// Same count everywhere.
    Constant(u32),
    Bands(Vec<Band>),
}

impl Layout {
    /// Every count at least `2u` away from the TSLM uncertain region
    /// `[c − 2u, c]`: positives in `[c + 1, hi]`, negatives in `[0, c − 2u − 1]`.
    pub fn all_far(c: u32, u: u32, hi: u32, positive_fraction: f64) -> Self {
        let neg_hi = c.saturating_sub(2 * u + 1);
        Layout::Bands(vec![
            Band::new(positive_fraction, c + 1, hi),
            Band::new(1.0 - positive_fraction, 0, neg_hi),
        ])
    }

    /// `inside` of the groups in `[c − 2u, c]`, `positive` above `c`, the rest
    /// below `c − 2u`.
    pub fn straddle(c: u32, u: u32, hi: u32, inside: f64, positive: f64) -> Self {
        let low = c.saturating_sub(2 * u);
        Layout::Bands(vec![
            Band::new(inside, low, c),
            Band::new(positive, c + 1, hi),
            Band::new(1.0 - inside - positive, 0, low.saturating_sub(1)),
        ])
    }
}

/// One `metric` value with its per-group layout; each row carries one metric
/// so filters can pick a metric per atomic query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub name: String,
    pub layout: Layout,
}

/// Grid of integer group columns `g0, g1, ...` plus a string `metric`
/// column and a real `value` column uniform on `[0, 100)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub grid: Vec<usize>,
    pub metrics: Vec<MetricSpec>,
}

impl SynthSpec {
    pub fn single(grid: Vec<usize>, layout: Layout) -> Self {
        Self {
            grid,
            metrics: vec![MetricSpec {
                name: "m0".into(),
                layout,
            }],
        }
    }

    pub fn k(&self) -> usize {
        self.grid.iter().product()
    }

    pub fn group_columns(&self) -> Vec<String> {
        (0..self.grid.len()).map(|i| format!("g{i}")).collect()
    }

    pub fn schema(&self) -> Schema {
        let mut cols: Vec<(String, ColumnType)> = self
            .group_columns()
            .into_iter()
            .map(|c| (c, ColumnType::Integer))
            .collect();
        cols.push(("metric".into(), ColumnType::String));
        cols.push(("value".into(), ColumnType::Real));
        let refs: Vec<(&str, ColumnType)> = cols.iter().map(|(n, t)| (n.as_str(), *t)).collect();
        Schema::new(&refs)
    }

    /// Grid tuples in lexicographic order, i.e. the order the data engine
    /// sorts domains into.
    pub fn cells(&self) -> Vec<Vec<Value>> {
        let mut out = vec![Vec::new()];
        for &n in &self.grid {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..n as i64).map(move |v| {
                        let mut p = prefix.clone();
                        p.push(Value::Int(v));
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// The full grid as a declared domain, including empty cells.
    pub fn domain(&self) -> PredicateDomain {
        PredicateDomain {
            group_columns: self.group_columns(),
            predicates: self.cells(),
            derived_from_data: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.grid.contains(&0) {
            return Err(invalid("grid dimensions must be positive"));
        }
        if self.metrics.is_empty() {
            return Err(invalid("at least one metric is required"));
        }
        for m in &self.metrics {
            match &m.layout {
                Layout::Counts(c) if c.len() != self.k() => {
                    return Err(invalid(format!(
                        "metric `{}` lists {} counts for {} groups",
                        m.name,
                        c.len(),
                        self.k()
                    )))
                }
                Layout::Bands(bands) => {
                    let total: f64 = bands.iter().map(|b| b.fraction).sum();
                    if bands.iter().any(|b| b.fraction < 0.0 || b.lo > b.hi) || (total - 1.0).abs() > 1e-9 {
                        return Err(invalid(format!("metric `{}` has malformed bands", m.name)));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Per-group counts of one layout, deterministic in `rng`.
fn layout_counts(layout: &Layout, k: usize, rng: &mut ChaCha20Rng) -> Vec<u32> {
    match layout {
        Layout::Counts(c) => c.clone(),
        Layout::Constant(c) => vec![*c; k],
        Layout::Bands(bands) => {
            let mut counts = Vec::with_capacity(k);
            let mut assigned = 0usize;
            for (i, b) in bands.iter().enumerate() {
                let n = if i + 1 == bands.len() {
                    k - assigned
                } else {
                    ((b.fraction * k as f64).round() as usize).min(k - assigned)
                };
                assigned += n;
                counts.extend((0..n).map(|_| rng.random_range(b.lo..=b.hi)));
            }
            counts.shuffle(rng);
            counts
        }
    }
}

/// Exact per-group counts the generator will emit, per metric.
pub fn synth_counts(spec: &SynthSpec, seed: u64) -> Result<Vec<Vec<u32>>> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok(spec
        .metrics
        .iter()
        .map(|m| layout_counts(&m.layout, spec.k(), &mut rng))
        .collect())
}

/// Builds the dataset: for each metric and grid cell, as many rows as the
/// layout's count for that cell.
pub fn synth_dataset(spec: &SynthSpec, seed: u64) -> Result<Dataset> {
    let counts = synth_counts(spec, seed)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
    let mut data = Dataset::new(spec.schema());
    let cells = spec.cells();
    for (m, per_cell) in spec.metrics.iter().zip(&counts) {
        for (cell, &n) in cells.iter().zip(per_cell) {
            for _ in 0..n {
                let mut row = cell.clone();
                row.push(Value::Str(m.name.clone()));
                row.push(Value::Real((rng.random::<f64>() * 1000.0).floor() / 10.0));
                data.push(row)?;
            }
        }
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{enumerate_predicates, exact_aggregate, PredicateSource};
    use crate::query::{AtomicQuery, Comparator, Filter, Literal, ValueRange};

    #[test]
    fn grid_size() {
        let spec = SynthSpec::single(vec![10, 5], Layout::Constant(3));
        assert_eq!(spec.k(), 50);
        let d = synth_dataset(&spec, 0).unwrap();
        assert_eq!(d.len(), 150);
        let dom = enumerate_predicates(&d, &spec.group_columns(), PredicateSource::FromData).unwrap();
        assert_eq!(dom, PredicateDomain { derived_from_data: true, ..spec.domain() });
    }

    #[test]
    fn all_far_counts_avoid_region() {
        let spec = SynthSpec::single(vec![40], Layout::all_far(70, 10, 100, 0.5));
        let counts = &synth_counts(&spec, 3).unwrap()[0];
        assert!(counts.iter().all(|&c| c > 70 || c < 50));
        assert_eq!(counts.iter().filter(|&&c| c > 70).count(), 20);
    }

    #[test]
    fn straddle_aggregates_match_counts() {
        let spec = SynthSpec {
            grid: vec![4, 5],
            metrics: vec![
                MetricSpec { name: "a".into(), layout: Layout::straddle(50, 15, 90, 0.5, 0.25) },
                MetricSpec { name: "b".into(), layout: Layout::Constant(7) },
            ],
        };
        let counts = synth_counts(&spec, 11).unwrap();
        let inside = counts[0].iter().filter(|&&c| (20..=50).contains(&c)).count();
        assert_eq!(inside, 10);
        let d = synth_dataset(&spec, 11).unwrap();
        let q = AtomicQuery::count("qa", 50.0, ValueRange::new(0.0, 100.0))
            .with_filter(Filter::all().and("metric", Comparator::Eq, Literal::Text("a".into())));
        let agg = exact_aggregate(&d, &q, &spec.domain()).unwrap();
        let expect: Vec<f64> = counts[0].iter().map(|&c| c as f64).collect();
        assert_eq!(agg.values, expect);
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec::single(vec![6, 6], Layout::straddle(30, 5, 60, 0.3, 0.3));
        assert_eq!(synth_dataset(&spec, 9).unwrap(), synth_dataset(&spec, 9).unwrap());
    }
}
