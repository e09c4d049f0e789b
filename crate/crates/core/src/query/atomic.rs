//! Atomic aggregate threshold queries.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "column", rename_all = "snake_case")]
pub enum AggregateKind {
    CountStar,
    CountDistinct(String),
    Sum(String),
    Avg(String),
}

impl AggregateKind {
    /// Column read by the aggregate, if any.
    pub fn column(&self) -> Option<&str> {
        match self {
            AggregateKind::CountStar => None,
            AggregateKind::CountDistinct(c) | AggregateKind::Sum(c) | AggregateKind::Avg(c) => {
                Some(c)
            }
        }
    }

    pub fn is_count(&self) -> bool {
        matches!(self, AggregateKind::CountStar | AggregateKind::CountDistinct(_))
    }
}

impl fmt::Display for AggregateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregateKind::CountStar => write!(f, "COUNT(*)"),
            AggregateKind::CountDistinct(c) => write!(f, "COUNT(DISTINCT {c})"),
            AggregateKind::Sum(c) => write!(f, "SUM({c})"),
            AggregateKind::Avg(c) => write!(f, "AVG({c})"),
        }
    }
}

/// Aggregate function together with its L1 sensitivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSpec {
    pub kind: AggregateKind,
    pub sensitivity: f64,
}

impl AggregateSpec {
    pub fn count_star() -> Self {
        Self {
            kind: AggregateKind::CountStar,
            sensitivity: 1.0,
        }
    }

    pub fn new(kind: AggregateKind, sensitivity: f64) -> Self {
        Self { kind, sensitivity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=", alias = "≠", alias = "<>")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=", alias = "≤")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=", alias = "≥")]
    Ge,
}

impl Comparator {
    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Comparator::Eq => ord == Equal,
            Comparator::Ne => ord != Equal,
            Comparator::Lt => ord == Less,
            Comparator::Le => ord != Greater,
            Comparator::Gt => ord == Greater,
            Comparator::Ge => ord != Less,
        }
    }
}

/// Untyped literal from a query config; typed against the schema at bind time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Number(f64),
    Text(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(x) => write!(f, "{x}"),
            Literal::Text(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub column: String,
    pub op: Comparator,
    pub value: Literal,
}

/// Conjunction of column conditions. An empty filter keeps every row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Filter {
    pub conditions: Vec<Condition>,
}

impl Filter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn and(mut self, column: impl Into<String>, op: Comparator, value: Literal) -> Self {
        self.conditions.push(Condition {
            column: column.into(),
            op,
            value,
        });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Greater,
    Less,
}

impl Direction {
    /// Maps a value into the space where the query reads `value > threshold`.
    #[inline]
    pub fn orient(self, v: f64) -> f64 {
        match self {
            Direction::Greater => v,
            Direction::Less => -v,
        }
    }

    /// Whether an exact aggregate satisfies the (strict) threshold condition.
    #[inline]
    pub fn satisfied(self, value: f64, threshold: f64) -> bool {
        match self {
            Direction::Greater => value > threshold,
            Direction::Less => value < threshold,
        }
    }
}

/// Public closed interval of possible aggregate values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ValueRange {
    pub lo: f64,
    pub hi: f64,
}

impl ValueRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

impl From<[f64; 2]> for ValueRange {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<ValueRange> for [f64; 2] {
    fn from(r: ValueRange) -> Self {
        [r.lo, r.hi]
    }
}

/// Thresholds `c_1..c_k`, either broadcast or given per predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Thresholds {
    Scalar(f64),
    PerPredicate(Vec<f64>),
    /// Mean + z·stddev of the exact aggregates (non-private experiment setup).
    ZScore { zscore: f64 },
    Indexed(BTreeMap<String, f64>),
}

impl Thresholds {
    /// Resolves to one threshold per predicate. Z-score thresholds need the
    /// exact aggregates and are resolved by the data engine instead.
    pub fn resolve(&self, k: usize) -> Result<Vec<f64>> {
        match self {
            Thresholds::Scalar(c) => Ok(vec![*c; k]),
            Thresholds::PerPredicate(v) if v.len() == k => Ok(v.clone()),
            Thresholds::PerPredicate(v) => Err(Error::InvalidParameter(format!(
                "{} thresholds given for {k} predicates",
                v.len()
            ))),
            Thresholds::Indexed(map) => {
                let mut out = vec![f64::NAN; k];
                for (key, c) in map {
                    let j: usize = key
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad predicate index `{key}`")))?;
                    if j >= k {
                        return Err(Error::InvalidParameter(format!(
                            "threshold index {j} outside predicate domain of size {k}"
                        )));
                    }
                    out[j] = *c;
                }
                if let Some(j) = out.iter().position(|c| c.is_nan()) {
                    return Err(Error::InvalidParameter(format!("no threshold for predicate {j}")));
                }
                Ok(out)
            }
            Thresholds::ZScore { .. } => Err(Error::InvalidParameter(
                "z-score thresholds must be resolved against exact aggregates".into(),
            )),
        }
    }
}

/// One aggregate threshold sub-query: returns the predicates whose filtered
/// aggregate is strictly above (or below) the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicQuery {
    pub id: String,
    pub aggregate: AggregateSpec,
    pub filter: Filter,
    pub thresholds: Thresholds,
    pub direction: Direction,
    pub value_range: ValueRange,
}

impl AtomicQuery {
    /// A `COUNT(*) > c` query without a filter.
    pub fn count(id: impl Into<String>, threshold: f64, value_range: ValueRange) -> Self {
        Self {
            id: id.into(),
            aggregate: AggregateSpec::count_star(),
            filter: Filter::all(),
            thresholds: Thresholds::Scalar(threshold),
            direction: Direction::Greater,
            value_range,
        }
    }

    pub fn with_filter(mut self, filter: Filter) -> Self {
        self.filter = filter;
        self
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_aggregate(mut self, aggregate: AggregateSpec) -> Self {
        self.aggregate = aggregate;
        self
    }

    pub fn with_thresholds(mut self, thresholds: Thresholds) -> Self {
        self.thresholds = thresholds;
        self
    }

    pub fn sensitivity(&self) -> f64 {
        self.aggregate.sensitivity
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Error::InvalidAtomic {
            id: self.id.clone(),
            message,
        };
        let dg = self.aggregate.sensitivity;
        if !(dg > 0.0 && dg.is_finite()) {
            return Err(bad(format!("sensitivity must be positive, got {dg}")));
        }
        if self.aggregate.kind.is_count() && dg != 1.0 {
            return Err(bad(format!("count aggregates have sensitivity 1, got {dg}")));
        }
        let r = self.value_range;
        if !(r.width() > 0.0 && r.width().is_finite()) {
            return Err(bad(format!("value range [{}, {}] has no width", r.lo, r.hi)));
        }
        let check = |c: f64| {
            if r.contains(c) {
                Ok(())
            } else {
                Err(bad(format!("threshold {c} outside value range [{}, {}]", r.lo, r.hi)))
            }
        };
        match &self.thresholds {
            Thresholds::Scalar(c) => check(*c)?,
            Thresholds::PerPredicate(v) => v.iter().try_for_each(|c| check(*c))?,
            Thresholds::Indexed(m) => m.values().try_for_each(|c| check(*c))?,
            Thresholds::ZScore { .. } => {}
        }
        Ok(())
    }
}
