//! Query configuration files (JSON or TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{
    bind, enumerate_predicates, infer_schema, load_csv, BoundQuery, Dataset, PredicateDomain, PredicateSource,
    Schema, Value,
};
use crate::error::{Error, Result};
use crate::query::{
    minimize_tree, parse_query, AggregateKind, AggregateSpec, AtomicQuery, CompiledQuery, Direction, Filter,
    Literal, Thresholds, ValueRange,
};

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicConfig {
    pub id: String,
    pub aggregate: AggregateKind,
    #[serde(default = "one")]
    pub sensitivity: f64,
    pub value_range: ValueRange,
    #[serde(default)]
    pub filter: Filter,
    pub thresholds: Thresholds,
    #[serde(default)]
    pub direction: Direction,
}

impl From<&AtomicConfig> for AtomicQuery {
    fn from(a: &AtomicConfig) -> Self {
        AtomicQuery {
            id: a.id.clone(),
            aggregate: AggregateSpec::new(a.aggregate.clone(), a.sensitivity),
            filter: a.filter.clone(),
            thresholds: a.thresholds.clone(),
            direction: a.direction,
            value_range: a.value_range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainConfig {
    /// `"from-data"`.
    Keyword(String),
    Explicit(Vec<Vec<Literal>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateConfig {
    pub columns: Vec<String>,
    pub domain: DomainConfig,
}

/// A query file: atomic declarations, the expression over them and the
/// predicate domain. The schema is inferred from the data when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryConfig {
    #[serde(default)]
    pub schema: Option<Schema>,
    pub atomics: Vec<AtomicConfig>,
    pub expression: String,
    pub predicates: PredicateConfig,
    /// Minimize the expression before running; on by default.
    #[serde(default = "yes")]
    pub minimize: bool,
}

impl QueryConfig {
    /// Parses by extension: `.toml` as TOML, anything else as JSON.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        if is_toml {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        }
    }

    pub fn atomic_queries(&self) -> Result<Vec<AtomicQuery>> {
        let mut out: Vec<AtomicQuery> = Vec::with_capacity(self.atomics.len());
        for a in &self.atomics {
            if out.iter().any(|q| q.id == a.id) {
                return Err(Error::DuplicateAtomic(a.id.clone()));
            }
            let q = AtomicQuery::from(a);
            q.validate()?;
            out.push(q);
        }
        Ok(out)
    }

    pub fn compile(&self) -> Result<CompiledQuery> {
        let ids: Vec<&str> = self.atomics.iter().map(|a| a.id.as_str()).collect();
        let tree = parse_query(&self.expression, &ids)?;
        if self.minimize {
            minimize_tree(&tree)
        } else {
            Ok(CompiledQuery::from_tree(tree))
        }
    }

    pub fn domain(&self, dataset: &Dataset) -> Result<PredicateDomain> {
        let source = match &self.predicates.domain {
            DomainConfig::Keyword(k) if k == "from-data" => PredicateSource::FromData,
            DomainConfig::Keyword(k) => {
                return Err(Error::Config(format!("unknown domain keyword `{k}`")));
            }
            DomainConfig::Explicit(rows) => {
                let cols: Vec<usize> = self
                    .predicates
                    .columns
                    .iter()
                    .map(|c| dataset.schema.index(c))
                    .collect::<Result<_>>()?;
                let typed = rows
                    .iter()
                    .map(|row| {
                        if row.len() != cols.len() {
                            return Err(Error::Config(format!(
                                "predicate has {} values for {} columns",
                                row.len(),
                                cols.len()
                            )));
                        }
                        row.iter()
                            .zip(&cols)
                            .map(|(lit, &c)| {
                                Value::from_literal(lit, dataset.schema.column_type(c)).ok_or_else(|| {
                                    Error::Config(format!(
                                        "`{lit}` does not fit column `{}`",
                                        dataset.schema.columns[c].name
                                    ))
                                })
                            })
                            .collect()
                    })
                    .collect::<Result<_>>()?;
                PredicateSource::Explicit(typed)
            }
        };
        enumerate_predicates(dataset, &self.predicates.columns, source)
    }

    /// Loads the data (with the declared or inferred schema) and binds the
    /// compiled query. `z` replaces every atomic's thresholds by a z-score
    /// threshold.
    pub fn bind_csv(&self, data: impl AsRef<Path>, z: Option<f64>) -> Result<(BoundQuery, PredicateDomain)> {
        let schema = match &self.schema {
            Some(s) => s.clone(),
            None => infer_schema(data.as_ref())?,
        };
        let dataset = load_csv(data, &schema)?;
        self.bind(&dataset, z)
    }

    pub fn bind(&self, dataset: &Dataset, z: Option<f64>) -> Result<(BoundQuery, PredicateDomain)> {
        let mut declared = self.atomic_queries()?;
        if let Some(z) = z {
            for q in &mut declared {
                q.thresholds = Thresholds::ZScore { zscore: z };
            }
        }
        let compiled = self.compile()?;
        let domain = self.domain(dataset)?;
        let bound = bind(dataset, &compiled, &declared, &domain)?;
        Ok((bound, domain))
    }
}
