//! Tabular data: CSV loading, predicate domains, exact aggregates and the
//! non-private ground truth used as the testing oracle.

mod aggregate;
mod dataset;

pub use aggregate::{
    bind, enumerate_predicates, exact_aggregate, true_answer, BoundAtomic, BoundQuery,
    GroupAggregates, PredicateDomain, PredicateSource,
};
pub use dataset::{infer_schema, load_csv, Column, ColumnType, Dataset, Schema, Value};
