//! Query model: atomic aggregate threshold queries, AND/OR query trees,
//! the expression parser and tree minimization.

mod atomic;
mod minimize;
mod parser;
mod tree;

pub use atomic::{
    AggregateKind, AggregateSpec, AtomicQuery, Comparator, Condition, Direction, Filter, Literal,
    Thresholds, ValueRange,
};
pub use minimize::{minimize_tree, CompiledQuery, MAX_ATOMICS};
pub use parser::{parse_expression, parse_query};
pub use tree::{evaluate_truth, QueryTree};
