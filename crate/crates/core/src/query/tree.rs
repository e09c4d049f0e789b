use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Binary AND/OR tree over atomic query ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryTree {
    Leaf(String),
    And(Box<QueryTree>, Box<QueryTree>),
    Or(Box<QueryTree>, Box<QueryTree>),
}

impl QueryTree {
    pub fn leaf(id: impl Into<String>) -> Self {
        QueryTree::Leaf(id.into())
    }

    pub fn and(left: QueryTree, right: QueryTree) -> Self {
        QueryTree::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: QueryTree, right: QueryTree) -> Self {
        QueryTree::Or(Box::new(left), Box::new(right))
    }

    /// Leaf ids left to right, repeats included.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            QueryTree::Leaf(id) => out.push(id),
            QueryTree::And(l, r) | QueryTree::Or(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            QueryTree::Leaf(_) => 1,
            QueryTree::And(l, r) | QueryTree::Or(l, r) => l.leaf_count() + r.leaf_count(),
        }
    }

    /// Distinct ids in order of first appearance.
    pub fn distinct_ids(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for id in self.leaves() {
            if !out.iter().any(|x| x == id) {
                out.push(id.to_string());
            }
        }
        out
    }

    /// Evaluates the tree with a leaf oracle.
    pub fn eval_with<F: FnMut(&str) -> bool>(&self, leaf: &mut F) -> bool {
        match self {
            QueryTree::Leaf(id) => leaf(id),
            QueryTree::And(l, r) => {
                let a = l.eval_with(leaf);
                let b = r.eval_with(leaf);
                a && b
            }
            QueryTree::Or(l, r) => {
                let a = l.eval_with(leaf);
                let b = r.eval_with(leaf);
                a || b
            }
        }
    }

    /// Fallible evaluation: errors on the first leaf the oracle cannot resolve.
    pub fn try_eval<F: FnMut(&str) -> Result<bool>>(&self, leaf: &mut F) -> Result<bool> {
        Ok(match self {
            QueryTree::Leaf(id) => leaf(id)?,
            QueryTree::And(l, r) => {
                let a = l.try_eval(leaf)?;
                let b = r.try_eval(leaf)?;
                a && b
            }
            QueryTree::Or(l, r) => {
                let a = l.try_eval(leaf)?;
                let b = r.try_eval(leaf)?;
                a || b
            }
        })
    }
}

/// Standard boolean semantics; every leaf must be assigned.
pub fn evaluate_truth(tree: &QueryTree, assignment: &HashMap<String, bool>) -> Result<bool> {
    tree.try_eval(&mut |id| {
        assignment
            .get(id)
            .copied()
            .ok_or_else(|| Error::MissingAssignment(id.to_string()))
    })
}

// Prints with the fewest parentheses that reparse to the same tree under
// left-associative AND-over-OR precedence.
impl fmt::Display for QueryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(t: &QueryTree) -> u8 {
            match t {
                QueryTree::Or(..) => 1,
                QueryTree::And(..) => 2,
                QueryTree::Leaf(_) => 3,
            }
        }
        fn side(f: &mut fmt::Formatter<'_>, t: &QueryTree, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({t})")
            } else {
                write!(f, "{t}")
            }
        }
        match self {
            QueryTree::Leaf(id) => write!(f, "{id}"),
            QueryTree::And(l, r) | QueryTree::Or(l, r) => {
                let p = prec(self);
                let op = if p == 1 { "OR" } else { "AND" };
                side(f, l, prec(l) < p)?;
                write!(f, " {op} ")?;
                side(f, r, prec(r) <= p)
            }
        }
    }
}
