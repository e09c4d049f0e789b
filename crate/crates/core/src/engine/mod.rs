//! The two-phase mechanism and its single-phase baseline.

mod estimate;
mod probe;

use serde::Serialize;

pub use estimate::{estimate_fps, find_u_opt, FpEstimate, LeafView};
pub use probe::{
    naive, phase_one, phase_two, probe, Budget, Execution, LeafState, NaiveConfig, ProbeConfig,
    SplitRule,
};

use crate::dp::PwdpLedger;
use crate::ent::SubQueryTrace;
use crate::PredicateSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DenialReason {
    BudgetExceeded,
    FpBoundUnmet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Answered(PredicateSet),
    Denied(DenialReason),
}

impl Outcome {
    pub fn is_denied(&self) -> bool {
        matches!(self, Outcome::Denied(_))
    }

    pub fn answer(&self) -> Option<&PredicateSet> {
        match self {
            Outcome::Answered(s) => Some(s),
            Outcome::Denied(_) => None,
        }
    }
}

/// One mechanism execution of a leaf (or of one iteration of a multi-step
/// sub-query).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafRun {
    pub slot: usize,
    pub atomic_id: String,
    /// 1 or 2 for the two-phase mechanism, the iteration number for the
    /// multi-step one.
    pub phase: usize,
    pub u: f64,
    pub beta: f64,
    pub sensitivity: f64,
    pub epsilon: f64,
}

/// FP estimate taken for a leaf, after phase one (`phase == 1`) or on the
/// final output (`phase == 2`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub slot: usize,
    pub atomic_id: String,
    pub phase: usize,
    pub u: f64,
    pub beta: f64,
    pub f_max: f64,
    pub estimate: FpEstimate,
}

/// Outcome of one query run plus everything spent to get there. On denial
/// `epsilon` is what had been spent when the run stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub outcome: Outcome,
    pub epsilon: f64,
    pub epsilon_max: f64,
    /// ε per leaf slot, in left-to-right leaf order.
    pub slot_epsilon: Vec<f64>,
    /// ε per distinct atomic, in compiled order.
    pub atomic_epsilon: Vec<f64>,
    pub ledger: PwdpLedger,
    pub runs: Vec<LeafRun>,
    pub estimates: Vec<EstimateRecord>,
    /// Per sub-query budgets of the multi-step mechanism; empty otherwise.
    pub subqueries: Vec<SubQueryTrace>,
}

impl ProbeResult {
    pub fn is_denied(&self) -> bool {
        self.outcome.is_denied()
    }

    /// Released predicates; empty on denial.
    pub fn reported(&self) -> PredicateSet {
        self.outcome.answer().cloned().unwrap_or_default()
    }
}
