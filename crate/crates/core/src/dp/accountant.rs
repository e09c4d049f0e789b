use serde::Serialize;
use thiserror::Error;

/// Per-predicate privacy ledger Θ: `entries[j]` is the total ε spent on
/// predicate `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PwdpLedger {
    pub entries: Vec<f64>,
}

impl PwdpLedger {
    pub fn new(k: usize) -> Self {
        Self {
            entries: vec![0.0; k],
        }
    }

    pub fn from_entries(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

/// A charge that would push the global ε past its cap.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("charging {requested} on top of {spent} exceeds epsilon_max {max}")]
pub struct BudgetExceeded {
    pub spent: f64,
    pub requested: f64,
    pub max: f64,
}

/// Sequential-composition accountant for one query run.
///
/// Refused charges leave the state untouched.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivacyAccountant {
    epsilon_max: f64,
    spent: f64,
    ledger: PwdpLedger,
    charges: Vec<f64>,
}

impl PrivacyAccountant {
    pub fn new(epsilon_max: f64, k: usize) -> Self {
        Self {
            epsilon_max,
            spent: 0.0,
            ledger: PwdpLedger::new(k),
            charges: Vec::new(),
        }
    }

    pub fn epsilon_max(&self) -> f64 {
        self.epsilon_max
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn remaining(&self) -> f64 {
        (self.epsilon_max - self.spent).max(0.0)
    }

    pub fn ledger(&self) -> &PwdpLedger {
        &self.ledger
    }

    pub fn charges(&self) -> &[f64] {
        &self.charges
    }

    /// Records `epsilon` against the global budget and against each listed
    /// predicate. Denied when the new total would exceed `epsilon_max`.
    pub fn charge<I>(&mut self, predicates: I, epsilon: f64) -> Result<(), BudgetExceeded>
    where
        I: IntoIterator<Item = usize>,
    {
        debug_assert!(epsilon > 0.0, "charges must be positive");
        let total = self.spent + epsilon;
        if total > self.epsilon_max {
            return Err(BudgetExceeded {
                spent: self.spent,
                requested: epsilon,
                max: self.epsilon_max,
            });
        }
        self.spent = total;
        self.charges.push(epsilon);
        for j in predicates {
            self.ledger.entries[j] += epsilon;
        }
        Ok(())
    }

    /// Charge touching every predicate of the domain.
    pub fn charge_all(&mut self, epsilon: f64) -> Result<(), BudgetExceeded> {
        let k = self.ledger.k();
        self.charge(0..k, epsilon)
    }
}
