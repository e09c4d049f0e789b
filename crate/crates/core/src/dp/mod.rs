//! Randomness, the threshold-shift Laplace mechanism and privacy accounting.

mod accountant;
mod rng;
mod tslm;

pub use accountant::{BudgetExceeded, PrivacyAccountant, PwdpLedger};
pub use rng::{laplace_from_uniform, laplace_sample, RandomSource};
pub use tslm::{check_tslm_params, laplace_tail, shifted_report, tslm, tslm_epsilon, TslmOutcome};
