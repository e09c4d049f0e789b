//! Threshold-shift Laplace mechanism.
//!
//! Noise calibrated to `ε = Δg·ln(1/(2β))/u` is added to every aggregate and
//! each noisy value is compared against the threshold shifted by `u` toward
//! the reporting side. A predicate whose exact value clears the threshold is
//! then missed only when the noise falls below `-u`, which has probability
//! `½·e^{-uε/Δg} = β`.

use crate::data::BoundAtomic;
use crate::dp::RandomSource;
use crate::error::{invalid, Result};
use crate::PredicateSet;

#[derive(Debug, Clone, PartialEq)]
pub struct TslmOutcome {
    /// Noisy aggregates `G`, one per predicate.
    pub noisy: Vec<f64>,
    /// Predicates reported positive.
    pub reported: PredicateSet,
    pub epsilon: f64,
}

/// ε needed for a β-bound on the false negative rate at uncertain region `u`.
pub fn tslm_epsilon(sensitivity: f64, beta: f64, u: f64) -> f64 {
    sensitivity * (1.0 / (2.0 * beta)).ln() / u
}

/// Probability that Laplace noise at `epsilon` pushes a value below `-u`.
pub fn laplace_tail(sensitivity: f64, epsilon: f64, u: f64) -> f64 {
    0.5 * (-u * epsilon / sensitivity).exp()
}

pub fn check_tslm_params(atomic: &BoundAtomic, u: f64, beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(invalid(format!("beta must lie in (0, 0.5), got {beta}")));
    }
    if !(u > 0.0) {
        return Err(invalid(format!("uncertain region must be positive, got {u}")));
    }
    let width = atomic.range_width();
    if u > width * (1.0 + 1e-12) {
        return Err(invalid(format!("uncertain region {u} exceeds value range width {width}")));
    }
    Ok(())
}

/// Reporting rule shared by every mechanism: strict comparison against the
/// shifted threshold, mirrored for `LESS` queries.
pub fn shifted_report(atomic: &BoundAtomic, noisy: &[f64], u: f64) -> PredicateSet {
    let dir = atomic.direction();
    (0..noisy.len())
        .filter(|&j| dir.orient(noisy[j]) > dir.orient(atomic.thresholds[j]) - u)
        .collect()
}

/// Runs the mechanism on every predicate of `atomic`.
pub fn tslm(atomic: &BoundAtomic, u: f64, beta: f64, rng: &mut RandomSource) -> Result<TslmOutcome> {
    check_tslm_params(atomic, u, beta)?;
    let dg = atomic.sensitivity();
    let epsilon = tslm_epsilon(dg, beta, u);
    let scale = dg / epsilon;
    let noisy: Vec<f64> = atomic.exact.iter().map(|&x| x + rng.laplace(scale)).collect();
    let reported = shifted_report(atomic, &noisy, u);
    Ok(TslmOutcome {
        noisy,
        reported,
        epsilon,
    })
}
