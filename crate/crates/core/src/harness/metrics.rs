use serde::Serialize;

use crate::error::{invalid, Result};
use crate::PredicateSet;

/// Per-trial outcome of one mechanism run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialMetrics {
    pub trial: usize,
    pub epsilon: f64,
    pub fnr: f64,
    pub fpr: f64,
    pub denied: bool,
    pub min_entropy: f64,
}

/// `(FNR, FPR)` of a reported set. FNR is 0 when nothing is true; FPR is 0
/// when everything is.
pub fn measure_rates(reported: &PredicateSet, truth: &PredicateSet, k: usize) -> (f64, f64) {
    let missed = truth.difference(reported).count();
    let wrong = reported.difference(truth).count();
    let fnr = if truth.is_empty() {
        0.0
    } else {
        missed as f64 / truth.len() as f64
    };
    let negatives = k - truth.len();
    let fpr = if negatives == 0 {
        0.0
    } else {
        wrong as f64 / negatives as f64
    };
    (fnr, fpr)
}

/// `mean + z·σ` with the population standard deviation. Reads exact
/// aggregates, so it is experiment setup, not a private release.
pub fn threshold_zscore(values: &[f64], z: f64) -> Result<f64> {
    if values.len() < 2 {
        return Err(invalid("z-score thresholds need at least two predicates"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(mean + z * var.sqrt())
}

/// Means over a set of trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub epsilon: f64,
    pub fnr: f64,
    pub fpr: f64,
    pub denial_rate: f64,
    pub min_entropy: f64,
}

/// Summaries over answered trials only and over all trials. A denied trial
/// counts as releasing nothing.
pub fn summarize(rows: &[TrialMetrics]) -> (Summary, Summary) {
    let mean = |rows: &[&TrialMetrics]| {
        let n = rows.len();
        let avg = |f: &dyn Fn(&TrialMetrics) -> f64| {
            if n == 0 {
                0.0
            } else {
                rows.iter().map(|r| f(r)).sum::<f64>() / n as f64
            }
        };
        Summary {
            trials: n,
            epsilon: avg(&|r| r.epsilon),
            fnr: avg(&|r| r.fnr),
            fpr: avg(&|r| r.fpr),
            denial_rate: avg(&|r| r.denied as u8 as f64),
            min_entropy: avg(&|r| r.min_entropy),
        }
    };
    let answered: Vec<&TrialMetrics> = rows.iter().filter(|r| !r.denied).collect();
    let all: Vec<&TrialMetrics> = rows.iter().collect();
    let mut a = mean(&answered);
    a.denial_rate = mean(&all).denial_rate;
    (a, mean(&all))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_examples() {
        let r = PredicateSet::from([0]);
        let t = PredicateSet::from([0, 1]);
        assert_eq!(measure_rates(&r, &t, 3), (0.5, 0.0));
        assert_eq!(measure_rates(&t, &t, 3), (0.0, 0.0));
        let all: PredicateSet = (0..3).collect();
        assert_eq!(measure_rates(&all, &PredicateSet::new(), 3), (0.0, 1.0));
        assert_eq!(measure_rates(&PredicateSet::new(), &all, 3), (1.0, 0.0));
    }

    #[test]
    fn zscore_examples() {
        assert_eq!(threshold_zscore(&[0.0, 10.0], 1.0).unwrap(), 10.0);
        assert_eq!(threshold_zscore(&[1.0, 2.0, 6.0], 0.0).unwrap(), 3.0);
        assert_eq!(threshold_zscore(&[4.0; 5], 2.5).unwrap(), 4.0);
        assert!(threshold_zscore(&[4.0], 1.0).is_err());
    }

    #[test]
    fn summaries() {
        let row = |trial, epsilon, fnr, denied| TrialMetrics {
            trial,
            epsilon,
            fnr,
            fpr: 0.0,
            denied,
            min_entropy: 1.0,
        };
        let rows = vec![row(0, 1.0, 0.0, false), row(1, 3.0, 1.0, true), row(2, 2.0, 0.5, false)];
        let (a, all) = summarize(&rows);
        assert_eq!(a.trials, 2);
        assert_eq!(a.epsilon, 1.5);
        assert_eq!(all.epsilon, 2.0);
        assert_eq!(all.fnr, 0.5);
        assert!((a.denial_rate - 1.0 / 3.0).abs() < 1e-15);
    }
}
