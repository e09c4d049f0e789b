//! Apportioning the FNR budget β and the FPR budget α across sub-queries.
//!
//! Running sub-query `i` with `β_i` at uncertain region `u_i` costs
//! `Δg_i·ln(1/(2β_i))/u_i`, once per occurrence. Minimizing the total subject
//! to `Σ o_i·β_i = β` gives, by Lagrange multipliers,
//!
//! ```text
//! β_i = β · (Δg_i/u_i) / Σ_y o_y·Δg_y/u_y
//! ```
//!
//! which is the product form `Δg_i·β·Π_{x≠i} u_x / Σ_y o_y·Δg_y·Π_{x≠y} u_x`
//! with the common factor `Π u_x` cancelled.

use serde::Serialize;

use crate::dp::tslm_epsilon;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApportionInput {
    pub u: Vec<f64>,
    pub dg: Vec<f64>,
    pub o: Vec<usize>,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApportionOutput {
    pub betas: Vec<f64>,
    pub predicted_epsilon: f64,
}

impl ApportionInput {
    pub fn new(u: Vec<f64>, dg: Vec<f64>, o: Vec<usize>, beta: f64) -> Result<Self> {
        let input = Self { u, dg, o, beta };
        input.validate()?;
        Ok(input)
    }

    /// All occurrences 1.
    pub fn flat(u: Vec<f64>, dg: Vec<f64>, beta: f64) -> Result<Self> {
        let o = vec![1; u.len()];
        Self::new(u, dg, o, beta)
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.u.len();
        if n == 0 {
            return Err(invalid("apportionment needs at least one sub-query"));
        }
        if self.dg.len() != n || self.o.len() != n {
            return Err(invalid("u, dg and o must have equal length"));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(invalid(format!("beta must lie in (0, 0.5), got {}", self.beta)));
        }
        let positive = |x: &f64| *x > 0.0 && x.is_finite();
        if !self.u.iter().all(positive) || !self.dg.iter().all(positive) {
            return Err(invalid("u and dg entries must be positive"));
        }
        if self.o.contains(&0) {
            return Err(invalid("occurrences must be positive"));
        }
        Ok(())
    }

    fn weights(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.o[i] as f64 * self.dg[i] / self.u[i])
            .collect()
    }
}

/// Two-query split: `β_1 = u_2Δg_1β/(u_1Δg_2 + u_2Δg_1)`, `β_2 = β − β_1`.
pub fn beta_split_two(u1: f64, u2: f64, dg1: f64, dg2: f64, beta: f64) -> (f64, f64) {
    let den = u1 * dg2 + u2 * dg1;
    (u2 * dg1 * beta / den, u1 * dg2 * beta / den)
}

/// Closed-form optimal split for a tree with occurrence counts.
pub fn beta_split_tree(input: &ApportionInput) -> Result<ApportionOutput> {
    input.validate()?;
    let n = input.n();
    let betas: Vec<f64> = if n <= 8 {
        // Product form, exactly as derived.
        let prod_except = |i: usize| -> f64 {
            (0..n).filter(|&x| x != i).map(|x| input.u[x]).product()
        };
        let den: f64 = (0..n)
            .map(|y| prod_except(y) * input.o[y] as f64 * input.dg[y])
            .sum();
        (0..n)
            .map(|i| input.dg[i] * input.beta * prod_except(i) / den)
            .collect()
    } else {
        // Log space: ln β_i = ln β + ln(Δg_i/u_i) − logsumexp_y ln(o_y·Δg_y/u_y).
        let logs: Vec<f64> = input.weights().iter().map(|w| w.ln()).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
        (0..n)
            .map(|i| (input.beta.ln() + (input.dg[i] / input.u[i]).ln() - lse).exp())
            .collect()
    };
    let predicted_epsilon = predicted_epsilon(input, &betas);
    Ok(ApportionOutput {
        betas,
        predicted_epsilon,
    })
}

/// Equal split `β_i = β/Σo`, the baseline rule.
pub fn beta_split_equal(input: &ApportionInput) -> Result<ApportionOutput> {
    input.validate()?;
    let total: usize = input.o.iter().sum();
    let betas = vec![input.beta / total as f64; input.n()];
    let predicted_epsilon = predicted_epsilon(input, &betas);
    Ok(ApportionOutput {
        betas,
        predicted_epsilon,
    })
}

/// `α_i = α/(n·o_i)`, so that `Σ o_i·α_i = α`.
pub fn alpha_split(alpha: f64, o: &[usize]) -> Vec<f64> {
    let n = o.len() as f64;
    o.iter().map(|&oi| alpha / (n * oi as f64)).collect()
}

/// `Σ o_i·Δg_i·ln(1/(2β_i))/u_i`.
pub fn predicted_epsilon(input: &ApportionInput, betas: &[f64]) -> f64 {
    (0..input.n())
        .map(|i| input.o[i] as f64 * tslm_epsilon(input.dg[i], betas[i], input.u[i]))
        .sum()
}

const ORACLE_TOL: f64 = 1e-12;
const ORACLE_SWEEPS: usize = 10_000;

/// Numeric optimum of `Σ w_i ln β_i` subject to `Σ o_i β_i = β`, with
/// `w_i = o_i·Δg_i/u_i`, found by pairwise coordinate ascent. Each pair step
/// holds `o_iβ_i + o_jβ_j` fixed and bisects on the derivative. Independent
/// of the closed form; used to verify it.
pub fn numeric_lagrange_oracle(input: &ApportionInput) -> Result<Vec<f64>> {
    input.validate()?;
    let n = input.n();
    let w = input.weights();
    let total_o: usize = input.o.iter().sum();
    let mut b = vec![input.beta / total_o as f64; n];
    if n == 1 {
        return Ok(b);
    }
    for _ in 0..ORACLE_SWEEPS {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let (oi, oj) = (input.o[i] as f64, input.o[j] as f64);
                let s = oi * b[i] + oj * b[j];
                // d/dβ_i [w_i ln β_i + w_j ln((s − o_iβ_i)/o_j)]
                let grad = |x: f64| w[i] / x - w[j] * oi / (s - oi * x);
                let (mut lo, mut hi) = (0.0, s / oi);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if grad(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= f64::EPSILON * hi {
                        break;
                    }
                }
                let x = 0.5 * (lo + hi);
                moved = moved.max((x - b[i]).abs() / input.beta);
                b[i] = x;
                b[j] = (s - oi * x) / oj;
            }
        }
        if moved < ORACLE_TOL {
            return Ok(b);
        }
    }
    Err(Error::NoConvergence(ORACLE_SWEEPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn two_way_examples() {
        let (a, b) = beta_split_two(1.0, 1.0, 1.0, 1.0, 0.05);
        assert!((a - 0.025).abs() < 1e-15 && (b - 0.025).abs() < 1e-15);
        let (a, b) = beta_split_two(2.0, 1.0, 1.0, 1.0, 0.06);
        assert!((a - 0.02).abs() < 1e-15 && (b - 0.04).abs() < 1e-15);
        let (a, b) = beta_split_two(1.0, 1.0, 3.0, 1.0, 0.04);
        assert!((a - 0.03).abs() < 1e-15 && (b - 0.01).abs() < 1e-15);
    }

    #[test]
    fn tree_examples() {
        let inp = ApportionInput::new(vec![1.0; 3], vec![1.0; 3], vec![2, 1, 1], 0.04).unwrap();
        let out = beta_split_tree(&inp).unwrap();
        assert!(close(&out.betas, &[0.01, 0.01, 0.01], 1e-15));

        let inp = ApportionInput::flat(vec![1.0; 3], vec![1.0; 3], 0.06).unwrap();
        assert!(close(&beta_split_tree(&inp).unwrap().betas, &[0.02; 3], 1e-15));

        let inp = ApportionInput::flat(vec![2.0, 1.0], vec![1.0, 1.0], 0.06).unwrap();
        let (a, b) = beta_split_two(2.0, 1.0, 1.0, 1.0, 0.06);
        assert!(close(&beta_split_tree(&inp).unwrap().betas, &[a, b], 1e-15));
    }

    #[test]
    fn alpha_examples() {
        assert!(close(&alpha_split(0.1, &[1, 1]), &[0.05, 0.05], 1e-15));
        assert!(close(&alpha_split(0.1, &[1]), &[0.1], 1e-15));
        let a = alpha_split(0.12, &[2, 1, 1]);
        assert!(close(&a, &[0.02, 0.04, 0.04], 1e-15));
        assert!((2.0 * a[0] + a[1] + a[2] - 0.12).abs() < 1e-15);
    }

    #[test]
    fn predicted_epsilon_examples() {
        let inp = ApportionInput::flat(vec![10.0], vec![1.0], 0.05).unwrap();
        assert!((predicted_epsilon(&inp, &[0.05]) - 10f64.ln() / 10.0).abs() < 1e-15);

        let inp = ApportionInput::flat(vec![2.0, 1.0], vec![1.0, 1.0], 0.05).unwrap();
        let opt = beta_split_tree(&inp).unwrap().predicted_epsilon;
        assert!(opt <= predicted_epsilon(&inp, &[0.025, 0.025]));

        let flat = ApportionInput::new(vec![30.0; 3], vec![1.0; 3], vec![1, 1, 1], 0.05).unwrap();
        let dup = ApportionInput::new(vec![30.0; 3], vec![1.0; 3], vec![2, 1, 1], 0.05).unwrap();
        assert!(
            beta_split_tree(&dup).unwrap().predicted_epsilon
                >= beta_split_tree(&flat).unwrap().predicted_epsilon
        );
    }

    #[test]
    fn oracle_examples() {
        let inp = ApportionInput::flat(vec![2.0, 1.0], vec![1.0, 1.0], 0.06).unwrap();
        assert!(close(&numeric_lagrange_oracle(&inp).unwrap(), &[0.02, 0.04], 1e-9));
        let inp = ApportionInput::flat(vec![3.0; 4], vec![2.0; 4], 0.08).unwrap();
        assert!(close(&numeric_lagrange_oracle(&inp).unwrap(), &[0.02; 4], 1e-12));
    }

    #[test]
    fn log_space_matches_product_form() {
        let u: Vec<f64> = (0..12).map(|i| 0.5 + i as f64).collect();
        let dg: Vec<f64> = (0..12).map(|i| 1.0 + (i % 3) as f64).collect();
        let o: Vec<usize> = (0..12).map(|i| 1 + i % 2).collect();
        let big = ApportionInput::new(u.clone(), dg.clone(), o.clone(), 0.05).unwrap();
        let out = beta_split_tree(&big).unwrap();
        let sum: f64 = out.betas.iter().zip(&o).map(|(b, &oi)| b * oi as f64).sum();
        assert!((sum - 0.05).abs() < 1e-12);
        let oracle = numeric_lagrange_oracle(&big).unwrap();
        assert!(close(&out.betas, &oracle, 1e-9));
    }

    fn instance() -> impl Strategy<Value = ApportionInput> {
        (1usize..=5).prop_flat_map(|n| {
            (
                prop::collection::vec(0.1f64..10.0, n),
                prop::collection::vec(0.1f64..10.0, n),
                prop::collection::vec(1usize..=3, n),
                0.001f64..0.49,
            )
                .prop_map(|(u, dg, o, beta)| ApportionInput::new(u, dg, o, beta).unwrap())
        })
    }

    proptest! {
        #[test]
        fn constraint_is_exact(inp in instance()) {
            let out = beta_split_tree(&inp).unwrap();
            let s: f64 = out.betas.iter().zip(&inp.o).map(|(b, &o)| b * o as f64).sum();
            prop_assert!((s - inp.beta).abs() < 1e-9);
            prop_assert!(out.betas.iter().all(|&b| b > 0.0 && b <= inp.beta * (1.0 + 1e-12)));
        }

        #[test]
        fn matches_oracle(inp in instance()) {
            let out = beta_split_tree(&inp).unwrap();
            let oracle = numeric_lagrange_oracle(&inp).unwrap();
            prop_assert!(close(&out.betas, &oracle, 1e-6));
        }

        #[test]
        fn local_perturbation_never_helps(inp in instance()) {
            let out = beta_split_tree(&inp).unwrap();
            let base = out.predicted_epsilon;
            let delta = 1e-4 * inp.beta;
            for i in 0..inp.n() {
                for j in 0..inp.n() {
                    if i == j { continue; }
                    let mut b = out.betas.clone();
                    // Keep Σ o β fixed: o_i·Δ_i = o_j·Δ_j.
                    b[i] += delta / inp.o[i] as f64;
                    b[j] -= delta / inp.o[j] as f64;
                    if b[j] <= 0.0 { continue; }
                    prop_assert!(predicted_epsilon(&inp, &b) >= base - 1e-12);
                }
            }
        }

        #[test]
        fn unit_occurrences_two_way(u1 in 0.1f64..10.0, u2 in 0.1f64..10.0,
                                    d1 in 0.1f64..10.0, d2 in 0.1f64..10.0, beta in 0.001f64..0.49) {
            let inp = ApportionInput::flat(vec![u1, u2], vec![d1, d2], beta).unwrap();
            let (a, b) = beta_split_two(u1, u2, d1, d2, beta);
            prop_assert!(close(&beta_split_tree(&inp).unwrap().betas, &[a, b], 1e-15));
        }
    }
}
